#include "chiptrap/adiabatic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "chiptrap/errors.hpp"
#include "chiptrap/parallel.hpp"

namespace chiptrap {

CouplingTable::CouplingTable(int i, int f, std::vector<double> s, std::vector<double> a,
                             std::vector<double> domega)
    : i_(i), f_(f), s_(std::move(s)), a_(std::move(a)), dw_(std::move(domega)) {
    if (s_.size() < 3 || a_.size() != s_.size() || dw_.size() != s_.size())
        throw InputError("CouplingTable: inconsistent table sizes");
    a_spline_ = CubicSpline(s_, a_);
    dw_spline_ = CubicSpline(s_, dw_);
}

double CouplingTable::max_abs_a() const {
    double m = 0.0;
    for (double v : a_) m = std::max(m, std::abs(v));
    return m;
}

namespace {

// Weights of the three-point first derivative at node j from nodes (j0, j0+1, j0+2).
struct Stencil {
    std::size_t j0;
    double w[3];
};

Stencil derivative_stencil(const std::vector<double>& s, std::size_t j) {
    const std::size_t n = s.size();
    std::size_t j0 = j == 0 ? 0 : (j + 1 == n ? n - 3 : j - 1);
    const double x0 = s[j0], x1 = s[j0 + 1], x2 = s[j0 + 2], x = s[j];
    // Lagrange basis derivatives evaluated at x.
    Stencil st{j0, {((x - x1) + (x - x2)) / ((x0 - x1) * (x0 - x2)),
                    ((x - x0) + (x - x2)) / ((x1 - x0) * (x1 - x2)),
                    ((x - x0) + (x - x1)) / ((x2 - x0) * (x2 - x1))}};
    return st;
}

double projected_derivative(const EigenBundle& b, std::size_t onto, std::size_t of, std::size_t j) {
    const Stencil st = derivative_stencil(b.s_grid, j);
    const auto& bra = b.sets[j].states[onto];
    const double dx = b.sets[j].spacing();
    double acc = 0.0;
    for (int m = 0; m < 3; ++m) acc += st.w[m] * overlap(bra, b.sets[st.j0 + m].states[of], dx);
    return acc;
}

double fd_coupling(const EigenBundle& b, std::size_t i, std::size_t f, std::size_t j) {
    return 0.5 * (projected_derivative(b, f, i, j) - projected_derivative(b, i, f, j));
}

double hf_coupling(const EigenBundle& b, std::size_t i, std::size_t f, std::size_t j) {
    const Stencil st = derivative_stencil(b.s_grid, j);
    const EigenSet& set = b.sets[j];
    const std::size_t n = set.x_um.size();
    double acc = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        double dU = 0.0;
        for (int m = 0; m < 3; ++m) dU += st.w[m] * b.curves[st.j0 + m].U[k];
        acc += set.states[f][k] * dU * set.states[i][k];
    }
    acc *= set.spacing();
    return acc / (set.energies[i] - set.energies[f]);
}

void check_indices(const EigenBundle& b, int i, int f) {
    if (b.sets.size() < 3) throw InputError("coupling: bundle needs at least three s points");
    const int n = static_cast<int>(b.n_states());
    if (i < 0 || f < 0 || i >= n || f >= n || i == f) throw InputError("coupling: invalid state pair");
    if (b.curves.size() != b.sets.size()) throw InputError("coupling: bundle lacks potential curves");
}

void check_gauge(const EigenBundle& b, std::size_t j_lo, std::size_t j_hi, std::size_t i, std::size_t f) {
    const double dx = b.sets.front().spacing();
    for (std::size_t j = j_lo; j < j_hi; ++j) {
        for (std::size_t k : {i, f}) {
            const double o = overlap(b.sets[j].states[k], b.sets[j + 1].states[k], dx);
            if (o < 0.9) {
                std::ostringstream msg;
                msg << "gauge discontinuity: overlap " << o << " for state " << k << " between s = "
                    << b.s_grid[j] << " and " << b.s_grid[j + 1];
                throw GaugeError(msg.str());
            }
        }
    }
}

CouplingValue coupling_at_node(const EigenBundle& b, std::size_t i, std::size_t f, std::size_t j) {
    CouplingValue out;
    const Stencil st = derivative_stencil(b.s_grid, j);
    check_gauge(b, st.j0, st.j0 + 2, i, f);
    out.value = fd_coupling(b, i, f, j);
    out.hellmann_feynman = std::numeric_limits<double>::quiet_NaN();
    const EigenSet& set = b.sets[j];
    const double gap = std::abs(set.energies[f] - set.energies[i]);
    if (gap > units::hz_to_rad(5.0) && set.parity[i] == set.parity[f]) {
        out.hellmann_feynman = hf_coupling(b, i, f, j);
        const double scale = std::max(std::abs(out.value), std::abs(out.hellmann_feynman));
        if (std::abs(out.value - out.hellmann_feynman) > 0.2 * scale && scale > 0.0) {
            std::ostringstream msg;
            msg << "coupling cross-check disagreement at s = " << b.s_grid[j] << ": finite difference "
                << out.value << ", Hellmann-Feynman " << out.hellmann_feynman;
            out.warnings.push_back(msg.str());
        }
    }
    return out;
}

}  // namespace

CouplingValue coupling_coefficient(const EigenBundle& b, int i, int f, double s) {
    check_indices(b, i, f);
    const auto& g = b.s_grid;
    if (!(s > g.front()) || !(s < g.back()))
        throw InputError("coupling_coefficient: s must be interior to the s grid");
    const std::size_t j = bracket(g, s);
    const auto ui = static_cast<std::size_t>(i), uf = static_cast<std::size_t>(f);
    const double tol = 1e-12 * (g.back() - g.front());
    if (std::abs(s - g[j]) <= tol && j > 0) return coupling_at_node(b, ui, uf, j);
    if (std::abs(s - g[j + 1]) <= tol && j + 1 < g.size() - 1) return coupling_at_node(b, ui, uf, j + 1);
    // Between nodes: linear blend of the two node values.
    CouplingValue lo = coupling_at_node(b, ui, uf, j);
    CouplingValue hi = coupling_at_node(b, ui, uf, j + 1);
    const double w = (s - g[j]) / (g[j + 1] - g[j]);
    CouplingValue out;
    out.value = (1.0 - w) * lo.value + w * hi.value;
    out.hellmann_feynman = (1.0 - w) * lo.hellmann_feynman + w * hi.hellmann_feynman;
    out.warnings = std::move(lo.warnings);
    out.warnings.insert(out.warnings.end(), hi.warnings.begin(), hi.warnings.end());
    return out;
}

CouplingTable build_coupling_table(const EigenBundle& b, int i, int f) {
    check_indices(b, i, f);
    const auto ui = static_cast<std::size_t>(i), uf = static_cast<std::size_t>(f);
    check_gauge(b, 0, b.s_grid.size() - 1, ui, uf);
    std::vector<double> a(b.s_grid.size()), dw(b.s_grid.size());
    for (std::size_t j = 0; j < b.s_grid.size(); ++j) {
        a[j] = fd_coupling(b, ui, uf, j);
        dw[j] = b.sets[j].energies[uf] - b.sets[j].energies[ui];
    }
    return CouplingTable(i, f, b.s_grid, std::move(a), std::move(dw));
}

namespace {

std::complex<double> trapezoid_amplitude(const CouplingTable& table, const Ramp& ramp, std::size_t n) {
    const double T = ramp.duration();
    const double dt = T / static_cast<double>(n);
    double phase = 0.0;
    double prev_dw = 0.0;
    std::complex<double> acc{};
    for (std::size_t k = 0; k <= n; ++k) {
        const double t = k == n ? T : dt * static_cast<double>(k);
        const double s = ramp.value(t);
        const double dw = table.domega_at(s);
        if (k > 0) phase += 0.5 * dt * (prev_dw + dw);
        prev_dw = dw;
        const double weight = (k == 0 || k == n) ? 0.5 : 1.0;
        acc += weight * std::polar(table.a_at(s) * ramp.rate(t), phase);
    }
    return acc * dt;
}

}  // namespace

TransitionResult transition_amplitude(const CouplingTable& table, const Ramp& ramp,
                                      const QuadratureOptions& opt) {
    const double T = ramp.duration();
    const auto& sg = table.s();
    double min_cell = std::numeric_limits<double>::infinity();
    for (std::size_t j = 1; j < sg.size(); ++j) min_cell = std::min(min_cell, sg[j] - sg[j - 1]);
    double max_dw = 0.0;
    for (double v : table.domega()) max_dw = std::max(max_dw, std::abs(v));
    double max_rate = 0.0;
    for (const auto& [t, s] : ramp.sample(2001)) {
        (void)s;
        max_rate = std::max(max_rate, std::abs(ramp.rate(t)));
    }

    const double by_phase = opt.samples_per_period * T * max_dw / units::two_pi;
    const double by_cell = opt.samples_per_cell * T * max_rate / min_cell;
    std::size_t n = static_cast<std::size_t>(std::ceil(std::max({by_phase, by_cell, 64.0})));

    TransitionResult r;
    r.T = T;
    r.ramp = ramp.label();
    std::complex<double> c = trapezoid_amplitude(table, ramp, n);
    for (;;) {
        const std::size_t n2 = 2 * n;
        if (n2 > opt.max_samples) {
            std::ostringstream msg;
            msg << "transition_amplitude: refinement cap reached at T = " << T << " s (" << n
                << " samples)";
            throw AccuracyError(msg.str());
        }
        const std::complex<double> c2 = trapezoid_amplitude(table, ramp, n2);
        ++r.refinements;
        const bool done = std::abs(c2 - c) <= opt.rtol * std::abs(c2) + opt.atol;
        c = c2;
        n = n2;
        if (done) break;
    }
    r.amplitude = c;
    r.probability = std::norm(c);
    r.outside_first_order = r.probability > 0.1;
    r.samples = n + 1;
    r.samples_per_period = max_dw > 0.0 ? static_cast<double>(n) / (T * max_dw / units::two_pi)
                                        : std::numeric_limits<double>::infinity();
    return r;
}

std::vector<TransitionResult> sweep_duration(const CouplingTable& table, const Ramp& ramp_family,
                                             const std::vector<double>& T_list, unsigned threads,
                                             const QuadratureOptions& opt) {
    for (std::size_t k = 0; k < T_list.size(); ++k) {
        if (!(T_list[k] > 0.0)) throw InputError("sweep_duration: durations must be positive");
        if (k > 0 && !(T_list[k] > T_list[k - 1]))
            throw InputError("sweep_duration: durations must be ascending");
    }
    std::vector<TransitionResult> out(T_list.size());
    parallel_for(T_list.size(), threads, [&](std::size_t k) {
        out[k] = transition_amplitude(table, ramp_family.with_duration(T_list[k]), opt);
    });
    return out;
}

double gradient_dephasing(double separation_um, double gradient_G_per_cm, double T_sense_s,
                          double scale_Hz_per_G) {
    for (double v : {separation_um, gradient_G_per_cm, T_sense_s, scale_Hz_per_G})
        if (!std::isfinite(v) || v < 0.0)
            throw InputError("gradient_dephasing: inputs must be finite and non-negative");
    const double field_difference_G = gradient_G_per_cm * separation_um * 1e-4;
    return units::two_pi * scale_Hz_per_G * field_difference_G * T_sense_s;
}

}  // namespace chiptrap
