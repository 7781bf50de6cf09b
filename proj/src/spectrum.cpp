#include "chiptrap/spectrum.hpp"

#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "chiptrap/errors.hpp"
#include "chiptrap/parallel.hpp"

namespace chiptrap {

namespace {

struct TridiagResult {
    std::vector<double> values;
    std::vector<std::vector<double>> vectors;  // unit 2-norm
};

// Lowest `count` eigenpairs of the symmetric tridiagonal (diag, off).
TridiagResult lowest_eigenpairs(std::vector<double> diag, std::vector<double> off, int count) {
    const lapack_int n = static_cast<lapack_int>(diag.size());
    if (count <= 0) return {};
    if (count > n) throw InputError("eigensolve: more states requested than grid points");
    std::vector<double> w(static_cast<std::size_t>(n));
    std::vector<double> z(static_cast<std::size_t>(n) * static_cast<std::size_t>(count));
    std::vector<lapack_int> isuppz(2 * static_cast<std::size_t>(count));
    lapack_int found = 0;
    off.push_back(0.0);  // dstevr workspace needs length n
    const lapack_int info =
        LAPACKE_dstevr(LAPACK_COL_MAJOR, 'V', 'I', n, diag.data(), off.data(), 0.0, 0.0, 1, count,
                       0.0, &found, w.data(), z.data(), n, isuppz.data());
    if (info != 0 || found != count) {
        std::ostringstream msg;
        msg << "eigensolve failed (dstevr info = " << info << ", found " << found << " of " << count << ")";
        throw NumericalError(msg.str());
    }
    TridiagResult r;
    r.values.assign(w.begin(), w.begin() + count);
    r.vectors.resize(static_cast<std::size_t>(count));
    for (int k = 0; k < count; ++k) {
        auto first = z.begin() + static_cast<std::ptrdiff_t>(k) * n;
        r.vectors[static_cast<std::size_t>(k)].assign(first, first + n);
    }
    return r;
}

bool is_symmetric(const PotentialCurve& c, double tol) {
    const std::size_t n = c.U.size();
    const double h = c.spacing();
    double scale = 0.0;
    for (double u : c.U) scale = std::max(scale, std::abs(u));
    for (std::size_t k = 0; k < n / 2; ++k) {
        if (std::abs(c.x_um[k] + c.x_um[n - 1 - k]) > 1e-9 * h) return false;
        if (std::abs(c.U[k] - c.U[n - 1 - k]) > tol * std::max(scale, 1e-300)) return false;
    }
    return n % 2 == 0;
}

void check_grid(const PotentialCurve& c) {
    if (c.x_um.size() < 4 || c.x_um.size() != c.U.size())
        throw InputError("solve_stationary: potential and grid size mismatch");
    const double h = c.spacing();
    if (!(h > 0.0)) throw InputError("solve_stationary: grid must be increasing");
    for (std::size_t k = 1; k < c.x_um.size(); ++k)
        if (std::abs(c.x_um[k] - c.x_um[k - 1] - h) > 1e-9 * h)
            throw InputError("solve_stationary: grid must be uniform");
    for (double u : c.U)
        if (!std::isfinite(u)) throw InputError("solve_stationary: non-finite potential");
}

void check_boundary(const EigenSet& set, double tol) {
    for (std::size_t k = 0; k < set.size(); ++k) {
        const auto& phi = set.states[k];
        double peak = 0.0;
        for (double v : phi) peak = std::max(peak, std::abs(v));
        const double edge = std::max(std::abs(phi.front()), std::abs(phi.back()));
        if (edge > tol * peak) {
            std::ostringstream msg;
            msg << "grid too small: state " << k << " has boundary amplitude ratio " << edge / peak
                << " at s = " << set.s;
            throw GridTooSmallError(msg.str());
        }
    }
}

}  // namespace

const char* to_string(Parity p) { return p == Parity::Even ? "even" : "odd"; }

double overlap(const std::vector<double>& a, const std::vector<double>& b, double dx) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
    return acc * dx;
}

Parity parity_of(const std::vector<double>& phi, const std::vector<double>& x_um) {
    const std::size_t n = phi.size();
    if (n != x_um.size() || n < 2) throw InputError("parity_of: size mismatch");
    const double h = x_um[1] - x_um[0];
    for (std::size_t k = 0; k < n; ++k)
        if (std::abs(x_um[k] + x_um[n - 1 - k]) > 1e-9 * std::abs(h))
            throw InputError("parity_of: grid must be symmetric about 0");
    double norm = 0.0, mirror = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        norm += phi[k] * phi[k];
        mirror += phi[k] * phi[n - 1 - k];
    }
    if (!(norm > 0.0)) throw ParityError("parity_of: zero wavefunction");
    const double r = mirror / norm;
    if (r > 0.99) return Parity::Even;
    if (r < -0.99) return Parity::Odd;
    std::ostringstream msg;
    msg << "undefined parity: <phi(x)|phi(-x)> = " << r;
    throw ParityError(msg.str());
}

void apply_origin_gauge(EigenSet& set) {
    const std::size_t n = set.x_um.size();
    // First node with x > 0; for the full-grid fallback pick the node nearest 0.
    std::size_t c = 0;
    while (c < n && set.x_um[c] <= 0.0) ++c;
    if (c == n) c = n - 1;
    for (std::size_t k = 0; k < set.size(); ++k) {
        auto& phi = set.states[k];
        double ref = 0.0;
        if (set.parity[k] == Parity::Even) {
            ref = phi[c];
        } else {
            ref = c > 0 ? phi[c] - phi[c - 1] : phi[c];
        }
        // Fall back to the first clearly non-zero value outward if the origin value vanishes.
        if (std::abs(ref) < 1e-12) {
            double peak = 0.0;
            for (double v : phi) peak = std::max(peak, std::abs(v));
            for (std::size_t i = c; i < n; ++i) {
                if (std::abs(phi[i]) > 1e-6 * peak) {
                    ref = phi[i];
                    break;
                }
            }
        }
        if (ref < 0.0)
            for (double& v : phi) v = -v;
    }
}

EigenSet solve_stationary(const PotentialCurve& curve, int n_states, double mass_kg,
                          const SolverOptions& opt) {
    if (n_states < 1 || n_states > max_states)
        throw InputError("solve_stationary: n_states must be in [1, 12]");
    check_grid(curve);
    const std::size_t n = curve.x_um.size();
    const double h = curve.spacing();
    const double t = units::kinetic_coefficient(mass_kg) / (h * h);
    const double umin = curve.min_U();

    EigenSet set;
    set.s = curve.s;
    set.x_um = curve.x_um;
    set.potential_min = umin;
    set.energies.resize(static_cast<std::size_t>(n_states));
    set.states.resize(static_cast<std::size_t>(n_states));
    set.parity.resize(static_cast<std::size_t>(n_states));

    if (is_symmetric(curve, opt.symmetry_tolerance)) {
        const std::size_t half = n / 2;
        const int n_even = (n_states + 1) / 2;
        const int n_odd = n_states / 2;
        std::vector<double> u(half);
        for (std::size_t k = 0; k < half; ++k)
            u[k] = 0.5 * (curve.U[half + k] + curve.U[half - 1 - k]) - umin;
        const double norm = 1.0 / std::sqrt(2.0 * h);
        for (int sector = 0; sector < 2; ++sector) {
            const int count = sector == 0 ? n_even : n_odd;
            if (count == 0) continue;
            std::vector<double> diag(half), off(half - 1, -t);
            for (std::size_t k = 0; k < half; ++k) diag[k] = 2.0 * t + u[k];
            // Mirror node of x_0+ is x_0-, equal (even) or opposite (odd).
            diag[0] += sector == 0 ? -t : t;
            const TridiagResult r = lowest_eigenpairs(std::move(diag), std::move(off), count);
            const double sign = sector == 0 ? 1.0 : -1.0;
            for (int rank = 0; rank < count; ++rank) {
                const std::size_t q = static_cast<std::size_t>(2 * rank + sector);
                std::vector<double> phi(n);
                const auto& v = r.vectors[static_cast<std::size_t>(rank)];
                for (std::size_t k = 0; k < half; ++k) {
                    phi[half + k] = norm * v[k];
                    phi[half - 1 - k] = sign * norm * v[k];
                }
                set.energies[q] = r.values[static_cast<std::size_t>(rank)];
                set.states[q] = std::move(phi);
                set.parity[q] = sector == 0 ? Parity::Even : Parity::Odd;
            }
        }
    } else {
        std::vector<double> diag(n), off(n - 1, -t);
        for (std::size_t k = 0; k < n; ++k) diag[k] = 2.0 * t + curve.U[k] - umin;
        const TridiagResult r = lowest_eigenpairs(std::move(diag), std::move(off), n_states);
        const double norm = 1.0 / std::sqrt(h);
        for (int q = 0; q < n_states; ++q) {
            std::vector<double> phi = r.vectors[static_cast<std::size_t>(q)];
            for (double& v : phi) v *= norm;
            set.parity[static_cast<std::size_t>(q)] = parity_of(phi, curve.x_um);
            set.energies[static_cast<std::size_t>(q)] = r.values[static_cast<std::size_t>(q)];
            set.states[static_cast<std::size_t>(q)] = std::move(phi);
        }
    }
    apply_origin_gauge(set);
    if (opt.check_boundary) check_boundary(set, opt.boundary_tolerance);
    return set;
}

std::vector<double> uniform_s_grid(int points) {
    if (points < 2) throw InputError("s grid needs at least two points");
    std::vector<double> s(static_cast<std::size_t>(points));
    for (int i = 0; i < points; ++i) s[static_cast<std::size_t>(i)] = static_cast<double>(i) / (points - 1);
    return s;
}

OverlapCheck adjacent_overlaps(const EigenBundle& b) {
    OverlapCheck out;
    const double dx = b.sets.front().spacing();
    for (std::size_t j = 0; j + 1 < b.sets.size(); ++j) {
        for (std::size_t k = 0; k < b.sets[j].size(); ++k) {
            const double o = overlap(b.sets[j].states[k], b.sets[j + 1].states[k], dx);
            if (o < out.min_overlap) out = OverlapCheck{o, j, k};
        }
    }
    return out;
}

void fix_gauge(EigenBundle& b) {
    const std::size_t ns = b.sets.size();
    b.gauge_flips.assign(ns, std::vector<int>(b.n_states(), 1));
    if (ns == 0) return;
    const double dx = b.sets.front().spacing();
    // Origin convention at the first point, then sign continuity.
    {
        EigenSet& first = b.sets.front();
        std::vector<std::vector<double>> before = first.states;
        apply_origin_gauge(first);
        for (std::size_t k = 0; k < first.size(); ++k)
            if (before[k] != first.states[k]) b.gauge_flips[0][k] = -1;
    }
    for (std::size_t j = 1; j < ns; ++j) {
        for (std::size_t k = 0; k < b.sets[j].size(); ++k) {
            auto& phi = b.sets[j].states[k];
            if (overlap(b.sets[j - 1].states[k], phi, dx) < 0.0) {
                for (double& v : phi) v = -v;
                b.gauge_flips[j][k] = -1;
            }
        }
    }
}

namespace {

void solve_points(EigenBundle& b, const TrapConfig& cfg, const std::vector<double>& x_um,
                  const std::vector<std::size_t>& which, const SweepOptions& opt) {
    parallel_for(which.size(), opt.threads, [&](std::size_t w) {
        const std::size_t j = which[w];
        b.curves[j] = potential_curve(cfg, b.s_grid[j], x_um);
        b.sets[j] = solve_stationary(b.curves[j], opt.n_states, cfg.mass_kg, opt.solver);
    });
}

}  // namespace

EigenBundle sweep_spectrum(const TrapConfig& cfg, std::vector<double> s_grid, const SweepOptions& opt) {
    const std::vector<double> x = choose_grid(cfg, opt.grid);
    return sweep_spectrum(cfg, std::move(s_grid), x, opt);
}

EigenBundle sweep_spectrum(const TrapConfig& cfg, std::vector<double> s_grid,
                           const std::vector<double>& x_um, const SweepOptions& opt) {
    cfg.validate();
    if (s_grid.size() < 2) throw InputError("sweep_spectrum: need at least two s values");
    for (std::size_t j = 0; j < s_grid.size(); ++j) {
        if (!std::isfinite(s_grid[j]) || s_grid[j] < 0.0 || s_grid[j] > 1.0)
            throw InputError("sweep_spectrum: s values must lie in [0, 1]");
        if (j > 0 && !(s_grid[j] > s_grid[j - 1]))
            throw InputError("sweep_spectrum: s grid must be strictly increasing");
    }

    EigenBundle b;
    b.mass_kg = cfg.mass_kg;

    // Enforce the maximum spacing by uniform subdivision of wide intervals.
    {
        std::vector<double> fine{s_grid.front()};
        for (std::size_t j = 1; j < s_grid.size(); ++j) {
            const double gap = s_grid[j] - s_grid[j - 1];
            const int parts = static_cast<int>(std::ceil(gap / opt.max_s_spacing - 1e-9));
            for (int p = 1; p < parts; ++p) fine.push_back(s_grid[j - 1] + gap * p / parts);
            fine.push_back(s_grid[j]);
        }
        if (fine.size() != s_grid.size()) {
            std::ostringstream msg;
            msg << "s grid refined from " << s_grid.size() << " to " << fine.size()
                << " points (max spacing " << opt.max_s_spacing << ")";
            b.notes.push_back(msg.str());
        }
        s_grid = std::move(fine);
    }

    b.s_grid = s_grid;
    b.sets.resize(s_grid.size());
    b.curves.resize(s_grid.size());
    std::vector<std::size_t> all(s_grid.size());
    for (std::size_t j = 0; j < all.size(); ++j) all[j] = j;
    solve_points(b, cfg, x_um, all, opt);
    fix_gauge(b);

    for (int pass = 0;; ++pass) {
        const OverlapCheck chk = adjacent_overlaps(b);
        if (chk.min_overlap >= opt.min_overlap) break;
        std::ostringstream msg;
        msg << "gauge continuity: overlap " << chk.min_overlap << " for state " << chk.state
            << " between s = " << b.s_grid[chk.s_index] << " and s = " << b.s_grid[chk.s_index + 1];
        if (!opt.refine || pass >= opt.max_refinements)
            throw GaugeError("s grid too coarse; " + msg.str());
        // Insert midpoints into every offending interval.
        const double dx = b.sets.front().spacing();
        std::vector<double> s_new;
        std::vector<std::size_t> fresh;
        EigenBundle nb;
        nb.mass_kg = b.mass_kg;
        for (std::size_t j = 0; j < b.s_grid.size(); ++j) {
            nb.s_grid.push_back(b.s_grid[j]);
            nb.sets.push_back(std::move(b.sets[j]));
            nb.curves.push_back(std::move(b.curves[j]));
            if (j + 1 == b.s_grid.size()) break;
            bool bad = false;
            for (std::size_t k = 0; k < nb.sets.back().size(); ++k)
                if (overlap(nb.sets.back().states[k], b.sets[j + 1].states[k], dx) < opt.min_overlap) bad = true;
            if (bad) {
                nb.s_grid.push_back(0.5 * (b.s_grid[j] + b.s_grid[j + 1]));
                nb.sets.emplace_back();
                nb.curves.emplace_back();
                fresh.push_back(nb.s_grid.size() - 1);
            }
        }
        nb.notes = std::move(b.notes);
        std::ostringstream note;
        note << "refined s grid locally (" << fresh.size() << " points added) after " << msg.str();
        nb.notes.push_back(note.str());
        b = std::move(nb);
        solve_points(b, cfg, x_um, fresh, opt);
        fix_gauge(b);
    }
    return b;
}

}  // namespace chiptrap
