#include "chiptrap/tdse.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "chiptrap/errors.hpp"
#include "chiptrap/interp.hpp"
#include "chiptrap/parallel.hpp"

namespace chiptrap {

namespace {

std::vector<double> relative_to_min(std::vector<double> u) {
    const double lo = *std::min_element(u.begin(), u.end());
    for (double& v : u) v -= lo;
    return u;
}

}  // namespace

PotentialSchedule::PotentialSchedule(const TrapConfig& cfg, const std::vector<double>& s_nodes,
                                     const std::vector<double>& x_um, unsigned threads)
    : s_(s_nodes), x_(x_um), mass_(cfg.mass_kg) {
    u_.resize(s_.size());
    parallel_for(s_.size(), threads, [&](std::size_t j) { u_[j] = relative_to_min(potential_curve(cfg, s_[j], x_).U); });
    build();
}

PotentialSchedule::PotentialSchedule(const EigenBundle& bundle)
    : s_(bundle.s_grid), x_(bundle.x_um()), mass_(bundle.mass_kg) {
    if (bundle.curves.size() != bundle.s_grid.size()) throw InputError("PotentialSchedule: bundle lacks potential curves");
    u_.reserve(s_.size());
    for (const auto& c : bundle.curves) u_.push_back(relative_to_min(c.U));
    build();
}

PotentialSchedule::PotentialSchedule(std::vector<double> s_nodes, std::vector<double> x_um,
                                     std::vector<std::vector<double>> U_rel, double mass_kg)
    : s_(std::move(s_nodes)), x_(std::move(x_um)), u_(std::move(U_rel)), mass_(mass_kg) {
    build();
}

void PotentialSchedule::build() {
    const std::size_t n = s_.size();
    if (n == 0 || u_.size() != n) throw InputError("PotentialSchedule: need one potential row per s node");
    if (x_.size() < 4) throw InputError("PotentialSchedule: x grid too small");
    for (std::size_t j = 0; j < n; ++j) {
        if (u_[j].size() != x_.size()) throw InputError("PotentialSchedule: potential row does not match the x grid");
        if (j > 0 && !(s_[j] > s_[j - 1])) throw InputError("PotentialSchedule: s nodes must increase");
        for (double v : u_[j]) {
            if (!std::isfinite(v)) throw InputError("PotentialSchedule: non-finite potential");
            max_u_ = std::max(max_u_, v);
        }
    }
    const std::size_t nx = x_.size();
    m_.assign(n, std::vector<double>(nx, 0.0));
    if (n < 3) return;
    // Natural spline in s, solved for all x at once (the matrix depends only on s).
    std::vector<double> diag(n), cprime(n);
    std::vector<std::vector<double>> rhs(n, std::vector<double>(nx, 0.0));
    for (std::size_t j = 1; j + 1 < n; ++j) {
        const double h0 = s_[j] - s_[j - 1], h1 = s_[j + 1] - s_[j];
        diag[j] = 2.0 * (h0 + h1);
        for (std::size_t i = 0; i < nx; ++i)
            rhs[j][i] = 6.0 * ((u_[j + 1][i] - u_[j][i]) / h1 - (u_[j][i] - u_[j - 1][i]) / h0);
    }
    // Forward sweep over interior rows 1..n-2 (m_0 = m_{n-1} = 0).
    for (std::size_t j = 1; j + 1 < n; ++j) {
        const double lower = s_[j] - s_[j - 1];
        const double upper = s_[j + 1] - s_[j];
        double d = diag[j];
        if (j > 1) {
            d -= lower * cprime[j - 1];
            for (std::size_t i = 0; i < nx; ++i) rhs[j][i] -= lower * rhs[j - 1][i];
        }
        cprime[j] = upper / d;
        for (std::size_t i = 0; i < nx; ++i) rhs[j][i] /= d;
    }
    for (std::size_t j = n - 2; j >= 1; --j) {
        for (std::size_t i = 0; i < nx; ++i) m_[j][i] = rhs[j][i] - (j + 2 < n ? cprime[j] * m_[j + 1][i] : 0.0);
        if (j == 1) break;
    }
}

void PotentialSchedule::evaluate(double s, std::vector<double>& out) const {
    const std::size_t nx = x_.size();
    out.resize(nx);
    if (s_.size() == 1) {
        std::copy(u_[0].begin(), u_[0].end(), out.begin());
        return;
    }
    s = std::clamp(s, s_.front(), s_.back());
    const std::size_t j = bracket(s_, s);
    const double h = s_[j + 1] - s_[j];
    const double A = (s_[j + 1] - s) / h, B = 1.0 - A;
    const double ca = (A * A * A - A) * h * h / 6.0, cb = (B * B * B - B) * h * h / 6.0;
    const double* u0 = u_[j].data();
    const double* u1 = u_[j + 1].data();
    const double* m0 = m_[j].data();
    const double* m1 = m_[j + 1].data();
    for (std::size_t i = 0; i < nx; ++i) out[i] = A * u0[i] + B * u1[i] + ca * m0[i] + cb * m1[i];
}

double WavefunctionState::norm() const {
    const double dx = x_um[1] - x_um[0];
    double acc = 0.0;
    for (const auto& v : psi) acc += std::norm(v);
    return acc * dx;
}

WavefunctionState WavefunctionState::from_real(const std::vector<double>& x_um, const std::vector<double>& phi) {
    if (x_um.size() != phi.size() || x_um.size() < 2) throw InputError("WavefunctionState: grid and amplitudes differ in size");
    WavefunctionState w;
    w.x_um = x_um;
    w.psi.assign(phi.begin(), phi.end());
    return w;
}

double max_time_step(const PotentialSchedule& schedule) {
    const double u = schedule.max_potential();
    return u > 0.0 ? 1.0 / (50.0 * u) : std::numeric_limits<double>::infinity();
}

namespace {

using cplx = std::complex<double>;

class CrankNicolson {
public:
    CrankNicolson(const PotentialSchedule& sch, const PropagationOptions& opt)
        : sch_(sch), opt_(opt), nx_(sch.x_um().size()) {
        const double dx = sch.x_um()[1] - sch.x_um()[0];
        kin_ = units::kinetic_coefficient(sch.mass_kg()) / (dx * dx);
        u_.resize(nx_);
        rhs_.resize(nx_);
        cp_.resize(nx_);
        first_right_ = static_cast<std::size_t>(std::upper_bound(sch.x_um().begin(), sch.x_um().end(), 0.0) -
                                                sch.x_um().begin());
    }

    void run(WavefunctionState& w, double duration, const std::function<double(double)>& s_of_t) {
        if (w.x_um.size() != nx_) throw InputError("propagate: state and potential grids differ");
        for (std::size_t i = 0; i < nx_; ++i)
            if (std::abs(w.x_um[i] - sch_.x_um()[i]) > 1e-9) throw InputError("propagate: state and potential grids differ");
        const double n0 = w.norm();
        if (std::abs(n0 - 1.0) > 1e-8) throw InputError("propagate: initial state is not normalised");
        if (!(duration >= 0.0)) throw InputError("propagate: negative duration");
        if (duration == 0.0) return;

        const double bound = 1.0 / (50.0 * (sch_.max_potential() + std::abs(opt_.right_offset)));
        double dt = opt_.dt > 0.0 ? opt_.dt : bound;
        if (dt > bound * (1.0 + 1e-12)) {
            std::ostringstream msg;
            msg << "propagate: dt = " << dt << " s exceeds the stability bound " << bound << " s";
            throw InputError(msg.str());
        }
        const auto steps = static_cast<long long>(std::ceil(duration / dt - 1e-9));
        dt = duration / static_cast<double>(steps);

        const double t0 = w.t;
        double last_norm = n0;
        for (long long k = 0; k < steps; ++k) {
            sch_.evaluate(s_of_t((static_cast<double>(k) + 0.5) * dt), u_);
            if (opt_.right_offset != 0.0)
                for (std::size_t i = first_right_; i < nx_; ++i) u_[i] += opt_.right_offset;
            step(w.psi, dt);
            w.t = t0 + static_cast<double>(k + 1) * dt;
            if (opt_.norm_check_interval > 0 && (k + 1) % opt_.norm_check_interval == 0) {
                const double nn = w.norm();
                if (std::abs(nn - last_norm) > opt_.norm_tolerance) {
                    std::ostringstream msg;
                    msg << "propagate: norm drift " << std::abs(nn - last_norm) << " over " << opt_.norm_check_interval
                        << " steps at t = " << w.t << " s";
                    throw PropagatorError(msg.str());
                }
                last_norm = nn;
            }
            if (opt_.snapshot && opt_.snapshot_interval > 0 && (k + 1) % opt_.snapshot_interval == 0 && k + 1 < steps)
                opt_.snapshot(w);
        }
        w.t = t0 + duration;
        if (opt_.snapshot) opt_.snapshot(w);
    }

private:
    // (1 + i dt H / 2) psi' = (1 - i dt H / 2) psi, hard walls beyond the grid.
    // Complex arithmetic is written out: the matrix is 1 + i b_j on the diagonal
    // and -i g off it, with b_j = dt (2k + U_j) / 2 and g = dt k / 2.
    void step(std::vector<cplx>& psi, double dt) {
        const double g = 0.5 * dt * kin_;
        double* p = reinterpret_cast<double*>(psi.data());
        double* r = reinterpret_cast<double*>(rhs_.data());
        double* c = reinterpret_cast<double*>(cp_.data());
        const std::size_t n = nx_;
        // rhs = (1 - i H dt / 2) psi
        for (std::size_t i = 0; i < n; ++i) {
            const double b = 0.5 * dt * (2.0 * kin_ + u_[i]);
            double lr = 0.0, li = 0.0;
            if (i > 0) {
                lr += p[2 * i - 2];
                li += p[2 * i - 1];
            }
            if (i + 1 < n) {
                lr += p[2 * i + 2];
                li += p[2 * i + 3];
            }
            // -i (b psi - g lap)
            const double vr = b * p[2 * i] - g * lr, vi = b * p[2 * i + 1] - g * li;
            r[2 * i] = p[2 * i] + vi;
            r[2 * i + 1] = p[2 * i + 1] - vr;
        }
        // Thomas sweep; off-diagonal element e = -i g.
        double pr = 0.0, pi = 0.0;  // previous c'
        double qr = 0.0, qi = 0.0;  // previous rhs'
        for (std::size_t i = 0; i < n; ++i) {
            // d = 1 + i b - e c'_{i-1} = 1 + i b + i g c'
            const double b = 0.5 * dt * (2.0 * kin_ + u_[i]);
            const double dr = 1.0 - g * pi, di = b + g * pr;
            const double inv = 1.0 / (dr * dr + di * di);
            const double ir = dr * inv, ii = -di * inv;
            // c' = e / d = -i g / d
            const double cr = g * ii, ci = -g * ir;
            // rhs' = (rhs - e rhs'_{i-1}) / d = (rhs + i g q) / d
            const double nr = r[2 * i] - g * qi, ni = r[2 * i + 1] + g * qr;
            qr = nr * ir - ni * ii;
            qi = nr * ii + ni * ir;
            c[2 * i] = cr;
            c[2 * i + 1] = ci;
            r[2 * i] = qr;
            r[2 * i + 1] = qi;
            pr = cr;
            pi = ci;
        }
        p[2 * n - 2] = r[2 * n - 2];
        p[2 * n - 1] = r[2 * n - 1];
        for (std::size_t i = n - 1; i-- > 0;) {
            const double xr = p[2 * i + 2], xi = p[2 * i + 3];
            p[2 * i] = r[2 * i] - (c[2 * i] * xr - c[2 * i + 1] * xi);
            p[2 * i + 1] = r[2 * i + 1] - (c[2 * i] * xi + c[2 * i + 1] * xr);
        }
    }

    const PotentialSchedule& sch_;
    const PropagationOptions& opt_;
    std::size_t nx_;
    double kin_;
    std::size_t first_right_;
    std::vector<double> u_;
    std::vector<cplx> rhs_, cp_;
};

}  // namespace

WavefunctionState propagate(const PotentialSchedule& schedule, const Ramp& ramp, WavefunctionState psi0,
                            const PropagationOptions& opt) {
    CrankNicolson cn(schedule, opt);
    cn.run(psi0, ramp.duration(), [&](double t) { return ramp.value(t); });
    return psi0;
}

WavefunctionState propagate_static(const PotentialSchedule& schedule, double s, double duration,
                                   WavefunctionState psi0, const PropagationOptions& opt) {
    CrankNicolson cn(schedule, opt);
    cn.run(psi0, duration, [s](double) { return s; });
    return psi0;
}

Populations project_populations(const WavefunctionState& psi, const EigenSet& basis) {
    if (psi.x_um.size() != basis.x_um.size()) throw InputError("project_populations: grids differ");
    for (std::size_t i = 0; i < psi.x_um.size(); ++i)
        if (std::abs(psi.x_um[i] - basis.x_um[i]) > 1e-9) throw InputError("project_populations: grids differ");
    const double dx = basis.spacing();
    Populations out;
    double total = 0.0;
    for (const auto& phi : basis.states) {
        cplx acc = 0.0;
        for (std::size_t i = 0; i < phi.size(); ++i) acc += phi[i] * psi.psi[i];
        const double p = std::norm(acc * dx);
        out.P.push_back(p);
        total += p;
    }
    out.residual = 1.0 - total;
    if (out.residual > 0.01) {
        std::ostringstream msg;
        msg << "basis too small: " << out.residual << " of the norm lies outside the " << basis.size() << " projected states";
        out.warnings.push_back(msg.str());
    }
    return out;
}

ConvergedRun propagate_converged(const PotentialSchedule& schedule, const Ramp& ramp, const WavefunctionState& psi0,
                                 const EigenSet& basis, double dt, double tolerance, int max_halvings) {
    PropagationOptions opt;
    opt.dt = dt > 0.0 ? dt : max_time_step(schedule);
    ConvergedRun prev;
    prev.state = propagate(schedule, ramp, psi0, opt);
    prev.populations = project_populations(prev.state, basis);
    prev.dt = opt.dt;
    for (int h = 1; h <= max_halvings; ++h) {
        opt.dt *= 0.5;
        ConvergedRun next;
        next.state = propagate(schedule, ramp, psi0, opt);
        next.populations = project_populations(next.state, basis);
        next.dt = opt.dt;
        next.halvings = h;
        for (std::size_t k = 0; k < next.populations.P.size(); ++k)
            next.change = std::max(next.change, std::abs(next.populations.P[k] - prev.populations.P[k]));
        if (next.change < tolerance) return next;
        prev = std::move(next);
    }
    std::ostringstream msg;
    msg << "propagate_converged: populations still change by " << prev.change << " after " << max_halvings
        << " halvings (dt = " << prev.dt << " s)";
    throw AccuracyError(msg.str());
}

CycleResult interferometer_cycle(const PotentialSchedule& schedule, const Ramp& split, const HoldStage& hold,
                                 const Ramp* merge, const WavefunctionState& psi0, const EigenSet& basis_s0,
                                 const PropagationOptions& opt) {
    if (!(hold.duration >= 0.0) || !std::isfinite(hold.dphi)) throw InputError("interferometer_cycle: invalid hold stage");
    if (hold.mode == PhaseMode::Offset && !(hold.duration > 0.0))
        throw InputError("interferometer_cycle: an offset hold needs a positive duration");
    const Ramp merge_ramp = merge ? *merge : split.reversed();
    const double s_hold = split.value(split.duration());
    if (std::abs(merge_ramp.value(0.0) - s_hold) > 1e-9)
        throw InputError("interferometer_cycle: merge ramp does not start where the split ends");

    WavefunctionState w = propagate(schedule, split, psi0, opt);
    PropagationOptions hold_opt = opt;
    if (hold.mode == PhaseMode::Imprint) {
        const cplx phase = std::polar(1.0, hold.dphi), half = std::polar(1.0, 0.5 * hold.dphi);
        for (std::size_t i = 0; i < w.x_um.size(); ++i) {
            if (w.x_um[i] > 0.0) w.psi[i] *= phase;
            else if (w.x_um[i] == 0.0) w.psi[i] *= half;
        }
    } else {
        hold_opt.right_offset = -hold.dphi / hold.duration;
        hold_opt.dt = std::min(opt.dt > 0.0 ? opt.dt : max_time_step(schedule),
                               1.0 / (50.0 * (schedule.max_potential() + std::abs(hold_opt.right_offset))));
    }
    if (hold.duration > 0.0) w = propagate_static(schedule, s_hold, hold.duration, std::move(w), hold_opt);
    w = propagate(schedule, merge_ramp, std::move(w), opt);

    CycleResult out;
    out.dphi = hold.dphi;
    out.populations = project_populations(w, basis_s0);
    const auto& P = out.populations.P;
    out.leakage = 1.0 - (P.size() > 0 ? P[0] : 0.0) - (P.size() > 1 ? P[1] : 0.0);
    out.norm_error = std::abs(w.norm() - 1.0);
    out.final_state = std::move(w);
    return out;
}

}  // namespace chiptrap
