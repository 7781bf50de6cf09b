#include "chiptrap/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "chiptrap/errors.hpp"
#include "chiptrap/interp.hpp"

namespace chiptrap {

namespace {

struct Integration {
    std::vector<double> s, ds;
};

// RK4 on a uniform tau grid; s is clamped to [0, 1] when sampling a.
Integration integrate_shape(const CouplingTable& table, const PulseShape& shape, double floor, double A,
                            int steps, bool keep) {
    auto rhs = [&](double tau, double s) {
        const double a = std::max(std::abs(table.a_at(std::clamp(s, 0.0, 1.0))), floor);
        return A * std::max(shape(tau), 0.0) / a;
    };
    const double h = 1.0 / steps;
    Integration out;
    if (keep) {
        out.s.resize(static_cast<std::size_t>(steps) + 1);
        out.ds.resize(out.s.size());
    }
    double s = 0.0;
    for (int k = 0; k < steps; ++k) {
        const double tau = k * h;
        const double k1 = rhs(tau, s);
        if (keep) {
            out.s[static_cast<std::size_t>(k)] = s;
            out.ds[static_cast<std::size_t>(k)] = k1;
        }
        const double k2 = rhs(tau + 0.5 * h, s + 0.5 * h * k1);
        const double k3 = rhs(tau + 0.5 * h, s + 0.5 * h * k2);
        const double k4 = rhs(tau + h, s + h * k3);
        s += h * (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0;
    }
    if (keep) {
        out.s.back() = s;
        out.ds.back() = rhs(1.0, s);
    } else {
        out.s.assign(1, s);
    }
    return out;
}

}  // namespace

ShapeSolution solve_shape(const CouplingTable& table, const PulseShape& shape, const ShapeOptions& opt) {
    if (table.s().front() != 0.0 || table.s().back() != 1.0)
        throw InputError("solve_shape: coupling table must span s in [0, 1]");
    if (opt.steps < 10 || !(opt.floor_fraction > 0.0)) throw InputError("solve_shape: invalid options");
    const double amax = table.max_abs_a();
    if (!(amax > 0.0)) throw OptimizerError("solve_shape: coupling vanishes identically, nothing to shape");

    ShapeSolution sol;
    sol.shape = shape.name();
    sol.pair_i = table.initial();
    sol.pair_f = table.final_state();
    sol.floor_fraction = opt.floor_fraction;
    sol.floor = opt.floor_fraction * amax;

    auto end_value = [&](double A) { return integrate_shape(table, shape, sol.floor, A, opt.steps, false).s[0]; };

    // s_tau(1) grows monotonically with A; bisect on log A.
    const double guess = amax;
    double lo = std::log(guess), hi = lo;
    double f_lo = end_value(guess) - 1.0, f_hi = f_lo;
    const double limit = std::log(1e6);
    for (double step = 0.5; f_lo > 0.0 || f_hi < 0.0; step *= 2.0) {
        if (step > 2.0 * limit) break;
        if (f_lo > 0.0) {
            lo = std::max(std::log(guess) - step, std::log(guess) - limit);
            f_lo = end_value(std::exp(lo)) - 1.0;
        }
        if (f_hi < 0.0) {
            hi = std::min(std::log(guess) + step, std::log(guess) + limit);
            f_hi = end_value(std::exp(hi)) - 1.0;
        }
    }
    if (f_lo > 0.0 || f_hi < 0.0)
        throw OptimizerError("solve_shape: no amplitude in [1e-6, 1e6] x initial guess brackets s_tau(1) = 1");

    double A = std::exp(0.5 * (lo + hi));
    double resid = 1.0;
    int it = 0;
    for (; it < opt.max_iterations; ++it) {
        const double mid = 0.5 * (lo + hi);
        A = std::exp(mid);
        resid = end_value(A) - 1.0;
        if (std::abs(resid) < opt.tolerance) break;
        (resid < 0.0 ? lo : hi) = mid;
    }
    if (std::abs(resid) >= opt.tolerance) {
        std::ostringstream msg;
        msg << "solve_shape: shooting did not converge, |s_tau(1) - 1| = " << std::abs(resid);
        throw OptimizerError(msg.str());
    }
    sol.amplitude = A;
    sol.iterations = it + 1;
    sol.endpoint_residual = std::abs(resid);

    Integration run = integrate_shape(table, shape, sol.floor, A, opt.steps, true);
    const std::size_t n = run.s.size();
    sol.tau.resize(n);
    for (std::size_t k = 0; k < n; ++k) sol.tau[k] = static_cast<double>(k) / opt.steps;
    sol.tau.back() = 1.0;
    // Remove the residual endpoint error by a uniform rescale, which keeps monotonicity.
    const double scale = 1.0 / run.s.back();
    for (std::size_t k = 0; k < n; ++k) {
        run.s[k] *= scale;
        run.ds[k] *= scale;
    }
    run.s.back() = 1.0;
    for (std::size_t k = 1; k < n; ++k)
        if (!(run.s[k] >= run.s[k - 1]))
            throw OptimizerError("solve_shape: s_tau is not monotone; regularisation failed");
    sol.s = std::move(run.s);
    sol.ds_dtau = std::move(run.ds);
    sol.u.resize(n);
    for (std::size_t k = 0; k < n; ++k) sol.u[k] = table.a_at(sol.s[k]) * sol.ds_dtau[k];
    return sol;
}

double TimeMap::tau_of_t(double tq) const {
    if (tq <= 0.0) return 0.0;
    if (tq >= T0) return 1.0;
    const HermiteTable h(t, tau, dtau_dt);
    return h(tq);
}

TimeMap solve_timemap(const CouplingTable& table, const ShapeSolution& shape) {
    const std::size_t n = shape.tau.size();
    if (n < 3) throw InputError("solve_timemap: shape solution is empty");
    TimeMap m;
    m.tau = shape.tau;
    m.dtau_dt.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
        const double dw = table.domega_at(shape.s[k]);
        if (!(dw > 0.0)) {
            std::ostringstream msg;
            msg << "solve_timemap: gap closes (domega = " << dw << " rad/s) at s = " << shape.s[k]
                << " for pair (" << table.initial() << ", " << table.final_state() << ")";
            throw GapClosedError(msg.str());
        }
        m.dtau_dt[k] = dw;
    }
    for (double dw : table.domega())
        if (!(dw > 0.0))
            throw GapClosedError("solve_timemap: gap closes on the coupling table grid");
    // Trapezoid on 1/domega with the endpoint-slope (Hermite) correction.
    m.t.assign(n, 0.0);
    auto slope = [&](std::size_t k) {
        return -table.domega_slope(shape.s[k]) * shape.ds_dtau[k] / (m.dtau_dt[k] * m.dtau_dt[k]);
    };
    for (std::size_t k = 1; k < n; ++k) {
        const double h = m.tau[k] - m.tau[k - 1];
        const double f0 = 1.0 / m.dtau_dt[k - 1], f1 = 1.0 / m.dtau_dt[k];
        m.t[k] = m.t[k - 1] + 0.5 * h * (f0 + f1) + h * h / 12.0 * (slope(k - 1) - slope(k));
    }
    m.T0 = m.t.back();
    return m;
}

Ramp compose_ramp(const ShapeSolution& shape, const TimeMap& map, double T) {
    if (!(T > 0.0) || !std::isfinite(T)) throw InputError("compose_ramp: duration must be positive");
    const std::size_t n = shape.tau.size();
    if (map.tau.size() != n || !(map.T0 > 0.0)) throw InputError("compose_ramp: time map does not match shape");
    std::vector<double> theta(n), s(n), slope(n);
    for (std::size_t k = 0; k < n; ++k) {
        theta[k] = map.t[k] / map.T0;
        s[k] = shape.s[k];
        slope[k] = shape.ds_dtau[k] * map.dtau_dt[k] * map.T0;
    }
    theta.front() = 0.0;
    theta.back() = 1.0;
    s.front() = 0.0;
    s.back() = 1.0;
    OptimizedProvenance prov;
    prov.shape = shape.shape;
    prov.pair_i = shape.pair_i;
    prov.pair_f = shape.pair_f;
    prov.amplitude = shape.amplitude;
    prov.T0 = map.T0;
    prov.floor_fraction = shape.floor_fraction;
    prov.tau = shape.tau;
    prov.s_tau = shape.s;
    prov.t_of_tau = map.t;
    return Ramp::optimized(T, HermiteTable(std::move(theta), std::move(s), std::move(slope)), std::move(prov));
}

std::complex<double> predict_amplitude_fourier(const ShapeSolution& shape, double T, double T0) {
    if (!(T >= 0.0) || !(T0 > 0.0)) throw InputError("predict_amplitude_fourier: need T >= 0 and T0 > 0");
    if (shape.tau.size() < 3) throw InputError("predict_amplitude_fourier: shape solution is empty");
    const double w = T / T0;
    const CubicSpline u(shape.tau, shape.u);
    // Composite Simpson with at least 40 samples per period and per table node.
    std::size_t m = std::max<std::size_t>(2 * shape.tau.size(), static_cast<std::size_t>(std::ceil(40.0 * w / units::two_pi)));
    m += m % 2;
    const double h = 1.0 / static_cast<double>(m);
    std::complex<double> acc{};
    for (std::size_t k = 0; k <= m; ++k) {
        const double tau = k == m ? 1.0 : h * static_cast<double>(k);
        const double weight = (k == 0 || k == m) ? 1.0 : (k % 2 ? 4.0 : 2.0);
        acc += weight * std::polar(u(tau), w * tau);
    }
    return acc * (h / 3.0);
}

OptimizedRamp optimize_ramp(const CouplingTable& table, const PulseShape& shape, double T, const ShapeOptions& opt) {
    ShapeSolution sol = solve_shape(table, shape, opt);
    TimeMap map = solve_timemap(table, sol);
    Ramp ramp = compose_ramp(sol, map, T);
    return {std::move(sol), std::move(map), std::move(ramp)};
}

}  // namespace chiptrap
