#include <gsl/gsl_multimin.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <sstream>

#include "chiptrap/errors.hpp"
#include "chiptrap/spectrum.hpp"
#include "chiptrap/trap.hpp"

namespace chiptrap {

TrapMetrics measure_trap(const TrapConfig& cfg, const GridSpec& grid) {
    const std::vector<double> x = symmetric_grid(grid.half_width_um, grid.points);
    SolverOptions solver;
    solver.check_boundary = false;

    TrapMetrics m;
    const PotentialCurve c0 = potential_curve(cfg, 0.0, x);
    const EigenSet e0 = solve_stationary(c0, 2, cfg.mass_kg, solver);
    m.omega_s0 = e0.energies[1] - e0.energies[0];
    const TransverseMinimum centre = transverse_minimum(cfg, 0.0, 0.0);
    m.trap_height_um = centre.z_um - cfg.surface_z_um();

    const PotentialCurve c1 = potential_curve(cfg, 1.0, x);
    const EigenSet e1 = solve_stationary(c1, 3, cfg.mass_kg, solver);
    m.omega_s1 = e1.energies[2] - e1.energies[0];
    m.separation_um = c1.well_separation_um;
    return m;
}

namespace {

struct Residuals {
    double omega_s0, omega_s1, height, separation;
};

Residuals residuals(const TrapMetrics& m, const CalibrationTargets& t) {
    return {m.omega_s0 / t.omega_s0 - 1.0, m.omega_s1 / t.omega_s1 - 1.0,
            m.trap_height_um / t.trap_height_um - 1.0, m.separation_um / t.separation_um - 1.0};
}

double cost_of(const Residuals& r, const CalibrationTargets& t) {
    return t.w_omega_s0 * r.omega_s0 * r.omega_s0 + t.w_omega_s1 * r.omega_s1 * r.omega_s1 +
           t.w_height * r.height * r.height + t.w_separation * r.separation * r.separation;
}

struct Problem {
    TrapConfig base;
    CalibrationTargets targets;
    CalibrationFree free;
    GridSpec grid;
    int evaluations = 0;

    TrapConfig apply(const double* p) const {
        TrapConfig c = base;
        std::size_t k = 0;
        if (free.d_ext) c.d_ext_um = p[k++];
        if (free.crossing_height) c.crossing_height_um = p[k++];
        if (free.ic_height_offset) c.ic_height_offset_um = p[k++];
        return c;
    }

    double evaluate(const TrapConfig& c) {
        ++evaluations;
        if (!(c.d_ext_um > 0.5)) return 1e6;
        try {
            return cost_of(residuals(measure_trap(c, grid), targets), targets);
        } catch (const Error&) {
            return 1e6;
        }
    }
};

double gsl_cost(const gsl_vector* v, void* params) {
    auto* prob = static_cast<Problem*>(params);
    return prob->evaluate(prob->apply(v->data));
}

}  // namespace

CalibrationResult calibrate_geometry(const TrapConfig& cfg, const CalibrationTargets& targets,
                                     const CalibrationFree& free, const GridSpec& grid) {
    cfg.validate();
    if (!(targets.omega_s0 > 0.0) || !(targets.omega_s1 > 0.0) || !(targets.trap_height_um > 0.0) ||
        !(targets.separation_um > 0.0))
        throw InputError("calibrate_geometry: targets must be positive");

    Problem prob{cfg, targets, free, grid};
    CalibrationResult out;
    out.config = cfg;

    auto finish = [&](const TrapConfig& c) {
        out.config = c;
        try {
            out.achieved = measure_trap(c, grid);
        } catch (const Error& e) {
            out.success = false;
            out.report = std::string("calibration failed: ") + e.what();
            out.evaluations = prob.evaluations;
            return;
        }
        const Residuals r = residuals(out.achieved, targets);
        out.residual_omega_s0 = r.omega_s0;
        out.residual_omega_s1 = r.omega_s1;
        out.residual_height = r.height;
        out.residual_separation = r.separation;
        out.cost = cost_of(r, targets);
        out.evaluations = prob.evaluations;
        out.success = std::abs(r.omega_s0) <= targets.tol_omega && std::abs(r.omega_s1) <= targets.tol_omega &&
                      (targets.w_height == 0.0 || std::abs(r.height) <= targets.tol_height) &&
                      (targets.w_separation == 0.0 || std::abs(r.separation) <= targets.tol_separation);
        std::ostringstream rep;
        rep << (out.success ? "calibration ok" : "calibration failed: residual above tolerance")
            << "; d_ext = " << c.d_ext_um << " um, crossing_height = " << c.crossing_height_um << " um, ic_height_offset = " << c.ic_height_offset_um
            << " um; omega_s0/2pi = " << units::rad_to_hz(out.achieved.omega_s0) << " Hz ("
            << 100.0 * r.omega_s0 << "%), omega_s1/2pi = " << units::rad_to_hz(out.achieved.omega_s1)
            << " Hz (" << 100.0 * r.omega_s1 << "%), height = " << out.achieved.trap_height_um << " um ("
            << 100.0 * r.height << "%), separation = " << out.achieved.separation_um << " um ("
            << 100.0 * r.separation << "%)";
        out.report = rep.str();
    };

    // Fixed point: nothing to adjust.
    const double start_cost = prob.evaluate(cfg);
    if (start_cost <= 1e-18) {
        finish(cfg);
        return out;
    }

    const std::size_t dim = (free.d_ext ? 1 : 0) + (free.crossing_height ? 1 : 0) + (free.ic_height_offset ? 1 : 0);
    if (dim == 0) {
        finish(cfg);
        return out;
    }

    // Stage 1: for a coarse lattice of wire-plane heights, tune d_ext so that the
    // s = 0 frequency matches (it is the stiffest direction of the objective).
    // Stage 2: simplex refinement of all free parameters from the best point.
    std::vector<double> zc_vals, dz_vals;
    if (free.crossing_height)
        for (double h = 0.0; h <= 24.0; h += 4.0) zc_vals.push_back(h);
    else
        zc_vals.push_back(cfg.crossing_height_um);
    if (free.ic_height_offset)
        for (double h = 0.0; h <= 12.0; h += 2.0) dz_vals.push_back(h);
    else
        dz_vals.push_back(cfg.ic_height_offset_um);

    auto omega0 = [&](const TrapConfig& c) {
        ++prob.evaluations;
        try {
            const std::vector<double> x = symmetric_grid(grid.half_width_um, grid.points);
            SolverOptions so;
            so.check_boundary = false;
            const EigenSet e = solve_stationary(potential_curve(c, 0.0, x), 2, c.mass_kg, so);
            return e.energies[1] - e.energies[0];
        } catch (const Error&) {
            return 0.0;
        }
    };

    double best_cost = start_cost;
    TrapConfig best = cfg;
    for (double zc : zc_vals) {
        for (double dz : dz_vals) {
            TrapConfig c = cfg;
            c.crossing_height_um = zc;
            c.ic_height_offset_um = dz;
            if (free.d_ext) {
                // omega_s0 falls with d_ext until the s = 0 potential itself splits.
                double lo = 0.0, hi = 0.0;
                double prev = 2.0;
                for (double d = 2.0; d <= 48.0; d += 1.0) {
                    c.d_ext_um = d;
                    if (omega0(c) < targets.omega_s0) {
                        lo = prev;
                        hi = d;
                        break;
                    }
                    prev = d;
                }
                if (hi == 0.0 || lo == hi) continue;
                for (int it = 0; it < 30; ++it) {
                    c.d_ext_um = 0.5 * (lo + hi);
                    (omega0(c) > targets.omega_s0 ? lo : hi) = c.d_ext_um;
                }
                c.d_ext_um = 0.5 * (lo + hi);
            }
            const double v = prob.evaluate(c);
            if (v < best_cost) {
                best_cost = v;
                best = c;
            }
        }
    }

    gsl_vector* x0 = gsl_vector_alloc(dim);
    gsl_vector* step = gsl_vector_alloc(dim);
    {
        std::size_t k = 0;
        if (free.d_ext) {
            gsl_vector_set(x0, k, best.d_ext_um);
            gsl_vector_set(step, k++, 0.2);
        }
        if (free.crossing_height) {
            gsl_vector_set(x0, k, best.crossing_height_um);
            gsl_vector_set(step, k++, 1.0);
        }
        if (free.ic_height_offset) {
            gsl_vector_set(x0, k, best.ic_height_offset_um);
            gsl_vector_set(step, k++, 0.5);
        }
    }
    gsl_multimin_function fn{&gsl_cost, dim, &prob};
    std::unique_ptr<gsl_multimin_fminimizer, decltype(&gsl_multimin_fminimizer_free)> minimizer(
        gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, dim), &gsl_multimin_fminimizer_free);
    gsl_multimin_fminimizer_set(minimizer.get(), &fn, x0, step);
    for (int it = 0; it < 400; ++it) {
        if (gsl_multimin_fminimizer_iterate(minimizer.get())) break;
        const double size = gsl_multimin_fminimizer_size(minimizer.get());
        if (gsl_multimin_test_size(size, 1e-4) == GSL_SUCCESS) break;
    }
    TrapConfig refined = prob.apply(minimizer->x->data);
    if (minimizer->fval > best_cost) refined = best;
    gsl_vector_free(x0);
    gsl_vector_free(step);

    finish(refined);
    return out;
}

}  // namespace chiptrap
