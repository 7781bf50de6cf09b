#include "chiptrap/acceptance.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <memory>
#include <optional>
#include <sstream>

#include "chiptrap/errors.hpp"
#include "chiptrap/parallel.hpp"

namespace chiptrap {

std::complex<double> blackman_spectrum(double w) {
    using units::pi;
    // cos(2 pi k tau) contributes (e^{iw} - 1)/i * w / (w^2 - (2 pi k)^2).
    const std::complex<double> pre = (std::polar(1.0, w) - 1.0) / std::complex<double>(0.0, 1.0);
    auto term = [&](double k) {
        const double d = w * w - 4.0 * pi * pi * k * k;
        if (std::abs(d) < 1e-9) return std::numeric_limits<double>::quiet_NaN();
        return w / d;
    };
    if (std::abs(w) < 1e-12) return 1.0;
    return pre * (1.0 / w - 25.0 / 21.0 * term(1.0) + 4.0 / 21.0 * term(2.0));
}

std::string format_result(const CriterionResult& r) {
    char head[96];
    std::snprintf(head, sizeof head, "criterion %2d [%s] ", r.id, r.passed ? "PASS" : "FAIL");
    char tail[32];
    std::snprintf(tail, sizeof tail, " (%.1f s)", r.seconds);
    return head + r.title + ": " + r.detail + tail;
}

namespace {

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

struct Context {
    Context(const RunConfig& c, const AcceptanceOptions& o) : cfg(c), opt(o) {}

    const RunConfig& cfg;
    const AcceptanceOptions& opt;
    std::optional<CalibrationResult> calibration;
    std::unique_ptr<EigenBundle> bundle;       // default grid
    std::unique_ptr<EigenBundle> dyn_bundle;   // dynamics grid
    std::unique_ptr<CouplingTable> t02, t13, t01;
    std::unique_ptr<OptimizedRamp> optimized;  // (0,2) shape, default table

    const TrapConfig& trap() {
        if (!calibration) calibration = calibrate_geometry(cfg.trap, cfg.targets, {}, cfg.grid);
        return calibration->config;
    }

    SweepOptions sweep_options(const GridSpec& grid) const {
        SweepOptions so;
        so.n_states = std::max(cfg.n_states, 6);
        so.grid = grid;
        so.threads = opt.threads;
        return so;
    }

    const EigenBundle& main_bundle() {
        if (!bundle)
            bundle = std::make_unique<EigenBundle>(
                sweep_spectrum(trap(), uniform_s_grid(cfg.s_points), sweep_options(cfg.grid)));
        return *bundle;
    }

    const EigenBundle& dynamics_bundle() {
        if (!dyn_bundle)
            dyn_bundle = std::make_unique<EigenBundle>(
                sweep_spectrum(trap(), uniform_s_grid(cfg.s_points), sweep_options(cfg.dynamics_grid)));
        return *dyn_bundle;
    }

    const CouplingTable& table(int i, int f) {
        auto& slot = (i == 0 && f == 2) ? t02 : (i == 1 && f == 3) ? t13 : t01;
        if (!slot) slot = std::make_unique<CouplingTable>(build_coupling_table(main_bundle(), i, f));
        return *slot;
    }

    const OptimizedRamp& optimized_ramp() {
        if (!optimized) {
            ShapeOptions so;
            so.floor_fraction = cfg.floor_fraction;
            optimized = std::make_unique<OptimizedRamp>(optimize_ramp(table(0, 2), blackman_shape(), 30e-3, so));
        }
        return *optimized;
    }
};

CriterionResult level_spacings(Context& c) {
    CriterionResult r{1, "level spacings", false, {}, 0.0};
    c.trap();
    const auto& m = c.calibration->achieved;
    const double f0 = units::rad_to_hz(m.omega_s0), f1 = units::rad_to_hz(m.omega_s1);
    r.passed = std::abs(f0 / 190.0 - 1.0) <= 0.15 && std::abs(f1 / 240.0 - 1.0) <= 0.15;
    r.detail = "omega_s0/2pi = " + fmt("%.2f", f0) + " Hz (190 +-15%), omega_s1/2pi = " + fmt("%.2f", f1) +
               " Hz (240 +-15%), trap height " + fmt("%.2f", m.trap_height_um) + " um, well separation " +
               fmt("%.2f", m.separation_um) + " um";
    return r;
}

CriterionResult degeneracy(Context& c) {
    CriterionResult r{2, "degeneracy at s = 1", false, {}, 0.0};
    const EigenSet& e = c.main_bundle().sets.back();
    const double e20 = std::abs(e.energies[2] - e.energies[0]);
    const double q10 = std::abs(e.energies[1] - e.energies[0]) / e20;
    const double q32 = std::abs(e.energies[3] - e.energies[2]) / e20;
    r.passed = q10 < 0.02 && q32 < 0.02;
    r.detail = "|E1-E0|/|E2-E0| = " + fmt("%.3e", q10) + ", |E3-E2|/|E2-E0| = " + fmt("%.3e", q32) + " (limit 0.02)";
    return r;
}

CriterionResult parity_rule(Context& c) {
    CriterionResult r{3, "parity selection rule", false, {}, 0.0};
    const double a01 = c.table(0, 1).max_abs_a(), a02 = c.table(0, 2).max_abs_a();
    const double ratio = a01 / a02;
    r.passed = ratio < 1e-6;
    r.detail = "max|a01| / max|a02| = " + fmt("%.3e", ratio) + " (limit 1e-6), max|a02| = " + fmt("%.4g", a02);
    return r;
}

CriterionResult linear_threshold(Context& c) {
    CriterionResult r{4, "linear-ramp threshold", false, {}, 0.0};
    const CouplingTable& t = c.table(0, 2);
    std::vector<double> T;
    for (int k = 10; k <= 100; ++k) T.push_back(k * 1e-3);
    const auto res = sweep_duration(t, Ramp::linear(1.0), T, c.opt.threads);
    const double p60 = res[50].probability;
    // Envelope: maximum over consecutive 10 ms windows.
    std::vector<double> env;
    for (int w = 0; w < 9; ++w) {
        double m = 0.0;
        for (int k = 10 * w; k <= 10 * w + 10; ++k) m = std::max(m, res[static_cast<std::size_t>(k)].probability);
        env.push_back(m);
    }
    bool decreasing = true;
    for (std::size_t w = 1; w < env.size(); ++w) decreasing = decreasing && env[w] <= env[w - 1];
    r.passed = p60 < 0.02 && decreasing;
    std::string envs;
    for (double v : env) envs += (envs.empty() ? "" : " ") + fmt("%.3g", v);
    r.detail = "P02(60 ms) = " + fmt("%.4f", p60) + " (limit 0.02); envelope over 10 ms windows " + envs +
               (decreasing ? " decreases" : " does not decrease");
    return r;
}

CriterionResult optimizer_gain(Context& c) {
    CriterionResult r{5, "optimizer gain", false, {}, 0.0};
    const OptimizedRamp& o = c.optimized_ramp();
    std::vector<double> T;
    for (int k = 20; k <= 100; k += 5) T.push_back(k * 1e-3);
    const auto lin = sweep_duration(c.table(0, 2), Ramp::linear(1.0), T, c.opt.threads);
    const auto opt = sweep_duration(c.table(0, 2), o.ramp, T, c.opt.threads);
    double best = 1e300, best_T = 0.0;
    for (std::size_t k = 0; k < T.size(); ++k) {
        const double ratio = opt[k].probability / lin[k].probability;
        if (ratio < best) {
            best = ratio;
            best_T = T[k];
        }
    }
    const Ramp r30 = o.ramp.with_duration(30e-3);
    const double p02 = transition_amplitude(c.table(0, 2), r30).probability;
    const double p13 = transition_amplitude(c.table(1, 3), r30).probability;
    const double total = p02 + p13;
    r.passed = best <= 0.1 && total < 1e-2;
    r.detail = "min P_opt/P_lin = " + fmt("%.3e", best) + " at T = " + fmt("%.0f", best_T * 1e3) +
               " ms (limit 0.1); P02 + P13 at 30 ms = " + fmt("%.3e", p02) + " + " + fmt("%.3e", p13) + " = " +
               fmt("%.3e", total) + " (limit 1e-2, target 1e-3 " + (total < 1e-3 ? "met" : "not met") + ")";
    return r;
}

CriterionResult fourier_limit(Context& c) {
    CriterionResult r{6, "Fourier-limit exactness", false, {}, 0.0};
    const double a0 = 1.0, dw = units::hz_to_rad(200.0);
    std::vector<double> s(101), a(101, a0), w(101, dw);
    for (std::size_t k = 0; k < s.size(); ++k) s[k] = static_cast<double>(k) / 100.0;
    const CouplingTable table(0, 2, s, a, w);
    const OptimizedRamp o = optimize_ramp(table, blackman_shape(), 1e-3);
    double worst = 0.0;
    for (double T : {1e-3, 2.5e-3, 5e-3, 10e-3, 20e-3, 40e-3}) {
        const auto num = transition_amplitude(table, o.ramp.with_duration(T));
        const double exact = a0 * std::abs(blackman_spectrum(dw * T));
        worst = std::max(worst, std::abs(std::abs(num.amplitude) - exact));
    }
    (void)c;
    r.passed = worst < 1e-6;
    r.detail = "max ||c_f| - |a0 U(dw T)|| = " + fmt("%.3e", worst) + " over 6 durations (limit 1e-6), A = " +
               fmt("%.12g", o.shape.amplitude) + ", T0 dw = " + fmt("%.12g", o.map.T0 * dw);
    return r;
}

CriterionResult oracle_equivalence(Context& c) {
    CriterionResult r{7, "perturbative vs TDSE", false, {}, 0.0};
    const EigenBundle& b = c.dynamics_bundle();
    const CouplingTable t02 = build_coupling_table(b, 0, 2), t13 = build_coupling_table(b, 1, 3);
    ShapeOptions so;
    so.floor_fraction = c.cfg.floor_fraction;
    const OptimizedRamp o = optimize_ramp(t02, blackman_shape(), 30e-3, so);
    const PotentialSchedule sch(b);

    struct Case {
        std::string label;
        Ramp ramp;
        int i;
    };
    std::vector<Case> cases;
    for (double T : {30.0, 40.0, 50.0, 60.0, 80.0})
        for (int i : {0, 1}) cases.push_back({"optimized " + fmt("%.0f", T) + " ms", o.ramp.with_duration(T * 1e-3), i});
    for (double T : {90.0, 100.0})
        for (int i : {0, 1}) cases.push_back({"linear " + fmt("%.0f", T) + " ms", Ramp::linear(T * 1e-3), i});

    std::vector<double> pert(cases.size()), exact(cases.size());
    parallel_for(cases.size(), c.opt.threads, [&](std::size_t k) {
        const Case& cs = cases[k];
        pert[k] = transition_amplitude(cs.i == 0 ? t02 : t13, cs.ramp).probability;
        const auto psi = propagate(sch, cs.ramp, WavefunctionState::from_real(b.x_um(), b.sets.front().states[static_cast<std::size_t>(cs.i)]));
        exact[k] = project_populations(psi, b.sets.back()).P[static_cast<std::size_t>(cs.i + 2)];
    });
    int in_range = 0, agree = 0;
    std::string list;
    for (std::size_t k = 0; k < cases.size(); ++k) {
        const bool in = pert[k] >= 1e-4 && pert[k] <= 5e-2;
        const double rel = exact[k] / pert[k] - 1.0;
        if (!in) continue;
        ++in_range;
        const bool ok = std::abs(rel) <= 0.3;
        agree += ok;
        list += "; " + cases[k].label + " P" + std::to_string(cases[k].i) + std::to_string(cases[k].i + 2) + " " +
                fmt("%.3e", pert[k]) + " vs " + fmt("%.3e", exact[k]) + " (" + fmt("%+.0f", 100.0 * rel) + "%)";
    }
    r.passed = agree >= 5;
    r.detail = std::to_string(agree) + " of " + std::to_string(in_range) +
               " in-range cases agree within 30% (need 5)" + list;
    return r;
}

CriterionResult fringe_law(Context& c) {
    CriterionResult r{8, "fringe law", false, {}, 0.0};
    const EigenBundle& b = c.dynamics_bundle();
    const CouplingTable t02 = build_coupling_table(b, 0, 2);
    ShapeOptions so;
    so.floor_fraction = c.cfg.floor_fraction;
    const OptimizedRamp o = optimize_ramp(t02, blackman_shape(), 30e-3, so);
    const PotentialSchedule sch(b);
    const auto psi0 = WavefunctionState::from_real(b.x_um(), b.sets.front().states[0]);
    std::vector<CycleResult> res(9);
    parallel_for(res.size(), c.opt.threads, [&](std::size_t k) {
        HoldStage h;
        h.dphi = units::two_pi * static_cast<double>(k) / 8.0;
        res[k] = interferometer_cycle(sch, o.ramp, h, nullptr, psi0, b.sets.front());
        res[k].final_state = {};
    });
    double worst = 0.0, worst_norm = 0.0;
    for (const auto& cy : res) {
        const double s = std::sin(0.5 * cy.dphi);
        worst = std::max(worst, std::abs(cy.populations.P[1] - s * s));
        worst_norm = std::max(worst_norm, cy.norm_error);
    }
    r.passed = worst < 0.01;
    r.detail = "max |P1 - sin^2(dphi/2)| = " + fmt("%.3e", worst) + " over 9 phases (limit 0.01); P0(0) = " +
               fmt("%.4f", res[0].populations.P[0]) + ", P1(pi) = " + fmt("%.4f", res[4].populations.P[1]) +
               ", max norm error " + fmt("%.1e", worst_norm);
    return r;
}

CriterionResult dephasing(Context&) {
    CriterionResult r{9, "dephasing formula", false, {}, 0.0};
    const double phi = gradient_dephasing(6.0, 1.0, 60e-3) / units::two_pi;
    r.passed = std::abs(phi / 50.0 - 1.0) <= 0.05;
    r.detail = "dPhi = 2pi x " + fmt("%.3f", phi) + " (2pi x 50 +-5%)";
    return r;
}

CriterionResult hygiene(Context& c) {
    CriterionResult r{10, "numerical hygiene", false, {}, 0.0};
    std::vector<std::string> failed;
    std::ostringstream d;
    const double mass = units::rb87_mass;
    const double K = units::kinetic_coefficient(mass);

    {  // harmonic oscillator
        const double w = units::hz_to_rad(190.0);
        PotentialCurve pc;
        pc.x_um = symmetric_grid(8.0, 2048);
        for (double x : pc.x_um) pc.U.push_back(0.25 * w * w * x * x / K);
        const EigenSet e = solve_stationary(pc, 4, mass);
        double worst = 0.0;
        for (int n = 0; n < 4; ++n)
            worst = std::max(worst, std::abs((e.energies[static_cast<std::size_t>(n)] + pc.min_U()) / (w * (n + 0.5)) - 1.0));
        d << "harmonic max rel err " << fmt("%.2e", worst) << " (1e-3)";
        if (!(worst < 1e-3)) failed.push_back("harmonic");
    }
    {  // square well, walls one node beyond the grid
        PotentialCurve pc;
        pc.x_um = symmetric_grid(5.0, 2048);
        pc.U.assign(pc.x_um.size(), 0.0);
        SolverOptions so;
        so.check_boundary = false;
        const EigenSet e = solve_stationary(pc, 6, mass, so);
        const double a = (pc.x_um.size() + 1) * pc.spacing();
        double worst = 0.0;
        for (int n = 0; n < 6; ++n) {
            const double exact = K * std::pow(units::pi * (n + 1) / a, 2);
            worst = std::max(worst, std::abs(e.energies[static_cast<std::size_t>(n)] / exact - 1.0));
        }
        d << "; square well max rel err " << fmt("%.2e", worst) << " (1e-2)";
        if (!(worst < 1e-2)) failed.push_back("square well");
    }
    {  // norm conservation along a splitting ramp
        const EigenBundle& b = c.dynamics_bundle();
        const PotentialSchedule sch(b);
        const auto psi = propagate(sch, Ramp::linear(5e-3), WavefunctionState::from_real(b.x_um(), b.sets.front().states[0]));
        const double err = std::abs(psi.norm() - 1.0);
        d << "; norm error " << fmt("%.1e", err) << " (1e-10)";
        if (!(err < 1e-10)) failed.push_back("norm");
    }
    {  // Blackman identities
        const PulseShape u = blackman_shape();
        double area = 0.0;
        const int n = 4096;
        for (int k = 0; k < n; ++k) area += u((k + 0.5) / n);  // midpoint rule, exact for this trigonometric polynomial
        area /= n;
        const double worst = std::max({std::abs(u(0.0)), std::abs(u(1.0)), std::abs(area - 1.0), std::abs(u(0.5) - 50.0 / 21.0)});
        d << "; Blackman identities " << fmt("%.1e", worst) << " (1e-12)";
        if (!(worst < 1e-12)) failed.push_back("Blackman");
    }
    {  // determinism
        const auto& t = c.table(0, 2);
        const std::vector<double> T{0.02, 0.04, 0.06};
        auto csv = [&] {
            const auto res = sweep_duration(t, Ramp::linear(1.0), T, c.opt.threads);
            return to_csv(excitation_table(T, {{0, 2}}, {res}));
        };
        SweepOptions so;
        so.n_states = 4;
        so.grid = c.cfg.grid;
        so.threads = c.opt.threads;
        auto levels = [&] { return to_csv(levels_table(sweep_spectrum(c.trap(), uniform_s_grid(11), so))); };
        const bool same = csv() == csv() && levels() == levels();
        d << "; reruns " << (same ? "byte-identical" : "differ");
        if (!same) failed.push_back("determinism");
    }
    r.passed = failed.empty();
    r.detail = d.str();
    return r;
}

}  // namespace

std::vector<CriterionResult> run_acceptance(const RunConfig& cfg, const AcceptanceOptions& opt) {
    Context ctx(cfg, opt);
    using Fn = CriterionResult (*)(Context&);
    const std::vector<std::pair<int, Fn>> all{
        {1, level_spacings}, {2, degeneracy},         {3, parity_rule}, {4, linear_threshold}, {5, optimizer_gain},
        {6, fourier_limit},  {7, oracle_equivalence}, {8, fringe_law},  {9, dephasing},        {10, hygiene}};
    static const char* titles[] = {"",
                                   "level spacings",
                                   "degeneracy at s = 1",
                                   "parity selection rule",
                                   "linear-ramp threshold",
                                   "optimizer gain",
                                   "Fourier-limit exactness",
                                   "perturbative vs TDSE",
                                   "fringe law",
                                   "dephasing formula",
                                   "numerical hygiene"};
    std::vector<CriterionResult> out;
    for (const auto& [id, fn] : all) {
        if (!opt.only.empty() && std::find(opt.only.begin(), opt.only.end(), id) == opt.only.end()) continue;
        const auto t0 = std::chrono::steady_clock::now();
        CriterionResult r;
        try {
            r = fn(ctx);
        } catch (const std::exception& e) {
            r.id = id;
            r.title = titles[id];
            r.passed = false;
            r.detail = std::string("error: ") + e.what();
        }
        r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (opt.on_result) opt.on_result(r);
        out.push_back(std::move(r));
    }
    return out;
}

}  // namespace chiptrap
