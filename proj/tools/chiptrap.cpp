#include <cmath>
#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "chiptrap/acceptance.hpp"
#include "chiptrap/errors.hpp"
#include "chiptrap/io.hpp"
#include "chiptrap/parallel.hpp"
#include "chiptrap/units.hpp"

using namespace chiptrap;
namespace fs = std::filesystem;

namespace {

void note(const std::string& msg) { std::fprintf(stderr, "chiptrap: %s\n", msg.c_str()); }

struct Session {
    RunConfig rc;
    fs::path out;
    TrapConfig trap;

    void prepare() {
        trap = rc.trap;
        if (rc.calibrate) {
            const CalibrationResult cal = calibrate_geometry(rc.trap, rc.targets, {}, rc.grid);
            note(cal.report);
            if (!cal.success) note("continuing with the best configuration found");
            trap = cal.config;
        }
    }

    SweepOptions sweep_options(const GridSpec& grid) const {
        SweepOptions so;
        so.n_states = rc.n_states;
        so.grid = grid;
        so.threads = rc.threads;
        return so;
    }

    EigenBundle bundle(const GridSpec& grid) const {
        EigenBundle b = sweep_spectrum(trap, uniform_s_grid(rc.s_points), sweep_options(grid));
        for (const auto& n : b.notes) note(n);
        return b;
    }

    void write(const std::string& name, const std::string& text) const {
        write_text(out / name, text);
        note("wrote " + (out / name).string());
    }

    OptimizedRamp optimized(const EigenBundle& b, double T) const {
        ShapeOptions so;
        so.floor_fraction = rc.floor_fraction;
        const CouplingTable t = build_coupling_table(b, rc.optimize_pair.first, rc.optimize_pair.second);
        return optimize_ramp(t, shape_by_name(rc.shape), T, so);
    }
};

std::string s_label(double s) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3f", s);
    return buf;
}

void cmd_potential(Session& S) {
    if (S.rc.potential_s.empty()) throw ConfigError("potential: empty s list");
    const std::vector<double> x = choose_grid(S.trap, S.rc.grid);
    for (double s : S.rc.potential_s) {
        const PotentialCurve c = potential_curve(S.trap, s, x);
        for (const auto& w : c.warnings) note(w);
        char buf[160];
        std::snprintf(buf, sizeof buf, "s = %.3f: minimum at |x| = %.3f um, well separation %.3f um", s, c.min_location_um,
                      c.well_separation_um);
        note(buf);
        S.write("potential_s" + s_label(s) + ".csv", to_csv(potential_table(c)));
    }
}

void cmd_spectrum(Session& S) {
    const EigenBundle b = S.bundle(S.rc.grid);
    S.write("levels.csv", to_csv(levels_table(b)));
    save_bundle(b, S.out / "bundle");
    note("wrote " + (S.out / "bundle").string());
}

void cmd_sweep(Session& S) {
    const EigenBundle b = S.bundle(S.rc.grid);
    std::vector<CouplingTable> tables;
    for (auto [i, f] : S.rc.pairs) tables.push_back(build_coupling_table(b, i, f));
    S.write("coupling.csv", to_csv(coupling_csv(tables)));
    std::vector<double> T;
    for (double t : S.rc.T_list_ms) T.push_back(t * 1e-3);
    if (T.empty()) throw ConfigError("sweep: empty T list");
    auto run = [&](const Ramp& family, const std::string& name) {
        std::vector<std::vector<TransitionResult>> res;
        for (const auto& t : tables) res.push_back(sweep_duration(t, family, T, S.rc.threads));
        S.write(name, to_csv(excitation_table(T, S.rc.pairs, res)));
    };
    if (S.rc.ramp == "linear" || S.rc.ramp == "both") run(Ramp::linear(1.0), "excitation_linear.csv");
    if (S.rc.ramp == "optimized" || S.rc.ramp == "both") {
        const OptimizedRamp o = S.optimized(b, S.rc.optimize_T_ms * 1e-3);
        run(o.ramp, "excitation_optimized.csv");
    }
}

void cmd_optimize(Session& S) {
    const EigenBundle b = S.bundle(S.rc.grid);
    const OptimizedRamp o = S.optimized(b, S.rc.optimize_T_ms * 1e-3);
    const CouplingTable t = build_coupling_table(b, S.rc.optimize_pair.first, S.rc.optimize_pair.second);
    char buf[160];
    std::snprintf(buf, sizeof buf, "A = %.6g, T0 = %.6g ms, |a| floor = %.3g (%.1e of max)", o.shape.amplitude,
                  o.map.T0 * 1e3, o.shape.floor, o.shape.floor_fraction);
    note(buf);
    S.write("ramp_optimized.csv", to_csv(ramp_table(o.ramp)));
    S.write("optimizer_report.json",
            optimizer_report_json(o, coupling_identity_residual(o.shape, t, shape_by_name(S.rc.shape))));
}

void cmd_cycle(Session& S) {
    const EigenBundle b = S.bundle(S.rc.dynamics_grid);
    const double T = S.rc.cycle.T_ms * 1e-3;
    const Ramp split = S.rc.ramp == "linear" ? Ramp::linear(T) : S.optimized(b, T).ramp;
    note("split ramp " + split.label());
    const PotentialSchedule sch(b);
    const auto psi0 = WavefunctionState::from_real(b.x_um(), b.sets.front().states[0]);
    const int n = S.rc.cycle.phases;
    std::vector<CycleResult> res(static_cast<std::size_t>(n));
    parallel_for(res.size(), S.rc.threads, [&](std::size_t k) {
        HoldStage h;
        h.duration = S.rc.cycle.hold_ms * 1e-3;
        h.mode = S.rc.cycle.mode;
        h.dphi = n > 1 ? units::two_pi * static_cast<double>(k) / (n - 1) : 0.0;
        PropagationOptions po;
        int index = 0;
        if (k == 0 && S.rc.cycle.snapshots > 0) {
            const double dt = max_time_step(sch);
            po.snapshot_interval = std::max(1, static_cast<int>(std::ceil(T / dt)) / S.rc.cycle.snapshots);
            po.snapshot = [&](const WavefunctionState& w) {
                CsvTable t = wavefunction_table(w);
                t.comments.push_back("t_s: " + format_number(w.t));
                write_text(S.out / ("psi_t" + std::to_string(index++) + ".csv"), to_csv(t));
            };
        }
        res[k] = interferometer_cycle(sch, split, h, nullptr, psi0, b.sets.front(), po);
        res[k].final_state = {};
        for (const auto& w : res[k].populations.warnings) note(w);
    });
    S.write("fringe.csv", to_csv(fringe_table(res)));
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Splitting microtrap: potentials, spectra, excitation sweeps, ramp optimisation, interferometer cycles"};
    app.fallthrough();
    app.require_subcommand(0, 1);

    std::string config, out, pairs, ramp, shape, s_list;
    std::vector<double> T_list;
    bool check = false;
    int threads = -1;
    app.add_option("--config", config, "run configuration (YAML or JSON)");
    app.add_option("--out", out, "output directory");
    app.add_option("--pairs", pairs, "transition pairs, e.g. 0:2,1:3");
    app.add_option("--ramp", ramp, "linear | optimized | both")->check(CLI::IsMember({"linear", "optimized", "both"}));
    app.add_option("--shape", shape, "pulse shape: blackman | hann | raised_cosine_squared");
    app.add_option("--T-list", T_list, "durations in ms")->delimiter(',');
    app.add_option("--threads", threads, "worker threads (0: all cores)");
    app.add_flag("--check", check, "run the acceptance suite; exit 4 on any failure");

    auto* potential = app.add_subcommand("potential", "potential curves U(x; s)");
    potential->add_option("--s-list", s_list, "comma-separated s values (default 0,0.5,1)");
    app.add_subcommand("spectrum", "levels.csv and the eigenstate bundle");
    app.add_subcommand("sweep", "coupling table and excitation probability versus duration");
    app.add_subcommand("optimize", "optimised ramp and optimiser report");
    app.add_subcommand("cycle", "interferometer fringe by full propagation");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : static_cast<int>(ExitCode::Config);
    }

    try {
        Session S;
        if (config.empty()) {
            // Paper parameters with the geometry calibrated on the fly.
            S.rc.calibrate = true;
            S.rc.T_list_ms.clear();
            for (int k = 10; k <= 100; k += 5) S.rc.T_list_ms.push_back(k);
        } else {
            S.rc = load_run_config(config);
        }
        if (!out.empty()) S.rc.out_dir = out;
        if (!pairs.empty()) {
            S.rc.pairs = parse_pairs(pairs);
            S.rc.optimize_pair = S.rc.pairs.front();
        }
        if (!ramp.empty()) S.rc.ramp = ramp;
        if (!shape.empty()) S.rc.shape = shape;
        if (!T_list.empty()) S.rc.T_list_ms = T_list;
        if (threads >= 0) S.rc.threads = static_cast<unsigned>(threads);
        if (potential->parsed() && !s_list.empty()) S.rc.potential_s = parse_number_list(s_list);
        if (potential->parsed() && potential->count("--s-list") && s_list.empty()) throw ConfigError("potential: empty s list");
        S.rc.validate();
        S.out = S.rc.out_dir;

        if (check) {
            AcceptanceOptions opt;
            opt.threads = S.rc.threads;
            opt.on_result = [](const CriterionResult& r) {
                std::printf("%s\n", format_result(r).c_str());
                std::fflush(stdout);
            };
            const auto results = run_acceptance(S.rc, opt);
            int failed = 0;
            for (const auto& r : results) failed += !r.passed;
            std::printf("%zu criteria, %d failed\n", results.size(), failed);
            if (failed) return static_cast<int>(ExitCode::Acceptance);
            if (app.get_subcommands().empty()) return 0;
        }
        if (app.get_subcommands().empty()) {
            std::fprintf(stderr, "%s", app.help().c_str());
            return static_cast<int>(ExitCode::Config);
        }

        S.prepare();
        const std::string name = app.get_subcommands().front()->get_name();
        if (name == "potential") cmd_potential(S);
        else if (name == "spectrum") cmd_spectrum(S);
        else if (name == "sweep") cmd_sweep(S);
        else if (name == "optimize") cmd_optimize(S);
        else if (name == "cycle") cmd_cycle(S);
        return 0;
    } catch (const Error& e) {
        std::fprintf(stderr, "chiptrap: error: %s\n", e.what());
        return static_cast<int>(e.exit_code());
    } catch (const std::exception& e) {
        std::fprintf(stderr, "chiptrap: error: %s\n", e.what());
        return static_cast<int>(ExitCode::Numerical);
    }
}
