#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "chiptrap/adiabatic.hpp"
#include "chiptrap/optimizer.hpp"
#include "chiptrap/spectrum.hpp"
#include "chiptrap/tdse.hpp"
#include "chiptrap/trap.hpp"

namespace chiptrap {

struct CycleSpec {
    double T_ms = 30.0;
    double hold_ms = 0.0;
    PhaseMode mode = PhaseMode::Imprint;
    int phases = 9;  // uniformly on [0, 2 pi]
    int snapshots = 0;  // per stage; 0 disables psi_t*.csv
};

struct RunConfig {
    TrapConfig trap;
    bool calibrate = false;
    CalibrationTargets targets;
    GridSpec grid;
    GridSpec dynamics_grid{10.0, 1024};
    int s_points = 101;
    int n_states = 6;
    std::vector<std::pair<int, int>> pairs{{0, 2}, {1, 3}};
    bool allow_mixed_parity = false;
    std::string ramp = "both";  // linear | optimized | both
    std::string shape = "blackman";
    std::pair<int, int> optimize_pair{0, 2};
    double floor_fraction = 1e-3;
    double optimize_T_ms = 30.0;
    std::vector<double> T_list_ms;
    std::vector<double> potential_s{0.0, 0.5, 1.0};
    CycleSpec cycle;
    unsigned threads = 0;
    std::string out_dir = "out";

    void validate() const;
};

// YAML or JSON; unknown keys are rejected. Missing keys keep their defaults.
RunConfig load_run_config(const std::filesystem::path& path);
RunConfig parse_run_config(const std::string& text);

// Parsers for the command-line forms "0:2,1:3" and "10,20,30".
std::vector<std::pair<int, int>> parse_pairs(const std::string& text);
std::vector<double> parse_number_list(const std::string& text);

std::string format_number(double v);

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;
    std::vector<std::string> comments;  // written as "# ..." lines before the header
};

std::string to_csv(const CsvTable& table);
void write_text(const std::filesystem::path& path, const std::string& text);

CsvTable potential_table(const PotentialCurve& curve);
CsvTable levels_table(const EigenBundle& bundle);
CsvTable coupling_csv(const std::vector<CouplingTable>& tables);
CsvTable excitation_table(const std::vector<double>& T_s, const std::vector<std::pair<int, int>>& pairs,
                          const std::vector<std::vector<TransitionResult>>& results);
CsvTable ramp_table(const Ramp& ramp, int samples = 2001);
CsvTable fringe_table(const std::vector<CycleResult>& cycles);
CsvTable wavefunction_table(const WavefunctionState& psi);

std::string optimizer_report_json(const OptimizedRamp& result, double identity_residual);

// Largest relative deviation of a(s_tau) ds_tau/dtau from A u_hat(tau) where |a| is above the floor.
double coupling_identity_residual(const ShapeSolution& shape, const CouplingTable& table, const PulseShape& u_hat);

void save_bundle(const EigenBundle& bundle, const std::filesystem::path& dir);
EigenBundle load_bundle(const std::filesystem::path& dir);

}  // namespace chiptrap
