#pragma once

#include <complex>
#include <functional>
#include <string>
#include <vector>

#include "chiptrap/ramp.hpp"
#include "chiptrap/spectrum.hpp"

namespace chiptrap {

// U(x; s) relative to its minimum at each s, cubic-spline interpolated in s
// from a set of tabulated potential curves on a common x grid.
class PotentialSchedule {
public:
    PotentialSchedule(const TrapConfig& cfg, const std::vector<double>& s_nodes, const std::vector<double>& x_um,
                      unsigned threads = 0);
    explicit PotentialSchedule(const EigenBundle& bundle);
    PotentialSchedule(std::vector<double> s_nodes, std::vector<double> x_um,
                      std::vector<std::vector<double>> U_rel, double mass_kg);

    const std::vector<double>& x_um() const { return x_; }
    const std::vector<double>& s_nodes() const { return s_; }
    double mass_kg() const { return mass_; }
    double max_potential() const { return max_u_; }

    // Writes U(x_i; s) in rad/s into out (resized to the grid).
    void evaluate(double s, std::vector<double>& out) const;

private:
    void build();

    std::vector<double> s_, x_;
    std::vector<std::vector<double>> u_;   // [s][x]
    std::vector<std::vector<double>> m_;   // second s-derivatives, [s][x]
    double mass_ = units::rb87_mass;
    double max_u_ = 0.0;
};

struct WavefunctionState {
    std::vector<double> x_um;
    std::vector<std::complex<double>> psi;  // sum |psi|^2 dx = 1, dx in um
    double t = 0.0;

    double norm() const;
    static WavefunctionState from_real(const std::vector<double>& x_um, const std::vector<double>& phi);
};

// Largest allowed step: 1 / (50 max U).
double max_time_step(const PotentialSchedule& schedule);

struct PropagationOptions {
    double dt = 0.0;              // 0: the stability bound
    int norm_check_interval = 1000;
    double norm_tolerance = 1e-8;  // per check interval
    // Added to U on x > 0 (rad/s), e.g. a hold-stage phase offset.
    double right_offset = 0.0;
    // Called every snapshot_interval steps (and at the end) when set.
    std::function<void(const WavefunctionState&)> snapshot;
    int snapshot_interval = 0;
};

// Crank-Nicolson under U(x; s(t)), s taken at each step midpoint.
WavefunctionState propagate(const PotentialSchedule& schedule, const Ramp& ramp, WavefunctionState psi0,
                            const PropagationOptions& opt = {});

// Same with s held fixed for a duration.
WavefunctionState propagate_static(const PotentialSchedule& schedule, double s, double duration,
                                   WavefunctionState psi0, const PropagationOptions& opt = {});

struct Populations {
    std::vector<double> P;
    double residual = 0.0;  // 1 - sum P
    std::vector<std::string> warnings;
};

Populations project_populations(const WavefunctionState& psi, const EigenSet& basis);

// Repeats the propagation with dt halved until the populations in the basis
// change by less than tolerance. Throws AccuracyError after max_halvings.
struct ConvergedRun {
    WavefunctionState state;
    Populations populations;
    double dt = 0.0;
    double change = 0.0;
    int halvings = 0;
};
ConvergedRun propagate_converged(const PotentialSchedule& schedule, const Ramp& ramp, const WavefunctionState& psi0,
                                 const EigenSet& basis, double dt, double tolerance = 1e-5, int max_halvings = 4);

enum class PhaseMode { Imprint, Offset };

struct HoldStage {
    double duration = 0.0;  // s
    double dphi = 0.0;      // rad, relative phase of the x > 0 well
    PhaseMode mode = PhaseMode::Imprint;
};

struct CycleResult {
    double dphi = 0.0;
    Populations populations;  // in the s = 0 basis
    double leakage = 0.0;     // 1 - P0 - P1
    double norm_error = 0.0;
    WavefunctionState final_state;
};

// Split, hold with a phase difference, merge (the split ramp reversed unless
// given), then project onto the s = 0 eigenstates.
CycleResult interferometer_cycle(const PotentialSchedule& schedule, const Ramp& split, const HoldStage& hold,
                                 const Ramp* merge, const WavefunctionState& psi0, const EigenSet& basis_s0,
                                 const PropagationOptions& opt = {});

}  // namespace chiptrap
