#pragma once

#include <complex>
#include <string>
#include <vector>

#include "chiptrap/interp.hpp"
#include "chiptrap/ramp.hpp"
#include "chiptrap/spectrum.hpp"

namespace chiptrap {

// a_if(s) = <phi_f(s)| d/ds |phi_i(s)> and the gap omega_f - omega_i along the s grid.
class CouplingTable {
public:
    CouplingTable(int i, int f, std::vector<double> s, std::vector<double> a, std::vector<double> domega);

    int initial() const { return i_; }
    int final_state() const { return f_; }
    const std::vector<double>& s() const { return s_; }
    const std::vector<double>& a() const { return a_; }
    const std::vector<double>& domega() const { return dw_; }

    double a_at(double s) const { return a_spline_(s); }
    double domega_at(double s) const { return dw_spline_(s); }
    double domega_slope(double s) const { return dw_spline_.derivative(s); }
    double max_abs_a() const;

private:
    int i_, f_;
    std::vector<double> s_, a_, dw_;
    CubicSpline a_spline_, dw_spline_;
};

struct CouplingValue {
    double value = 0.0;
    double hellmann_feynman = 0.0;  // NaN when the gap is below the cross-check threshold
    std::vector<std::string> warnings;
};

// Finite difference in s on the gauge-fixed bundle, antisymmetrised,
// cross-checked against <f|dU/ds|i> / (omega_i - omega_f).
CouplingValue coupling_coefficient(const EigenBundle& bundle, int i, int f, double s);

// Tabulated over the whole s grid, one-sided second-order differences at the ends.
CouplingTable build_coupling_table(const EigenBundle& bundle, int i, int f);

struct TransitionResult {
    double T = 0.0;
    std::complex<double> amplitude{};
    double probability = 0.0;  // |amplitude|^2
    bool outside_first_order = false;  // probability > 0.1
    std::string ramp;
    std::size_t samples = 0;
    double samples_per_period = 0.0;
    int refinements = 0;
};

struct QuadratureOptions {
    double samples_per_period = 20.0;
    double samples_per_cell = 10.0;
    double rtol = 1e-7;    // on the amplitude, between successive refinements
    double atol = 1e-11;   // absolute amplitude floor
    std::size_t max_samples = std::size_t{1} << 24;
};

// c_f(T) = int_0^T exp(i int_0^t domega) a(s(t)) ds/dt dt by cumulative-phase trapezoid.
TransitionResult transition_amplitude(const CouplingTable& table, const Ramp& ramp,
                                      const QuadratureOptions& opt = {});

// One result per T, the ramp rescaled as s(t, T) = s(t / T, 1).
std::vector<TransitionResult> sweep_duration(const CouplingTable& table, const Ramp& ramp_family,
                                             const std::vector<double>& T_list, unsigned threads = 0,
                                             const QuadratureOptions& opt = {});

// Relative phase from a longitudinal gradient b_x acting across two wells d apart:
// (U per field / hbar) * b_x * d * T_sense.
double gradient_dephasing(double separation_um, double gradient_G_per_cm, double T_sense_s,
                          double scale_Hz_per_G = 1.4e6);

}  // namespace chiptrap
