#pragma once

#include <complex>
#include <string>
#include <vector>

#include "chiptrap/adiabatic.hpp"
#include "chiptrap/ramp.hpp"

namespace chiptrap {

struct ShapeOptions {
    double floor_fraction = 1e-3;  // |a| floored at this fraction of max |a| in the shape equation
    int steps = 4000;              // RK4 steps on [0, 1]
    double tolerance = 1e-8;       // on s_tau(1)
    int max_iterations = 200;
};

// Solution of ds/dtau = A u_hat(tau) / |a_reg(s)| with s(0) = 0, s(1) = 1.
struct ShapeSolution {
    std::string shape;
    int pair_i = 0;
    int pair_f = 2;
    double amplitude = 0.0;       // A
    double floor = 0.0;           // absolute |a| floor
    double floor_fraction = 0.0;
    int iterations = 0;
    double endpoint_residual = 0.0;  // |s_tau(1) - 1| before the endpoint is pinned
    std::vector<double> tau;
    std::vector<double> s;
    std::vector<double> ds_dtau;
    std::vector<double> u;  // a(s_tau) ds_tau/dtau with the unfloored a
};

ShapeSolution solve_shape(const CouplingTable& table, const PulseShape& shape, const ShapeOptions& opt = {});

// t(tau) = int dtau / domega(s_tau); T0 = t(1).
struct TimeMap {
    std::vector<double> tau;
    std::vector<double> t;        // s
    std::vector<double> dtau_dt;  // domega(s_tau), rad/s
    double T0 = 0.0;

    double tau_of_t(double t) const;
};

TimeMap solve_timemap(const CouplingTable& table, const ShapeSolution& shape);

// s(t) = s_tau(tau(t T0 / T)).
Ramp compose_ramp(const ShapeSolution& shape, const TimeMap& map, double T);

// int_0^1 exp(i (T / T0) tau) u(tau) dtau.
std::complex<double> predict_amplitude_fourier(const ShapeSolution& shape, double T, double T0);

struct OptimizedRamp {
    ShapeSolution shape;
    TimeMap map;
    Ramp ramp;
};

OptimizedRamp optimize_ramp(const CouplingTable& table, const PulseShape& shape, double T,
                            const ShapeOptions& opt = {});

}  // namespace chiptrap
