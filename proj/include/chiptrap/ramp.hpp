#pragma once

#include <functional>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "chiptrap/interp.hpp"

namespace chiptrap {

// Normalised coupling shape on [0, 1]: u(0) = u(1) = 0, u >= 0, integral 1.
class PulseShape {
public:
    PulseShape(std::string name, std::function<double(double)> fn);

    const std::string& name() const { return name_; }
    double operator()(double tau) const { return fn_(tau); }

private:
    std::string name_;
    std::function<double(double)> fn_;
};

PulseShape blackman_shape();
PulseShape hann_shape();
PulseShape raised_cosine_squared_shape();
// Lookup by name: "blackman", "hann", "raised_cosine_squared".
PulseShape shape_by_name(const std::string& name);

// Provenance of an optimised schedule.
struct OptimizedProvenance {
    std::string shape;
    int pair_i = 0;
    int pair_f = 2;
    double amplitude = 0.0;       // A in u(tau) = A * u_hat(tau)
    double T0 = 0.0;              // s
    double floor_fraction = 0.0;  // |a| floor used in the shape equation
    std::vector<double> tau;
    std::vector<double> s_tau;
    std::vector<double> t_of_tau;  // s, on [0, T0]
};

// Monotone control schedule s(t) on [0, T] with s(0) = 0 and s(T) = 1
// (or the reverse). The shape does not depend on T: s(t, T) = s(t / T, 1).
class Ramp {
public:
    enum class Kind { Linear, Optimized };

    static Ramp linear(double T);
    // Unit profile s(theta), theta = t / T in [0, 1], with its derivative.
    static Ramp optimized(double T, HermiteTable unit_profile, OptimizedProvenance provenance);

    Kind kind() const { return kind_; }
    double duration() const { return T_; }
    bool is_reversed() const { return reversed_; }

    double value(double t) const;  // s(t)
    double rate(double t) const;   // ds/dt

    Ramp with_duration(double T) const;
    Ramp reversed() const;

    const OptimizedProvenance* provenance() const { return provenance_.get(); }
    std::string label() const;

    // (t, s) pairs at n uniformly spaced times, endpoints exact.
    std::vector<std::pair<double, double>> sample(int n) const;
    // Nodes of the underlying unit profile, mapped to time (t, s).
    std::vector<std::pair<double, double>> nodes() const;

private:
    Ramp() = default;
    double unit_value(double theta) const;
    double unit_slope(double theta) const;

    Kind kind_ = Kind::Linear;
    double T_ = 1.0;
    bool reversed_ = false;
    std::shared_ptr<const HermiteTable> profile_;
    std::shared_ptr<const OptimizedProvenance> provenance_;
};

}  // namespace chiptrap
