#include "chiptrap/ramp.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "chiptrap/errors.hpp"
#include "chiptrap/units.hpp"

namespace chiptrap {

namespace {

double simpson_unit(const std::function<double(double)>& f, int intervals) {
    const double h = 1.0 / intervals;
    double acc = f(0.0) + f(1.0);
    for (int k = 1; k < intervals; ++k) acc += (k % 2 ? 4.0 : 2.0) * f(k * h);
    return acc * h / 3.0;
}

}  // namespace

PulseShape::PulseShape(std::string name, std::function<double(double)> fn)
    : name_(std::move(name)), fn_(std::move(fn)) {
    if (!fn_) throw InputError("PulseShape: empty function");
    const double u0 = fn_(0.0), u1 = fn_(1.0);
    if (std::abs(u0) > 1e-12 || std::abs(u1) > 1e-12)
        throw InputError("PulseShape '" + name_ + "': shape must vanish at both ends");
    for (int k = 0; k <= 1000; ++k)
        if (fn_(k / 1000.0) < -1e-12) throw InputError("PulseShape '" + name_ + "': shape must be non-negative");
    const double area = simpson_unit(fn_, 2048);
    if (std::abs(area - 1.0) > 1e-10)
        throw InputError("PulseShape '" + name_ + "': shape must integrate to 1");
}

PulseShape blackman_shape() {
    return PulseShape("blackman", [](double tau) {
        using units::two_pi;
        return 1.0 - (25.0 / 21.0) * std::cos(two_pi * tau) + (4.0 / 21.0) * std::cos(2.0 * two_pi * tau);
    });
}

PulseShape hann_shape() {
    return PulseShape("hann", [](double tau) { return 1.0 - std::cos(units::two_pi * tau); });
}

PulseShape raised_cosine_squared_shape() {
    return PulseShape("raised_cosine_squared", [](double tau) {
        const double c = 1.0 - std::cos(units::two_pi * tau);
        return c * c / 1.5;
    });
}

PulseShape shape_by_name(const std::string& name) {
    if (name == "blackman") return blackman_shape();
    if (name == "hann") return hann_shape();
    if (name == "raised_cosine_squared") return raised_cosine_squared_shape();
    throw InputError("unknown pulse shape '" + name + "'");
}

Ramp Ramp::linear(double T) {
    if (!(T > 0.0) || !std::isfinite(T)) throw InputError("linear ramp: duration must be positive");
    Ramp r;
    r.kind_ = Kind::Linear;
    r.T_ = T;
    return r;
}

Ramp Ramp::optimized(double T, HermiteTable unit_profile, OptimizedProvenance provenance) {
    if (!(T > 0.0) || !std::isfinite(T)) throw InputError("optimized ramp: duration must be positive");
    const auto& x = unit_profile.nodes();
    const auto& y = unit_profile.values();
    if (std::abs(x.front()) > 1e-12 || std::abs(x.back() - 1.0) > 1e-12)
        throw InputError("optimized ramp: profile must span [0, 1]");
    if (y.front() != 0.0 || y.back() != 1.0)
        throw InputError("optimized ramp: profile must run exactly from 0 to 1");
    for (std::size_t k = 1; k < y.size(); ++k)
        if (y[k] < y[k - 1]) throw InputError("optimized ramp: profile must be monotone");
    Ramp r;
    r.kind_ = Kind::Optimized;
    r.T_ = T;
    r.profile_ = std::make_shared<const HermiteTable>(std::move(unit_profile));
    r.provenance_ = std::make_shared<const OptimizedProvenance>(std::move(provenance));
    return r;
}

double Ramp::unit_value(double theta) const {
    theta = std::clamp(theta, 0.0, 1.0);
    if (kind_ == Kind::Linear) return theta;
    if (theta == 0.0) return 0.0;
    if (theta == 1.0) return 1.0;
    return std::clamp((*profile_)(theta), 0.0, 1.0);
}

double Ramp::unit_slope(double theta) const {
    if (kind_ == Kind::Linear) return 1.0;
    return profile_->derivative(std::clamp(theta, 0.0, 1.0));
}

double Ramp::value(double t) const {
    const double theta = t / T_;
    return reversed_ ? unit_value(1.0 - theta) : unit_value(theta);
}

double Ramp::rate(double t) const {
    const double theta = t / T_;
    return reversed_ ? -unit_slope(1.0 - theta) / T_ : unit_slope(theta) / T_;
}

Ramp Ramp::with_duration(double T) const {
    if (!(T > 0.0) || !std::isfinite(T)) throw InputError("ramp: duration must be positive");
    Ramp r = *this;
    r.T_ = T;
    return r;
}

Ramp Ramp::reversed() const {
    Ramp r = *this;
    r.reversed_ = !reversed_;
    return r;
}

std::string Ramp::label() const {
    std::ostringstream os;
    os << (kind_ == Kind::Linear ? "linear" : "optimized");
    if (provenance_) os << ":" << provenance_->shape;
    if (reversed_) os << ":reversed";
    return os.str();
}

std::vector<std::pair<double, double>> Ramp::sample(int n) const {
    if (n < 2) throw InputError("ramp sample: need at least two points");
    std::vector<std::pair<double, double>> out(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) {
        const double t = k == n - 1 ? T_ : T_ * k / (n - 1);
        out[static_cast<std::size_t>(k)] = {t, value(t)};
    }
    return out;
}

std::vector<std::pair<double, double>> Ramp::nodes() const {
    if (kind_ == Kind::Linear) return sample(2);
    const auto& th = profile_->nodes();
    std::vector<std::pair<double, double>> out;
    out.reserve(th.size());
    for (double theta : th) {
        const double t = reversed_ ? T_ * (1.0 - theta) : T_ * theta;
        out.emplace_back(t, value(t));
    }
    if (reversed_) std::reverse(out.begin(), out.end());
    return out;
}

}  // namespace chiptrap
