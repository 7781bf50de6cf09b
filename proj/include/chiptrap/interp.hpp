#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace chiptrap {

// Natural cubic spline through (x_i, y_i), x strictly increasing.
// Evaluation outside [x_0, x_n] extrapolates with the end polynomial.
class CubicSpline {
public:
    CubicSpline() = default;
    CubicSpline(std::vector<double> x, std::vector<double> y);

    double operator()(double x) const;
    double derivative(double x) const;

    const std::vector<double>& nodes() const { return x_; }
    const std::vector<double>& values() const { return y_; }
    bool empty() const { return x_.empty(); }

private:
    std::size_t interval(double x) const;

    std::vector<double> x_;
    std::vector<double> y_;
    std::vector<double> m_;  // second derivatives at the nodes
};

// Piecewise cubic Hermite interpolant with prescribed slopes.
class HermiteTable {
public:
    HermiteTable() = default;
    HermiteTable(std::vector<double> x, std::vector<double> y, std::vector<double> dydx);

    double operator()(double x) const;
    double derivative(double x) const;

    const std::vector<double>& nodes() const { return x_; }
    const std::vector<double>& values() const { return y_; }
    const std::vector<double>& slopes() const { return d_; }

private:
    std::size_t interval(double x) const;

    std::vector<double> x_;
    std::vector<double> y_;
    std::vector<double> d_;
};

// Locate i with x[i] <= v < x[i+1], clamped to [0, n-2].
std::size_t bracket(std::span<const double> x, double v);

double linear_interp(std::span<const double> x, std::span<const double> y, double v);

}  // namespace chiptrap
