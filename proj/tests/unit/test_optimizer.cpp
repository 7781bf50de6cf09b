#include <cmath>
#include <complex>

#include "doctest.h"
#include "helpers.hpp"

#include "chiptrap/errors.hpp"
#include "chiptrap/optimizer.hpp"

using namespace chiptrap;
using cd = std::complex<double>;

namespace {

double blackman(double t) { return 1.0 / 0.42 * (0.42 - 0.5 * std::cos(2 * M_PI * t) + 0.08 * std::cos(4 * M_PI * t)); }

cd blackman_fourier(double w) {
    return testing::midpoint([w](double t) { return blackman(t) * std::exp(cd(0, w * t)); }, 0.0, 1.0, 20000);
}

CouplingTable table_from(const std::function<double(double)>& a, const std::function<double(double)>& dw) {
    std::vector<double> s, av, wv;
    for (int k = 0; k <= 200; ++k) {
        s.push_back(k / 200.0);
        av.push_back(a(s.back()));
        wv.push_back(dw(s.back()));
    }
    return CouplingTable(0, 2, s, av, wv);
}

}  // namespace

TEST_SUITE("optimizer") {

TEST_CASE("pulse shapes are normalised") {
    for (const char* name : {"blackman", "hann", "raised_cosine_squared"}) {
        const PulseShape u = shape_by_name(name);
        CHECK(u(0.0) == doctest::Approx(0.0));
        CHECK(u(1.0) == doctest::Approx(0.0));
        CHECK(testing::midpoint(u, 0.0, 1.0, 10000) == doctest::Approx(1.0).epsilon(1e-9));
    }
    CHECK(blackman_shape()(0.3) == doctest::Approx(blackman(0.3)));
    CHECK_THROWS_AS(shape_by_name("gaussian"), InputError);
    CHECK_THROWS_AS(PulseShape("bad", [](double t) { return std::sin(2 * M_PI * t) + 1e-3; }), InputError);
}

TEST_CASE("constant coupling gives the cumulative pulse") {
    const ShapeSolution sol = solve_shape(testing::constant_table(0.8, 1000.0), blackman_shape());
    CHECK(sol.amplitude == doctest::Approx(0.8).epsilon(1e-6));
    CHECK(sol.s.front() == 0.0);
    CHECK(sol.s.back() == 1.0);
    for (std::size_t k = 0; k < sol.tau.size(); k += 250) {
        const double cum = testing::midpoint(blackman, 0.0, sol.tau[k], 4000);
        CHECK(sol.s[k] == doctest::Approx(cum).epsilon(1e-6));
    }
}

TEST_CASE("amplitude equals the integrated coupling") {
    const auto t = table_from([](double s) { return 1.0 + s * s; }, [](double) { return 1500.0; });
    const ShapeSolution sol = solve_shape(t, hann_shape());
    CHECK(sol.amplitude == doctest::Approx(4.0 / 3.0).epsilon(1e-5));
    CHECK(sol.endpoint_residual < 1e-7);
    // u = a ds/dtau reproduces the requested shape
    for (std::size_t k = 0; k < sol.tau.size(); k += 400)
        CHECK(sol.u[k] == doctest::Approx(sol.amplitude * hann_shape()(sol.tau[k])).epsilon(1e-4));
}

TEST_CASE("s(tau) is monotone even where the coupling is small") {
    const auto t = table_from([](double s) { return std::exp(-50 * (s - 0.5) * (s - 0.5)); }, [](double) { return 800.0; });
    const ShapeSolution sol = solve_shape(t, blackman_shape());
    for (std::size_t k = 1; k < sol.s.size(); ++k) CHECK(sol.s[k] >= sol.s[k - 1]);
}

TEST_CASE("time map for a constant gap") {
    const double dw = 1234.0;
    const auto t = testing::constant_table(0.5, dw);
    const TimeMap m = solve_timemap(t, solve_shape(t, blackman_shape()));
    CHECK(m.T0 == doctest::Approx(1.0 / dw).epsilon(1e-10));
    for (std::size_t k = 0; k < m.tau.size(); k += 500) CHECK(m.t[k] == doctest::Approx(m.tau[k] / dw).epsilon(1e-9));
    CHECK(m.tau_of_t(0.25 / dw) == doctest::Approx(0.25).epsilon(1e-9));
}

TEST_CASE("closed gap is refused") {
    const auto t = table_from([](double) { return 1.0; }, [](double s) { return 1000.0 * (s - 0.5); });
    const ShapeSolution sol = solve_shape(t, blackman_shape());
    CHECK_THROWS_AS(solve_timemap(t, sol), GapClosedError);
}

TEST_CASE("composed ramp endpoints") {
    const auto t = table_from([](double s) { return 0.5 + s; }, [](double s) { return 1000.0 + 500 * s; });
    const OptimizedRamp o = optimize_ramp(t, blackman_shape(), 0.03);
    CHECK(o.ramp.value(0.0) == 0.0);
    CHECK(o.ramp.value(0.03) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::abs(o.ramp.rate(0.0)) < 1e-6);
    CHECK(std::abs(o.ramp.rate(0.03)) < 1e-6);
    const Ramp back = o.ramp.reversed();
    CHECK(back.value(0.0) == doctest::Approx(1.0));
    CHECK(back.value(0.01) == doctest::Approx(o.ramp.value(0.02)).epsilon(1e-12));
    const auto samples = o.ramp.sample(101);
    for (std::size_t k = 1; k < samples.size(); ++k) CHECK(samples[k].second >= samples[k - 1].second);
}

TEST_CASE("transition amplitude is the Fourier transform of the pulse") {
    const double a = 0.9, dw = units::hz_to_rad(200.0);
    const auto t = testing::constant_table(a, dw);
    for (double T : {0.005, 0.012, 0.03}) {
        const OptimizedRamp o = optimize_ramp(t, blackman_shape(), T);
        const TransitionResult r = transition_amplitude(t, o.ramp);
        const cd oracle = a * blackman_fourier(dw * T);
        CHECK(std::abs(std::abs(r.amplitude) - std::abs(oracle)) < 1e-7);
        const cd pred = predict_amplitude_fourier(o.shape, T, o.map.T0);
        CHECK(std::abs(std::abs(pred) - std::abs(oracle)) < 1e-7);
    }
}

TEST_CASE("amplitude depends on T / T0 only") {
    const auto t1 = testing::constant_table(0.6, 1000.0);
    const auto t2 = testing::constant_table(0.6, 2000.0);
    const auto r1 = transition_amplitude(t1, optimize_ramp(t1, blackman_shape(), 0.02).ramp);
    const auto r2 = transition_amplitude(t2, optimize_ramp(t2, blackman_shape(), 0.01).ramp);
    CHECK(std::abs(r1.amplitude) == doctest::Approx(std::abs(r2.amplitude)).epsilon(1e-6));
}

TEST_CASE("shaped ramp beats the linear ramp at long durations") {
    const auto t = testing::constant_table(0.6, units::hz_to_rad(200.0));
    const OptimizedRamp o = optimize_ramp(t, blackman_shape(), 0.05);
    // durations off the zeros of the linear-ramp sinc
    for (double T : {0.0312, 0.0537, 0.0811}) {
        const double p_lin = transition_amplitude(t, Ramp::linear(T)).probability;
        const double p_opt = transition_amplitude(t, o.ramp.with_duration(T)).probability;
        CHECK(p_opt < 1e-3 * p_lin);
    }
}

}
