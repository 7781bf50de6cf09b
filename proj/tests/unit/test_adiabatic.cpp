#include <cmath>
#include <complex>

#include "doctest.h"
#include "helpers.hpp"

#include "chiptrap/errors.hpp"

using namespace chiptrap;
using cd = std::complex<double>;

namespace {

double omega_of(double s) { return units::hz_to_rad(200.0 * (1.0 + 0.5 * s)); }

const EigenBundle& harmonic() {
    static const EigenBundle b =
        testing::harmonic_bundle(omega_of, uniform_s_grid(41), symmetric_grid(7.0, 1024), 4);
    return b;
}

}  // namespace

TEST_SUITE("adiabatic") {

TEST_CASE("coupling of a breathing harmonic trap") {
    // <2| d/ds |0> for a squeezed oscillator: sqrt(2) omega' / (4 omega)
    for (double s : {0.2, 0.5, 0.8}) {
        const double wp = units::hz_to_rad(100.0);
        const double expected = std::sqrt(2.0) * wp / (4.0 * omega_of(s));
        const CouplingValue v = coupling_coefficient(harmonic(), 0, 2, s);
        CHECK(std::abs(v.value) == doctest::Approx(expected).epsilon(0.01));
        REQUIRE(std::isfinite(v.hellmann_feynman));
        CHECK(v.hellmann_feynman == doctest::Approx(v.value).epsilon(0.01));
    }
}

TEST_CASE("coupling is antisymmetric") {
    for (double s : {0.1, 0.55}) {
        CHECK(coupling_coefficient(harmonic(), 0, 2, s).value ==
              doctest::Approx(-coupling_coefficient(harmonic(), 2, 0, s).value).epsilon(1e-12));
    }
}

TEST_CASE("opposite parities do not couple in a symmetric trap") {
    const CouplingTable t01 = build_coupling_table(harmonic(), 0, 1);
    const CouplingTable t02 = build_coupling_table(harmonic(), 0, 2);
    CHECK(t01.max_abs_a() < 1e-9 * t02.max_abs_a());
}

TEST_CASE("gap column") {
    const CouplingTable t = build_coupling_table(harmonic(), 0, 2);
    for (std::size_t j = 0; j < t.s().size(); ++j)
        CHECK(t.domega()[j] == doctest::Approx(2.0 * omega_of(t.s()[j])).epsilon(1e-3));
}

TEST_CASE("zero coupling gives no excitation") {
    const TransitionResult r = transition_amplitude(testing::constant_table(0.0, 1000.0), Ramp::linear(0.05));
    CHECK(r.probability == 0.0);
}

TEST_CASE("linear ramp through a constant coupling") {
    const double a = 0.7, dw = units::hz_to_rad(200.0);
    for (double T : {0.01, 0.037, 0.1}) {
        const cd exact = a * (std::exp(cd(0, dw * T)) - 1.0) / cd(0, dw * T);
        const TransitionResult r = transition_amplitude(testing::constant_table(a, dw), Ramp::linear(T));
        CHECK(std::abs(r.amplitude - exact) < 1e-7 * std::abs(exact) + 1e-10);
        CHECK(r.probability == doctest::Approx(std::norm(exact)).epsilon(1e-6));
        CHECK(r.samples_per_period >= 20.0);
    }
}

TEST_CASE("tighter tolerance refines further") {
    const auto t = testing::constant_table(0.7, 1234.0);
    QuadratureOptions loose, tight;
    loose.rtol = 1e-3;
    tight.rtol = 1e-9;
    const auto a = transition_amplitude(t, Ramp::linear(0.08), loose);
    const auto b = transition_amplitude(t, Ramp::linear(0.08), tight);
    CHECK(b.samples >= a.samples);
    CHECK(std::abs(a.amplitude - b.amplitude) < 1e-3 * std::abs(b.amplitude));
}

TEST_CASE("probability flag above 0.1") {
    const auto r = transition_amplitude(testing::constant_table(2.0, 100.0), Ramp::linear(0.001));
    CHECK(r.probability > 0.1);
    CHECK(r.outside_first_order);
}

TEST_CASE("duration sweep matches single evaluations") {
    const auto t = testing::constant_table(0.3, 2000.0);
    const std::vector<double> T{0.01, 0.02, 0.05};
    const auto sweep = sweep_duration(t, Ramp::linear(1.0), T, 2);
    for (std::size_t k = 0; k < T.size(); ++k)
        CHECK(sweep[k].amplitude == transition_amplitude(t, Ramp::linear(T[k])).amplitude);
    CHECK_THROWS_AS(sweep_duration(t, Ramp::linear(1.0), {0.02, 0.01}), InputError);
    CHECK_THROWS_AS(sweep_duration(t, Ramp::linear(1.0), {-0.01}), InputError);
}

TEST_CASE("gradient dephasing") {
    // 1 G/cm across 6 um for 60 ms: 1.4 MHz/G * 6e-4 G * 0.06 s = 50.4 cycles
    CHECK(gradient_dephasing(6.0, 1.0, 0.06) == doctest::Approx(2 * M_PI * 50.4).epsilon(1e-12));
    CHECK(gradient_dephasing(3.0, 2.0, 0.06) == doctest::Approx(2 * M_PI * 50.4).epsilon(1e-12));
    CHECK_THROWS_AS(gradient_dephasing(6.0, -1.0, 0.06), InputError);
    CHECK(gradient_dephasing(0.0, 1.0, 0.06) == 0.0);
}

}
