#include <cmath>
#include <complex>

#include "doctest.h"
#include "helpers.hpp"

#include "chiptrap/errors.hpp"
#include "chiptrap/tdse.hpp"

using namespace chiptrap;
using cd = std::complex<double>;

namespace {

const double w0 = units::hz_to_rad(200.0);

// Harmonic trap whose frequency grows by half across s.
PotentialSchedule breathing(const std::vector<double>& x) {
    std::vector<double> s{0.0, 0.5, 1.0};
    std::vector<std::vector<double>> U;
    for (double sv : s) {
        std::vector<double> row;
        for (double xi : x) row.push_back(testing::harmonic_u(w0 * (1 + 0.5 * sv), xi));
        U.push_back(row);
    }
    return PotentialSchedule(s, x, U, units::rb87_mass);
}

EigenSet eigen(const std::vector<double>& x, double omega, int n = 4) {
    return solve_stationary(testing::curve_from(0.0, x, [omega](double xi) { return testing::harmonic_u(omega, xi); }), n);
}

cd inner(const WavefunctionState& a, const WavefunctionState& b) {
    cd sum = 0.0;
    for (std::size_t k = 0; k < a.psi.size(); ++k) sum += std::conj(a.psi[k]) * b.psi[k];
    return sum * (a.x_um[1] - a.x_um[0]);
}

}  // namespace

TEST_SUITE("tdse") {

TEST_CASE("stationary state only acquires its phase") {
    const auto x = symmetric_grid(6.0, 256);
    const auto sch = breathing(x);
    const EigenSet e = eigen(x, w0);
    const auto psi0 = WavefunctionState::from_real(x, e.states[0]);
    const double T = 0.005;
    const auto psi = propagate_static(sch, 0.0, T, psi0);
    const cd ov = inner(psi0, psi);
    CHECK(std::abs(ov) == doctest::Approx(1.0).epsilon(1e-8));
    // e^{-i omega T / 2}, modulo 2 pi
    const double expected = std::remainder(-0.5 * w0 * T, 2 * M_PI);
    CHECK(std::abs(std::remainder(std::arg(ov) - expected, 2 * M_PI)) < 2e-3 * 0.5 * w0 * T);
    CHECK(psi.t == doctest::Approx(T));
}

TEST_CASE("displaced packet oscillates at the trap frequency") {
    const auto x = symmetric_grid(8.0, 512);
    const auto sch = breathing(x);
    const double sigma2 = units::hbar / (units::rb87_mass * w0) * 1e12;
    const double shift = 1.0;
    std::vector<double> phi(x.size());
    for (std::size_t k = 0; k < x.size(); ++k) {
        const double xs = x[k] - shift;
        phi[k] = std::exp(-0.5 * xs * xs / sigma2);
    }
    double n2 = 0;
    for (double v : phi) n2 += v * v;
    for (double& v : phi) v /= std::sqrt(n2 * (x[1] - x[0]));
    auto psi = WavefunctionState::from_real(x, phi);
    const double period = 2 * M_PI / w0;
    auto mean_x = [&](const WavefunctionState& s) {
        double m = 0;
        for (std::size_t k = 0; k < x.size(); ++k) m += x[k] * std::norm(s.psi[k]);
        return m * (x[1] - x[0]);
    };
    CHECK(mean_x(psi) == doctest::Approx(shift).epsilon(1e-6));
    const auto quarter = propagate_static(sch, 0.0, period / 4, psi);
    CHECK(std::abs(mean_x(quarter)) < 0.02 * shift);
    const auto half = propagate_static(sch, 0.0, period / 4, quarter);
    CHECK(mean_x(half) == doctest::Approx(-shift).epsilon(0.02));
}

TEST_CASE("norm is conserved through a ramp") {
    const auto x = symmetric_grid(6.0, 256);
    const auto sch = breathing(x);
    const auto psi = propagate(sch, Ramp::linear(0.003), WavefunctionState::from_real(x, eigen(x, w0).states[0]));
    CHECK(std::abs(psi.norm() - 1.0) < 1e-10);
}

TEST_CASE("slow ramp follows the instantaneous ground state") {
    const auto x = symmetric_grid(6.0, 256);
    const auto sch = breathing(x);
    const auto psi = propagate(sch, Ramp::linear(0.02), WavefunctionState::from_real(x, eigen(x, w0).states[0]));
    const Populations p = project_populations(psi, eigen(x, 1.5 * w0));
    CHECK(p.P[0] > 0.999);
    CHECK(p.P[1] < 1e-20);
}

TEST_CASE("reversed ramp undoes the conjugated evolution") {
    const auto x = symmetric_grid(6.0, 256);
    const auto sch = breathing(x);
    const auto psi0 = WavefunctionState::from_real(x, eigen(x, w0).states[0]);
    const Ramp r = Ramp::linear(0.0008);
    auto fwd = propagate(sch, r, psi0);
    for (auto& v : fwd.psi) v = std::conj(v);
    fwd.t = 0.0;
    const auto back = propagate(sch, r.reversed(), fwd);
    CHECK(std::abs(inner(psi0, back)) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("projection onto a basis") {
    const auto x = symmetric_grid(6.0, 256);
    const EigenSet e = eigen(x, w0);
    std::vector<double> mix(x.size());
    for (std::size_t k = 0; k < x.size(); ++k) mix[k] = (e.states[0][k] + e.states[1][k]) / std::sqrt(2.0);
    const Populations p = project_populations(WavefunctionState::from_real(x, mix), e);
    CHECK(p.P[0] == doctest::Approx(0.5).epsilon(1e-10));
    CHECK(p.P[1] == doctest::Approx(0.5).epsilon(1e-10));
    CHECK(std::abs(p.residual) < 1e-10);
    CHECK(p.warnings.empty());

    const EigenSet small = eigen(x, w0, 1);
    const Populations q = project_populations(WavefunctionState::from_real(x, mix), small);
    CHECK(q.residual == doctest::Approx(0.5).epsilon(1e-10));
    CHECK_FALSE(q.warnings.empty());
}

TEST_CASE("schedule interpolates in s") {
    const auto x = symmetric_grid(4.0, 16);
    std::vector<std::vector<double>> U{std::vector<double>(16, 0.0), std::vector<double>(16, 0.0), std::vector<double>(16, 0.0)};
    for (int k = 0; k < 16; ++k) {
        U[0][k] = 10.0 * k;
        U[1][k] = 20.0 * k;
        U[2][k] = 30.0 * k;
    }
    const PotentialSchedule sch({0.0, 0.5, 1.0}, x, U, units::rb87_mass);
    std::vector<double> out;
    sch.evaluate(0.25, out);
    for (int k = 0; k < 16; ++k) CHECK(out[k] == doctest::Approx(15.0 * k));
    CHECK(sch.max_potential() == doctest::Approx(450.0));
}

TEST_CASE("bad inputs are refused") {
    const auto x = symmetric_grid(6.0, 128);
    const auto sch = breathing(x);
    auto psi0 = WavefunctionState::from_real(x, eigen(x, w0).states[0]);
    PropagationOptions opt;
    opt.dt = 10.0 * max_time_step(sch);
    CHECK_THROWS_AS(propagate(sch, Ramp::linear(0.001), psi0, opt), InputError);
    for (auto& v : psi0.psi) v *= 2.0;
    CHECK_THROWS_AS(propagate(sch, Ramp::linear(0.001), psi0), InputError);
}

TEST_CASE("imprinted phase on a symmetric state") {
    const auto x = symmetric_grid(6.0, 256);
    const auto sch = breathing(x);
    const EigenSet e = eigen(x, w0);
    const auto psi0 = WavefunctionState::from_real(x, e.states[0]);
    const Ramp r = Ramp::linear(0.002);
    HoldStage hold;
    hold.dphi = 0.0;
    const CycleResult c0 = interferometer_cycle(sch, r, hold, nullptr, psi0, e);
    CHECK(c0.populations.P[0] > 0.99);
    CHECK(c0.leakage == doctest::Approx(1.0 - c0.populations.P[0] - c0.populations.P[1]));
    hold.dphi = M_PI;
    const CycleResult c1 = interferometer_cycle(sch, r, hold, nullptr, psi0, e);
    // pi on one half makes the state odd
    CHECK(c1.populations.P[0] + c1.populations.P[2] < 1e-10);
    CHECK(c1.populations.P[1] > 0.3);
}

}
