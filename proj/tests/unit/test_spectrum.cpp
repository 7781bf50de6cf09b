#include <cmath>

#include "doctest.h"
#include "helpers.hpp"

#include "chiptrap/errors.hpp"

using namespace chiptrap;

namespace {

double max_harmonic_error(int points) {
    const double w = units::hz_to_rad(200.0);
    const auto c = testing::curve_from(0.0, symmetric_grid(8.0, points), [w](double x) { return testing::harmonic_u(w, x); });
    const EigenSet e = solve_stationary(c, 6);
    double err = 0.0;
    for (int n = 0; n < 6; ++n) err = std::max(err, std::abs(e.energies[n] / ((n + 0.5) * w) - 1.0));
    return err;
}

}  // namespace

TEST_SUITE("spectrum") {

TEST_CASE("harmonic levels") {
    CHECK(max_harmonic_error(2048) < 1e-3);
}

TEST_CASE("discretisation error is second order") {
    const double e1 = max_harmonic_error(256), e2 = max_harmonic_error(512);
    CHECK(e1 / e2 == doctest::Approx(4.0).epsilon(0.1));
}

TEST_CASE("square well with walls one node beyond the grid") {
    const int N = 1024;
    const auto x = symmetric_grid(5.0, N);
    const double h = x[1] - x[0];
    const double L = (N + 1) * h;
    const auto c = testing::curve_from(0.0, x, [](double) { return 0.0; });
    SolverOptions opt;
    opt.check_boundary = false;
    const EigenSet e = solve_stationary(c, 6, units::rb87_mass, opt);
    const double K = units::hbar / (2 * units::rb87_mass) * 1e12;
    for (int n = 0; n < 6; ++n) {
        const double k = M_PI * (n + 1) / L;
        // exact eigenvalues of the three-point Laplacian on N interior nodes
        const double discrete = K * 2.0 * (1.0 - std::cos(k * h)) / (h * h);
        CHECK(e.energies[n] == doctest::Approx(discrete).epsilon(1e-9));
        CHECK(e.energies[n] == doctest::Approx(K * k * k).epsilon(1e-2));
    }
}

TEST_CASE("states are normalised and labelled by parity") {
    const double w = units::hz_to_rad(150.0);
    const auto c = testing::curve_from(0.0, symmetric_grid(8.0, 512), [w](double x) { return testing::harmonic_u(w, x); });
    const EigenSet e = solve_stationary(c, 6);
    for (int n = 0; n < 6; ++n) {
        CHECK(overlap(e.states[n], e.states[n], e.spacing()) == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(e.parity[n] == (n % 2 ? Parity::Odd : Parity::Even));
        CHECK(parity_of(e.states[n], e.x_um) == e.parity[n]);
    }
    CHECK(std::abs(overlap(e.states[0], e.states[2], e.spacing())) < 1e-12);
}

TEST_CASE("parity of simple functions") {
    const auto x = symmetric_grid(4.0, 200);
    std::vector<double> even, odd, lopsided;
    for (double xi : x) {
        even.push_back(std::exp(-xi * xi));
        odd.push_back(xi * std::exp(-xi * xi));
        lopsided.push_back(std::exp(-(xi - 1) * (xi - 1)));
    }
    CHECK(parity_of(even, x) == Parity::Even);
    CHECK(parity_of(odd, x) == Parity::Odd);
    CHECK_THROWS_AS(parity_of(lopsided, x), ParityError);
}

TEST_CASE("origin gauge") {
    const double w = units::hz_to_rad(200.0);
    const auto c = testing::curve_from(0.0, symmetric_grid(6.0, 256), [w](double x) { return testing::harmonic_u(w, x); });
    EigenSet e = solve_stationary(c, 4);
    for (auto& phi : e.states)
        for (double& v : phi) v = -v;
    apply_origin_gauge(e);
    const std::size_t mid = e.x_um.size() / 2;  // first node with x > 0
    CHECK(e.states[0][mid] > 0.0);
    CHECK(e.states[2][mid] > 0.0);
    CHECK(e.states[1][mid] - e.states[1][mid - 1] > 0.0);
    CHECK(e.states[3][mid] - e.states[3][mid - 1] > 0.0);
}

TEST_CASE("gauge fixing is idempotent and continuous") {
    auto b = testing::harmonic_bundle([](double s) { return units::hz_to_rad(200.0 * (1 + 0.3 * s)); },
                                      uniform_s_grid(11), symmetric_grid(6.0, 256));
    const auto states = b.sets;
    fix_gauge(b);
    for (std::size_t j = 0; j < states.size(); ++j) CHECK(b.sets[j].states == states[j].states);
    for (const auto& f : b.gauge_flips)
        for (int v : f) CHECK(v == 1);
    CHECK(adjacent_overlaps(b).min_overlap > 0.9);
}

TEST_CASE("uniform s grid") {
    const auto s = uniform_s_grid(5);
    CHECK(s == std::vector<double>{0.0, 0.25, 0.5, 0.75, 1.0});
    CHECK_THROWS_AS(uniform_s_grid(1), InputError);
}

TEST_CASE("trap spectrum sweep") {
    SweepOptions opt;
    opt.grid.points = 512;
    opt.n_states = 4;
    const EigenBundle b = sweep_spectrum(testing::calibrated_trap(), uniform_s_grid(21), opt);
    CHECK(b.n_states() == 4);
    CHECK(adjacent_overlaps(b).min_overlap > 0.9);
    // the doublets close up as the barrier rises
    const auto& last = b.sets.back().energies;
    CHECK((last[1] - last[0]) / (last[2] - last[0]) < 0.02);
    CHECK((last[3] - last[2]) / (last[2] - last[0]) < 0.02);
    for (const auto& set : b.sets)
        for (std::size_t n = 0; n < set.size(); ++n) CHECK(set.parity[n] == (n % 2 ? Parity::Odd : Parity::Even));
}

}
