#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include "chiptrap/adiabatic.hpp"
#include "chiptrap/spectrum.hpp"
#include "chiptrap/trap.hpp"
#include "chiptrap/units.hpp"

namespace testing {

using namespace chiptrap;

// Geometry fitted to the 190 Hz / 240 Hz / 35 um targets.
inline TrapConfig calibrated_trap() {
    TrapConfig c;
    c.d_ext_um = 18.180352640232147;
    c.crossing_height_um = 13.635973239119437;
    c.ic_height_offset_um = 5.8253434118247949;
    return c;
}

// 1/2 m w^2 x^2 / hbar in rad/s, x in um.
inline double harmonic_u(double omega, double x_um, double mass = units::rb87_mass) {
    const double x = x_um * 1e-6;
    return 0.5 * mass * omega * omega * x * x / units::hbar;
}

inline PotentialCurve curve_from(double s, const std::vector<double>& x, const std::function<double(double)>& U) {
    PotentialCurve c;
    c.s = s;
    c.x_um = x;
    for (double xi : x) c.U.push_back(U(xi));
    c.bmin_G.assign(x.size(), 0.0);
    c.y_um.assign(x.size(), 0.0);
    c.z_um.assign(x.size(), 0.0);
    locate_wells(c);
    return c;
}

// Bundle of harmonic traps with frequency omega(s).
inline EigenBundle harmonic_bundle(const std::function<double(double)>& omega, const std::vector<double>& s_grid,
                                   const std::vector<double>& x, int n_states = 4) {
    EigenBundle b;
    b.s_grid = s_grid;
    for (double s : s_grid) {
        const double w = omega(s);
        b.curves.push_back(curve_from(s, x, [w](double xi) { return harmonic_u(w, xi); }));
        b.sets.push_back(solve_stationary(b.curves.back(), n_states));
    }
    fix_gauge(b);
    return b;
}

inline CouplingTable constant_table(double a, double domega, int points = 101) {
    std::vector<double> s, av, dw;
    for (int k = 0; k < points; ++k) {
        s.push_back(static_cast<double>(k) / (points - 1));
        av.push_back(a);
        dw.push_back(domega);
    }
    return CouplingTable(0, 2, s, av, dw);
}

// Midpoint-rule integral of f on [a, b].
template <class F>
auto midpoint(F f, double a, double b, int n) {
    const double h = (b - a) / n;
    decltype(f(a)) sum{};
    for (int k = 0; k < n; ++k) sum += f(a + (k + 0.5) * h);
    return sum * h;
}

}  // namespace testing
