#include "chiptrap/trap.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <sstream>

#include "chiptrap/errors.hpp"

namespace chiptrap {

namespace {

using cplx = std::complex<double>;

constexpr double min_wire_distance_um = 0.1;
constexpr double majorana_warning_G = 0.1;

// Field of an infinite thin wire in its transverse plane (a, b), with
// (a, b, wire direction) right handed: F_a + i F_b = i k / conj(w).
struct LineField {
    cplx g, ga, gaa;   // value, d/da, d2/da2
    cplx gb, gab, gbb;
};

LineField line_field(double k, double a, double b) {
    const cplx wb(a, -b);
    const cplx inv = 1.0 / wb;
    const cplx inv2 = inv * inv;
    const cplx inv3 = inv2 * inv;
    const cplx i(0.0, 1.0);
    return LineField{i * k * inv,  -i * k * inv2, 2.0 * i * k * inv3,
                     -k * inv2,    2.0 * k * inv3, -2.0 * i * k * inv3};
}

struct FieldJet {
    Vec3 b{};
    Vec3 by{}, bz{};
    Vec3 byy{}, byz{}, bzz{};
};

struct Wire {
    double x;
    double current_mA;
    double z;
};

std::array<Wire, 3> crossing_wires(const TrapConfig& cfg, double s) {
    return {Wire{-cfg.d_ext_um, -cfg.iext_mA(s), cfg.crossing_height_um},
            Wire{0.0, cfg.ic_mA(s), cfg.crossing_height_um + cfg.ic_height_offset_um},
            Wire{cfg.d_ext_um, -cfg.iext_mA(s), cfg.crossing_height_um}};
}

void check_finite(const TrapConfig& cfg, double s, const Vec3& r) {
    if (!std::isfinite(s) || !std::isfinite(r[0]) || !std::isfinite(r[1]) || !std::isfinite(r[2]))
        throw InputError("field evaluation: non-finite s or position");
    (void)cfg;
}

void check_wire_distance(const TrapConfig& cfg, const Vec3& r) {
    const double dc = std::hypot(r[1], r[2]);
    if (dc <= min_wire_distance_um)
        throw SingularityError("field evaluation on the central wire axis");
    for (const Wire& w : crossing_wires(cfg, 0.0)) {
        if (std::hypot(r[0] - w.x, r[2] - w.z) <= min_wire_distance_um)
            throw SingularityError("field evaluation on a crossing wire axis");
    }
}

FieldJet field_jet(const TrapConfig& cfg, double s, double x, double y, double z) {
    constexpr double mu = units::wire_field_constant;
    FieldJet j;
    j.b = {cfg.b0x_G, cfg.b0y_G, 0.0};

    // Central wire along +x: (a, b) = (y, z) -> (B_y, B_z).
    {
        const LineField f = line_field(mu * cfg.i0_mA, y, z);
        j.b[1] += f.g.real();
        j.b[2] += f.g.imag();
        j.by[1] += f.ga.real();
        j.by[2] += f.ga.imag();
        j.bz[1] += f.gb.real();
        j.bz[2] += f.gb.imag();
        j.byy[1] += f.gaa.real();
        j.byy[2] += f.gaa.imag();
        j.byz[1] += f.gab.real();
        j.byz[2] += f.gab.imag();
        j.bzz[1] += f.gbb.real();
        j.bzz[2] += f.gbb.imag();
    }
    // Crossing wires along +y: (a, b) = (z - zc, x - xw) -> (B_z, B_x).
    for (const Wire& w : crossing_wires(cfg, s)) {
        const LineField f = line_field(mu * w.current_mA, z - w.z, x - w.x);
        j.b[2] += f.g.real();
        j.b[0] += f.g.imag();
        j.bz[2] += f.ga.real();
        j.bz[0] += f.ga.imag();
        j.bzz[2] += f.gaa.real();
        j.bzz[0] += f.gaa.imag();
    }
    return j;
}

double dot(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }

}  // namespace

void TrapConfig::validate() const {
    const double vals[] = {i0_mA,       b0y_G,       b0x_G,          iext_base_mA,   iext_slope_mA,
                           ic_base_mA,  ic_slope_mA, d_ext_um,       crossing_height_um,
                           scale_Hz_per_G, mass_kg};
    for (double v : vals)
        if (!std::isfinite(v)) throw InputError("trap config: non-finite parameter");
    if (!(b0y_G > 0.0)) throw InputError("trap config: B0y must be positive");
    if (!(d_ext_um > 0.0)) throw InputError("trap config: d_ext must be positive");
    if (!(scale_Hz_per_G > 0.0) || !(mass_kg > 0.0))
        throw InputError("trap config: potential scale and mass must be positive");
    for (double s : {0.0, 1.0}) {
        if (!(iext_mA(s) > 0.0) || !(ic_mA(s) > 0.0))
            throw InputError("trap config: Iext(s) and Ic(s) must be positive on [0, 1]");
    }
}

Vec3 field_at(const TrapConfig& cfg, double s, const Vec3& r_um) {
    check_finite(cfg, s, r_um);
    check_wire_distance(cfg, r_um);
    return field_jet(cfg, s, r_um[0], r_um[1], r_um[2]).b;
}

TransverseMinimum transverse_minimum(const TrapConfig& cfg, double s, double x_um,
                                     std::optional<std::array<double, 2>> seed) {
    std::array<double, 2> p = seed.value_or(std::array<double, 2>{0.0, cfg.guide_height_um()});
    check_finite(cfg, s, {x_um, p[0], p[1]});

    auto objective = [&](double y, double z) {
        const FieldJet j = field_jet(cfg, s, x_um, y, z);
        return 0.5 * dot(j.b, j.b);
    };

    constexpr int max_iter = 200;
    double g = objective(p[0], p[1]);
    for (int it = 1; it <= max_iter; ++it) {
        check_wire_distance(cfg, {x_um, p[0], p[1]});
        const FieldJet j = field_jet(cfg, s, x_um, p[0], p[1]);
        const double gy = dot(j.b, j.by);
        const double gz = dot(j.b, j.bz);
        double hyy = dot(j.by, j.by) + dot(j.b, j.byy);
        double hyz = dot(j.by, j.bz) + dot(j.b, j.byz);
        double hzz = dot(j.bz, j.bz) + dot(j.b, j.bzz);

        // Levenberg shift until the Hessian is positive definite.
        double shift = 0.0;
        const double scale = std::max({std::abs(hyy), std::abs(hzz), 1e-300});
        while (!(hyy + shift > 0.0 && (hyy + shift) * (hzz + shift) - hyz * hyz > 0.0)) {
            shift = shift == 0.0 ? 1e-6 * scale : 4.0 * shift;
        }
        hyy += shift;
        hzz += shift;
        const double det = hyy * hzz - hyz * hyz;
        double dy = -(hzz * gy - hyz * gz) / det;
        double dz = -(hyy * gz - hyz * gy) / det;

        // Backtracking on the objective.
        double step = 1.0;
        double g_new = objective(p[0] + dy, p[1] + dz);
        while (g_new > g && step > 1e-12) {
            step *= 0.5;
            g_new = objective(p[0] + step * dy, p[1] + step * dz);
        }
        const double moved = step * std::hypot(dy, dz);
        if (g_new <= g) {
            p[0] += step * dy;
            p[1] += step * dz;
            g = g_new;
        }
        if (moved <= 1e-13 * (1.0 + std::hypot(p[0], p[1])) || g_new > g) {
            const double b = std::sqrt(2.0 * g);
            return TransverseMinimum{p[0], p[1], b, it};
        }
    }
    std::ostringstream msg;
    msg << "transverse minimisation did not converge at x = " << x_um << " um, s = " << s
        << " (last y = " << p[0] << ", z = " << p[1] << ", |B| = " << std::sqrt(2.0 * g) << " G)";
    throw NumericalError(msg.str());
}

double PotentialCurve::min_U() const { return *std::min_element(U.begin(), U.end()); }

std::vector<double> symmetric_grid(double half_width_um, int points) {
    if (points < 4 || points % 2 != 0) throw InputError("grid: point count must be even and >= 4");
    if (!(half_width_um > 0.0)) throw InputError("grid: half width must be positive");
    std::vector<double> x(static_cast<std::size_t>(points));
    const double h = 2.0 * half_width_um / (points - 1);
    const int half = points / 2;
    for (int k = 0; k < half; ++k) {
        const double v = (k + 0.5) * h;
        x[static_cast<std::size_t>(half + k)] = v;
        x[static_cast<std::size_t>(half - 1 - k)] = -v;
    }
    return x;
}

void locate_wells(PotentialCurve& c) {
    const auto& U = c.U;
    const std::size_t n = U.size();
    const std::size_t i = static_cast<std::size_t>(std::min_element(U.begin(), U.end()) - U.begin());
    double xm = c.x_um[i];
    if (i > 0 && i + 1 < n) {
        const double h = c.spacing();
        const double denom = U[i - 1] - 2.0 * U[i] + U[i + 1];
        if (denom > 0.0) xm += 0.5 * h * (U[i - 1] - U[i + 1]) / denom;
    }
    xm = std::abs(xm);
    // Minimum at the innermost node pair means a single well at the origin.
    const bool single = xm <= c.spacing();
    c.min_location_um = single ? 0.0 : xm;
    c.well_separation_um = single ? 0.0 : 2.0 * xm;
}

PotentialCurve potential_curve(const TrapConfig& cfg, double s, const std::vector<double>& x_um) {
    cfg.validate();
    const std::size_t n = x_um.size();
    if (n < 4 || n % 2 != 0) throw InputError("potential_curve: grid needs an even number of points");
    const double h = x_um[1] - x_um[0];
    for (std::size_t k = 0; k < n; ++k) {
        if (std::abs(x_um[k] + x_um[n - 1 - k]) > 1e-9 * std::abs(h))
            throw InputError("potential_curve: grid must be symmetric about 0");
        if (k > 0 && std::abs((x_um[k] - x_um[k - 1]) - h) > 1e-9 * std::abs(h))
            throw InputError("potential_curve: grid must be uniform");
    }

    PotentialCurve c;
    c.s = s;
    c.x_um = x_um;
    c.U.resize(n);
    c.bmin_G.resize(n);
    c.y_um.resize(n);
    c.z_um.resize(n);

    const double to_rad = cfg.rad_per_s_per_G();
    auto store = [&](std::size_t k, const TransverseMinimum& m) {
        c.bmin_G[k] = m.bmin_G;
        c.y_um[k] = m.y_um;
        c.z_um[k] = m.z_um;
        c.U[k] = to_rad * m.bmin_G;
    };

    // Chain seeds outward from the centre on each side.
    const std::size_t half = n / 2;
    std::optional<std::array<double, 2>> seed;
    for (std::size_t k = half; k < n; ++k) {
        const TransverseMinimum m = transverse_minimum(cfg, s, x_um[k], seed);
        store(k, m);
        seed = std::array<double, 2>{m.y_um, m.z_um};
    }
    seed.reset();
    for (std::size_t k = half; k-- > 0;) {
        const TransverseMinimum m = transverse_minimum(cfg, s, x_um[k], seed);
        store(k, m);
        seed = std::array<double, 2>{m.y_um, m.z_um};
    }

    const double bmin = *std::min_element(c.bmin_G.begin(), c.bmin_G.end());
    if (!(bmin > 0.0)) throw NumericalError("potential_curve: field zero encountered");
    if (bmin < majorana_warning_G) {
        std::ostringstream msg;
        msg << "minimum field " << bmin << " G below " << majorana_warning_G
            << " G at s = " << s << " (spin-flip loss regime)";
        c.warnings.push_back(msg.str());
    }
    locate_wells(c);
    return c;
}

std::vector<double> choose_grid(const TrapConfig& cfg, const GridSpec& spec,
                                const std::vector<double>& probe_s) {
    double L = spec.half_width_um;
    int N = spec.points;
    const double h = 2.0 * L / (N - 1);
    const double need = spec.boundary_quanta * spec.omega_ref;
    for (int attempt = 0; attempt < 8; ++attempt) {
        const std::vector<double> x = symmetric_grid(L, N);
        bool ok = true;
        for (double s : probe_s) {
            const PotentialCurve c = potential_curve(cfg, s, x);
            const double edge = std::min(c.U.front(), c.U.back());
            if (edge - c.min_U() < need) {
                ok = false;
                break;
            }
        }
        if (ok) return x;
        if (!spec.auto_widen) break;
        L *= 1.25;
        N = static_cast<int>(std::lround(2.0 * L / h)) + 1;
        if (N % 2 != 0) ++N;
        L = 0.5 * h * (N - 1);
    }
    throw GridTooSmallError("choose_grid: boundary energy stays below the required margin");
}

}  // namespace chiptrap
