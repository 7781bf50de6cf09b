#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "chiptrap/units.hpp"

namespace chiptrap {

using Vec3 = std::array<double, 3>;

// Five-conductor splitting trap. The central wire runs along x through the
// origin; three crossing wires run along y at x = -d_ext, 0, +d_ext in the
// plane z = crossing_height_um. The outer crossing wires carry Iext(s) with
// the direction that opposes the axial bias, the centre one carries Ic(s)
// in the opposite direction.
struct TrapConfig {
    double i0_mA = 525.0;
    double b0y_G = 20.0;
    double b0x_G = 16.0;
    double iext_base_mA = 140.0;
    double iext_slope_mA = 2.91;
    double ic_base_mA = 0.25;
    double ic_slope_mA = 4.4;
    double d_ext_um = 10.0;
    double crossing_height_um = 0.0;
    double ic_height_offset_um = 0.0;  // centre crossing wire relative to the outer pair
    double scale_Hz_per_G = 1.4e6;  // U = h * scale * |B|
    double mass_kg = units::rb87_mass;

    double iext_mA(double s) const { return iext_base_mA + iext_slope_mA * s; }
    double ic_mA(double s) const { return ic_base_mA + ic_slope_mA * s; }

    // Height of the analytic side-guide zero above the central wire.
    double guide_height_um() const { return units::wire_field_constant * i0_mA / b0y_G; }

    // z coordinate of the chip surface (top-most conductor plane).
    double surface_z_um() const { return crossing_height_um > 0.0 ? crossing_height_um : 0.0; }

    // Energy per gauss in rad/s.
    double rad_per_s_per_G() const { return units::two_pi * scale_Hz_per_G; }

    // Throws InputError on non-finite values or broken invariants.
    void validate() const;

    bool operator==(const TrapConfig&) const = default;
};

Vec3 field_at(const TrapConfig& cfg, double s, const Vec3& r_um);

struct TransverseMinimum {
    double y_um = 0.0;
    double z_um = 0.0;
    double bmin_G = 0.0;
    int iterations = 0;
};

// Local minimum of |B| over (y, z) at fixed x. Without a seed the search
// starts at the side-guide zero (0, guide height).
TransverseMinimum transverse_minimum(const TrapConfig& cfg, double s, double x_um,
                                     std::optional<std::array<double, 2>> seed = std::nullopt);

struct PotentialCurve {
    double s = 0.0;
    std::vector<double> x_um;
    std::vector<double> U;  // E/hbar in rad/s, absolute (not shifted)
    std::vector<double> bmin_G;
    std::vector<double> y_um;
    std::vector<double> z_um;
    double min_location_um = 0.0;    // |x| of the global minimum
    double well_separation_um = 0.0; // 0 for a single well
    std::vector<std::string> warnings;

    static constexpr const char* energy_unit = "rad/s (E/hbar)";

    double min_U() const;
    double spacing() const { return x_um[1] - x_um[0]; }
};

// Uniform grid of `points` nodes on [-half_width, half_width]. `points` must be even
// so that the grid is mirror symmetric without a node at x = 0.
std::vector<double> symmetric_grid(double half_width_um, int points);

PotentialCurve potential_curve(const TrapConfig& cfg, double s, const std::vector<double>& x_um);

// Fill min_location / well_separation from the sampled U.
void locate_wells(PotentialCurve& curve);

struct GridSpec {
    double half_width_um = 15.0;
    int points = 2048;
    bool auto_widen = true;
    double omega_ref = units::hz_to_rad(190.0);
    double boundary_quanta = 50.0;
};

// Grid satisfying U(+-L) - min U >= boundary_quanta * omega_ref at every probe s.
// Widening keeps the spacing fixed.
std::vector<double> choose_grid(const TrapConfig& cfg, const GridSpec& spec,
                                const std::vector<double>& probe_s = {0.0, 1.0});

struct CalibrationTargets {
    double omega_s0 = units::hz_to_rad(190.0);
    double omega_s1 = units::hz_to_rad(240.0);
    double trap_height_um = 35.0;
    double separation_um = 6.0;
    // Relative residual weights in the least-squares objective.
    double w_omega_s0 = 1.0;
    double w_omega_s1 = 1.0;
    double w_height = 0.2;
    double w_separation = 0.0;  // reported only by default
    // Acceptance bands on the relative residuals.
    double tol_omega = 0.15;
    double tol_height = 0.3;
    double tol_separation = 0.3;
};

struct CalibrationFree {
    bool d_ext = true;
    bool crossing_height = true;
    bool ic_height_offset = true;
};

struct TrapMetrics {
    double omega_s0 = 0.0;       // E1 - E0 at s = 0
    double omega_s1 = 0.0;       // E2 - E0 at s = 1
    double trap_height_um = 0.0; // transverse minimum above the surface at x = 0, s = 0
    double separation_um = 0.0;  // well separation at s = 1
};

struct CalibrationResult {
    TrapConfig config;
    TrapMetrics achieved;
    double residual_omega_s0 = 0.0;
    double residual_omega_s1 = 0.0;
    double residual_height = 0.0;
    double residual_separation = 0.0;
    double cost = 0.0;
    int evaluations = 0;
    bool success = false;
    std::string report;
};

// Levels and geometry figures of merit on a moderately sized grid.
TrapMetrics measure_trap(const TrapConfig& cfg, const GridSpec& grid = {});

// Least-squares fit of the free geometry to the targets. The input config is
// not modified; failure is reported in the result, not thrown.
CalibrationResult calibrate_geometry(const TrapConfig& cfg, const CalibrationTargets& targets,
                                     const CalibrationFree& free = {}, const GridSpec& grid = {});

}  // namespace chiptrap
