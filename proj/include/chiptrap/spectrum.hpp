#pragma once

#include <string>
#include <vector>

#include "chiptrap/trap.hpp"

namespace chiptrap {

enum class Parity { Even, Odd };

const char* to_string(Parity p);

// Lowest eigenpairs at one value of s. States are indexed by quantum number
// n = 2 * (rank within parity class) + (odd ? 1 : 0).
struct EigenSet {
    double s = 0.0;
    std::vector<double> x_um;
    std::vector<double> energies;              // rad/s, relative to min U
    std::vector<std::vector<double>> states;   // real, sum(phi^2) dx = 1 with dx in um
    std::vector<Parity> parity;
    double potential_min = 0.0;                // absolute min U in rad/s

    std::size_t size() const { return energies.size(); }
    double spacing() const { return x_um[1] - x_um[0]; }
};

struct SolverOptions {
    bool check_boundary = true;
    double boundary_tolerance = 1e-8;  // |phi(+-L)| / max |phi|
    // Symmetric potentials are solved in separate even and odd sectors,
    // anything else on the full grid.
    double symmetry_tolerance = 1e-10;
};

inline constexpr int max_states = 12;

// Second-order central differences, hard walls one node beyond each grid end.
EigenSet solve_stationary(const PotentialCurve& curve, int n_states,
                          double mass_kg = units::rb87_mass, const SolverOptions& opt = {});

// Sign of <phi(x)|phi(-x)>; throws ParityError when |overlap| < 0.99.
Parity parity_of(const std::vector<double>& phi, const std::vector<double>& x_um);

// phi(0+) > 0 for even states, phi'(0) > 0 for odd ones.
void apply_origin_gauge(EigenSet& set);

double overlap(const std::vector<double>& a, const std::vector<double>& b, double dx);

struct EigenBundle {
    std::vector<double> s_grid;
    std::vector<EigenSet> sets;
    std::vector<PotentialCurve> curves;
    std::vector<std::vector<int>> gauge_flips;  // per s, per state: -1 where a sign flip was applied
    std::vector<std::string> notes;
    double mass_kg = units::rb87_mass;

    std::size_t n_states() const { return sets.empty() ? 0 : sets.front().size(); }
    const std::vector<double>& x_um() const { return sets.front().x_um; }
};

struct SweepOptions {
    int n_states = 6;
    GridSpec grid;
    double max_s_spacing = 0.01;
    double min_overlap = 0.9;
    bool refine = true;
    int max_refinements = 6;
    unsigned threads = 0;  // 0: hardware concurrency
    SolverOptions solver;
};

EigenBundle sweep_spectrum(const TrapConfig& cfg, std::vector<double> s_grid,
                           const SweepOptions& opt = {});

// Same, on an explicit x grid.
EigenBundle sweep_spectrum(const TrapConfig& cfg, std::vector<double> s_grid,
                           const std::vector<double>& x_um, const SweepOptions& opt);

// Make adjacent same-label overlaps positive, starting from the origin
// convention at s_grid[0]. Idempotent.
void fix_gauge(EigenBundle& bundle);

// Smallest |<phi_k(s_j)|phi_k(s_j+1)>| over all k and j, with its location.
struct OverlapCheck {
    double min_overlap = 1.0;
    std::size_t s_index = 0;
    std::size_t state = 0;
};
OverlapCheck adjacent_overlaps(const EigenBundle& bundle);

std::vector<double> uniform_s_grid(int points);

}  // namespace chiptrap
