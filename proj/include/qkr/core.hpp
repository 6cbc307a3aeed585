/* Shared domain types and parameter conventions.
 *
 * Unit conventions used throughout:
 *   - momentum P in the normalized units of the one-period map, with the
 *     lattice decomposition P = kbar*(n + beta), integer n, beta in [-1/2, 1/2);
 *   - energies are P^2/2 (not rescaled by kbar);
 *   - the filter width delta and detection windows are measured in units of kbar.
 */
#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace qkr {

class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Probability within 3 sites of a lattice edge (or dropped off-lattice)
// above which propagation aborts instead of silently leaking norm.
inline constexpr double kBoundaryLeakTol = 1e-8;

class BoundaryLeakError : public std::runtime_error {
public:
    BoundaryLeakError(const std::string& where, double leaked)
        : std::runtime_error(where + ": boundary leak, probability " +
                             std::to_string(leaked) +
                             " near the momentum-lattice edge (increase n_max)"),
          leaked_probability(leaked) {}
    double leaked_probability;
};

// All physical and numerical knobs of one simulation run.
struct SimParams {
    double K = 10.0;           // kick strength
    double kbar = 2.9;         // effective Planck constant
    double se_prob = 0.0;      // spontaneous-emission probability per kick, in [0,1]
    double delta = 0.04;       // filter / initial-distribution width, units of kbar
    int n_kicks = 500;
    int n_traj = 4000;
    int n_max = 1024;          // lattice indices n in [-n_max, n_max]
    std::uint64_t seed = 1;
    std::vector<int> checkpoints;  // sorted kick indices with recorded distributions

    // Throws ConfigError on the first violated invariant.
    void validate() const;
};

// Laser/atom parameters entering the spontaneous-emission rate.
// All frequencies are measured in units of the inverse pulse duration,
// so gamma_tau is both "Gamma*tau" and "Gamma" in these units.
struct PhysicalParams {
    double gamma_tau = 0.0;  // natural linewidth x pulse duration
    double omega = 0.0;      // resonant Rabi frequency
    double detuning = 1.0;   // laser-atom detuning

    void validate() const;
};

enum class SeMode { Exact, Approximate };

// Spontaneous-emission probability per kick.
// Exact:       (G/2) * (Omega^2/2) / (Delta_L^2 + Omega^2/2 + G^2/4)
// Approximate: G * Omega^2 / (4 Delta_L^2), valid for |Delta_L| >> G, Omega.
double se_probability(const PhysicalParams& p, SeMode mode);

// Parameters of the closed-form diffusion/population model.
struct ModelParams {
    double d_q = 25.5;     // initial quantum diffusion coefficient (energy/kick)
    double t_s = 50.7;     // localization decay time (kicks)
    double se_prob = 0.0;  // SE probability per kick
    double delta = 0.04;   // filter width, units of kbar

    double tau_s() const { return se_prob * t_s; }
    void validate() const;
};

}  // namespace qkr
