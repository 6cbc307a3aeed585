/* Ensemble execution and the filtered-detection protocol.
 *
 * The incoherent initial state of width delta is realized as a uniform
 * mixture over quasimomentum beta in [-delta/2, delta/2], one beta per
 * trajectory. A trajectory is "detected" at time t when its beta lies
 * within delta/2 of a lattice momentum; since the whole wavefunction
 * shares one beta, detection is all or nothing per trajectory.
 *
 * Trajectory i draws from RngStream(seed, i) regardless of which thread
 * runs it, and reduction happens in trajectory-index order, so ensemble
 * output is bit-identical for any worker count.
 */
#pragma once

#include <cstdint>
#include <vector>

#include "qkr/core.hpp"
#include "qkr/propagator.hpp"
#include "qkr/rng.hpp"

namespace qkr {

struct MomentumDistribution {
    std::vector<double> center;  // P/kbar at bin centers, contiguous grid
    std::vector<double> prob;
    double bin_width = 1.0;      // in kbar units
};

// Probability profile |c_n|^2 (index n + n_max) plus beta at one checkpoint.
struct StateSnapshot {
    int kick = 0;
    double beta = 0.0;
    std::vector<double> prob;
};

struct TrajectoryResult {
    std::vector<double> energies;          // E(t), t = 0..n_kicks
    std::vector<unsigned char> detected;   // |beta(t)| <= delta/2, same grid
    std::vector<SeEvent> se_events;        // ordered by kick_index
    std::vector<StateSnapshot> snapshots;  // one per requested checkpoint
    double final_beta = 0.0;

    int se_count() const { return static_cast<int>(se_events.size()); }
};

struct EnsembleResult {
    SimParams params;
    std::vector<double> mean_energy;      // t = 0..n_kicks
    std::vector<double> filtered_energy;  // NaN where no trajectory is detected
    std::vector<long long> detected_count;
    std::vector<long long> f0_count;      // trajectories with no SE up to t
    std::vector<double> pop_f0;           // fractions of n_traj
    std::vector<double> pop_fdelta;       // detected minus pop_f0
    std::vector<double> pop_rest;         // undetected remainder
    long long total_se = 0;

    struct CheckpointDist {
        int kick = 0;
        MomentumDistribution unfiltered;  // mass 1
        MomentumDistribution filtered;    // mass = detected fraction
    };
    std::vector<CheckpointDist> distributions;
};

// Plane wave at n = 0 with beta uniform over the initial window.
// Consumes exactly one draw.
QuantumState sample_initial(const SimParams& p, RngStream& rng);

// Evolves one trajectory for p.n_kicks periods with its private RNG stream.
// Boundary-leak errors are rethrown naming the trajectory.
TrajectoryResult run_trajectory(const SimParams& p, std::uint64_t traj_index,
                                Propagator& prop);
TrajectoryResult run_trajectory(const SimParams& p, std::uint64_t traj_index);

// Full ensemble average. n_threads = 0 means the OpenMP default; the value
// changes scheduling only, never the result.
EnsembleResult run_ensemble(const SimParams& p, int n_threads = 0,
                            double bin_width = 1.0);

// Plain-loop reference implementation with no OpenMP constructs; must
// produce output bit-identical to run_ensemble at any thread count.
EnsembleResult run_ensemble_serial(const SimParams& p, double bin_width = 1.0);

enum class Filter { None, Windows };

// Bins summed |c_n|^2 over P/kbar = n + beta into bins of the given width
// centered on multiples of it. Windows filtering keeps only detected
// snapshots. Mass is per trajectory (divides by snaps.size()) unless
// renormalize, which rescales to unit total.
MomentumDistribution momentum_histogram(const std::vector<StateSnapshot>& snaps,
                                        Filter filter, double delta,
                                        double bin_width, bool renormalize = false);

}  // namespace qkr
