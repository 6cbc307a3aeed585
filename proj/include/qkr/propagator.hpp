/* Single-trajectory quantum evolution over one kick period.
 *
 * A trajectory is a Bloch wave with conserved quasimomentum beta: the state
 * populates only momenta P = kbar*(n + beta) with integer n on the lattice
 * n in [-n_max, n_max]. One period is kick -> (optional SE shift) -> free
 * evolution. The kick is applied pointwise on a uniform position grid of
 * the smallest 7-smooth size >= 2*n_max+1; spontaneous emission translates
 * the whole momentum distribution by kbar*cos(theta).
 */
#pragma once

#include <complex>
#include <cstdint>
#include <optional>
#include <vector>

#include "qkr/core.hpp"
#include "qkr/rng.hpp"

#include <fftw3.h>

namespace qkr {

struct QuantumState {
    double beta = 0.0;   // quasimomentum, in [-1/2, 1/2)
    double kbar = 0.0;
    int n_max = 0;
    std::vector<std::complex<double>> amps;  // c_n, index n + n_max

    std::complex<double>& at(int n) { return amps[static_cast<std::size_t>(n + n_max)]; }
    const std::complex<double>& at(int n) const { return amps[static_cast<std::size_t>(n + n_max)]; }
    int size() const { return 2 * n_max + 1; }
};

// Plane wave c_n = delta_{n,n0} at quasimomentum beta.
QuantumState plane_wave(int n_max, double kbar, double beta, int n0 = 0);

double norm_sq(const QuantumState& s);
// E = sum_n |c_n|^2 kbar^2 (n+beta)^2 / 2.
double energy(const QuantumState& s);
// <P> = sum_n |c_n|^2 kbar (n+beta).
double first_moment(const QuantumState& s);

// Splits x into integer part m and fractional part in [-1/2, 1/2).
// Returns m; *frac = x - m.
int wrap_half_open(double x, double* frac);

// Smallest integer >= m with no prime factor larger than 7.
int next_smooth(int m);

struct SeEvent {
    int kick_index = -1;
    double theta = 0.0;  // random angle in [0, 2pi)
    double shift = 0.0;  // cos(theta), units of kbar
};

class Propagator {
public:
    Propagator(double K, double kbar, int n_max);
    explicit Propagator(const SimParams& p) : Propagator(p.K, p.kbar, p.n_max) {}
    ~Propagator();

    Propagator(const Propagator&) = delete;
    Propagator& operator=(const Propagator&) = delete;

    // Multiplies by exp(-i (K/kbar) cos X) on the position grid.
    // Throws BoundaryLeakError if probability within 3 sites of a lattice
    // edge (plus anything scattered past it) exceeds kBoundaryLeakTol.
    void apply_kick(QuantumState& s);

    // c_n *= exp(-i kbar (n+beta)^2 / 2); |c_n| unchanged.
    void apply_free(QuantumState& s);

    // Translates the momentum distribution by kbar*cos(theta): beta
    // absorbs the fractional part, lattice indices shift by the integer
    // part. Amplitudes shifted off-lattice are dropped and the state
    // renormalized, provided the dropped probability is below
    // kBoundaryLeakTol; otherwise BoundaryLeakError.
    void apply_se(QuantumState& s, double theta);

    // One full period: kick -> (SE with probability se_prob) -> free.
    // Consumes one uniform draw per call plus one more when SE fires.
    std::optional<SeEvent> step(QuantumState& s, double se_prob, RngStream& rng);

    int grid_size() const { return grid_n_; }
    double kick_strength() const { return K_; }

private:
    double K_;
    double kbar_;
    int n_max_;
    int grid_n_;
    std::vector<std::complex<double>> kick_phase_;  // exp(-i K/kbar cos x_j)
    std::vector<std::complex<double>> free_phase_;  // exp(-i kbar (n+beta)^2/2)
    double free_phase_beta_ = 0.0;
    bool free_phase_valid_ = false;
    std::complex<double>* grid_ = nullptr;  // fftw-aligned work buffer
    fftw_plan to_position_ = nullptr;       // momentum -> position (sign +1)
    fftw_plan to_momentum_ = nullptr;       // position -> momentum (sign -1)
};

}  // namespace qkr
