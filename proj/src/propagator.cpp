#include "qkr/propagator.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>

namespace qkr {

namespace {

// fftw planning routines touch shared wisdom state and are not thread safe;
// execution on distinct buffers is.
std::mutex& plan_mutex() {
    static std::mutex m;
    return m;
}

}  // namespace

QuantumState plane_wave(int n_max, double kbar, double beta, int n0) {
    QuantumState s;
    s.beta = beta;
    s.kbar = kbar;
    s.n_max = n_max;
    s.amps.assign(static_cast<std::size_t>(2 * n_max + 1), {0.0, 0.0});
    s.at(n0) = {1.0, 0.0};
    return s;
}

double norm_sq(const QuantumState& s) {
    double acc = 0.0;
    for (const auto& c : s.amps) acc += std::norm(c);
    return acc;
}

double energy(const QuantumState& s) {
    double acc = 0.0;
    for (int n = -s.n_max; n <= s.n_max; ++n) {
        const double p = s.kbar * (n + s.beta);
        acc += std::norm(s.at(n)) * 0.5 * p * p;
    }
    return acc;
}

double first_moment(const QuantumState& s) {
    double acc = 0.0;
    for (int n = -s.n_max; n <= s.n_max; ++n)
        acc += std::norm(s.at(n)) * s.kbar * (n + s.beta);
    return acc;
}

int wrap_half_open(double x, double* frac) {
    int m = static_cast<int>(std::floor(x + 0.5));
    double f = x - m;
    if (f >= 0.5) {  // rounding at the seam can land exactly on +1/2
        f -= 1.0;
        m += 1;
    } else if (f < -0.5) {
        f += 1.0;
        m -= 1;
    }
    *frac = f;
    return m;
}

int next_smooth(int m) {
    if (m < 1) return 1;
    for (int g = m;; ++g) {
        int r = g;
        for (int p : {2, 3, 5, 7})
            while (r % p == 0) r /= p;
        if (r == 1) return g;
    }
}

Propagator::Propagator(double K, double kbar, int n_max)
    : K_(K), kbar_(kbar), n_max_(n_max), grid_n_(next_smooth(2 * n_max + 1)) {
    kick_phase_.resize(static_cast<std::size_t>(grid_n_));
    const double amp = K_ / kbar_;
    for (int j = 0; j < grid_n_; ++j) {
        const double x = 2.0 * std::numbers::pi * j / grid_n_;
        kick_phase_[static_cast<std::size_t>(j)] = std::polar(1.0, -amp * std::cos(x));
    }
    free_phase_.resize(static_cast<std::size_t>(2 * n_max_ + 1));

    std::lock_guard<std::mutex> lock(plan_mutex());
    grid_ = reinterpret_cast<std::complex<double>*>(
        fftw_alloc_complex(static_cast<std::size_t>(grid_n_)));
    auto* g = reinterpret_cast<fftw_complex*>(grid_);
    // FFTW_ESTIMATE keeps plan selection independent of machine load, so a
    // given build produces identical transforms run to run.
    to_position_ = fftw_plan_dft_1d(grid_n_, g, g, FFTW_BACKWARD, FFTW_ESTIMATE);
    to_momentum_ = fftw_plan_dft_1d(grid_n_, g, g, FFTW_FORWARD, FFTW_ESTIMATE);
}

Propagator::~Propagator() {
    std::lock_guard<std::mutex> lock(plan_mutex());
    fftw_destroy_plan(to_position_);
    fftw_destroy_plan(to_momentum_);
    fftw_free(reinterpret_cast<fftw_complex*>(grid_));
}

void Propagator::apply_kick(QuantumState& s) {
    const int nm = s.n_max;
    const int G = grid_n_;
    // Lattice index n maps to DFT bin n mod G; bins in (n_max, G-n_max)
    // are padding and start out empty.
    std::fill_n(grid_, G, std::complex<double>{0.0, 0.0});
    for (int n = 0; n <= nm; ++n) grid_[n] = s.at(n);
    for (int n = -nm; n < 0; ++n) grid_[n + G] = s.at(n);

    fftw_execute(to_position_);
    for (int j = 0; j < G; ++j) grid_[j] *= kick_phase_[static_cast<std::size_t>(j)];
    fftw_execute(to_momentum_);

    const double inv = 1.0 / G;
    double edge = 0.0;
    for (int n = 0; n <= nm; ++n) {
        s.at(n) = grid_[n] * inv;
        if (n > nm - 3) edge += std::norm(s.at(n));
    }
    for (int n = -nm; n < 0; ++n) {
        s.at(n) = grid_[n + G] * inv;
        if (n < -(nm - 3)) edge += std::norm(s.at(n));
    }
    double dropped = 0.0;
    for (int b = nm + 1; b < G - nm; ++b) dropped += std::norm(grid_[b]) * inv * inv;

    if (edge + dropped > kBoundaryLeakTol)
        throw BoundaryLeakError("apply_kick", edge + dropped);
}

void Propagator::apply_free(QuantumState& s) {
    if (!free_phase_valid_ || free_phase_beta_ != s.beta) {
        for (int n = -n_max_; n <= n_max_; ++n) {
            const double q = n + s.beta;
            free_phase_[static_cast<std::size_t>(n + n_max_)] =
                std::polar(1.0, -0.5 * kbar_ * q * q);
        }
        free_phase_beta_ = s.beta;
        free_phase_valid_ = true;
    }
    const std::size_t m = s.amps.size();
    for (std::size_t i = 0; i < m; ++i) s.amps[i] *= free_phase_[i];
}

void Propagator::apply_se(QuantumState& s, double theta) {
    const double shift = std::cos(theta);  // momentum recoil in units of kbar
    double frac;
    const int m = wrap_half_open(s.beta + shift, &frac);
    s.beta = frac;
    free_phase_valid_ = false;
    if (m == 0) return;

    // c'_{n+m} = c_n; cells pushed past the lattice edge are dropped.
    const int nm = s.n_max;
    double dropped = 0.0;
    if (m > 0) {
        for (int n = nm - m + 1; n <= nm; ++n) dropped += std::norm(s.at(n));
        for (int n = nm; n >= -nm + m; --n) s.at(n) = s.at(n - m);
        for (int n = -nm; n < -nm + m; ++n) s.at(n) = {0.0, 0.0};
    } else {
        for (int n = -nm; n <= -nm - m - 1; ++n) dropped += std::norm(s.at(n));
        for (int n = -nm; n <= nm + m; ++n) s.at(n) = s.at(n - m);
        for (int n = nm + m + 1; n <= nm; ++n) s.at(n) = {0.0, 0.0};
    }
    if (dropped > kBoundaryLeakTol) throw BoundaryLeakError("apply_se", dropped);
    if (dropped > 0.0) {
        const double scale = 1.0 / std::sqrt(1.0 - dropped);
        for (auto& c : s.amps) c *= scale;
    }
}

std::optional<SeEvent> Propagator::step(QuantumState& s, double se_prob, RngStream& rng) {
    // The uniform for the SE decision is drawn every period regardless of
    // se_prob, so trajectories with equal seeds stay draw-for-draw aligned
    // across different se_prob values.
    const double u = rng.next_double();
    apply_kick(s);
    std::optional<SeEvent> ev;
    if (u < se_prob) {
        const double theta = 2.0 * std::numbers::pi * rng.next_double();
        apply_se(s, theta);
        ev = SeEvent{-1, theta, std::cos(theta)};
    }
    apply_free(s);
    return ev;
}

}  // namespace qkr
