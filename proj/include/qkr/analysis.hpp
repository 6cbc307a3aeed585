/* Fitting and classification of simulation output.
 *
 * fit_energy_curve recovers (D_q, t_s) from a filtered-energy trace by
 * least squares against the closed-form model; Pi and delta are known
 * inputs, never fitted. classify_distribution decides whether a momentum
 * distribution is exponential (localized) or Gaussian (diffusive) by
 * comparing log-space linear fits. classical_diffusion runs the standard
 * map as an independent reference for the diffusive regime.
 */
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "qkr/core.hpp"
#include "qkr/ensemble.hpp"

namespace qkr::analysis {

struct FitResult {
    double d_q = 0.0;
    double t_s = 0.0;
    double residual_norm = 0.0;  // sum of squared residuals
    int n_evals = 0;
    bool converged = false;
};

struct FitOptions {
    double d_q_min = 1.0, d_q_max = 200.0;
    double t_s_min = 5.0, t_s_max = 500.0;
    double d_q_init = 25.0;  // K^2/4 at the reference kick strength
    double t_s_init = 50.0;
    int max_evals = 4000;
};

// Minimizes sum_t (data(t) - ebar(t; D_q, t_s))^2 over the box above with
// a finite-difference Levenberg-Marquardt iteration. NaN data points
// (empty-detection times) are skipped; at least 20 finite points are
// required. Non-convergence within the budget returns the best point
// found with converged = false.
FitResult fit_energy_curve(const std::vector<double>& t,
                           const std::vector<double>& value, double se_prob,
                           double delta, const FitOptions& opt = {});

enum class Shape { Exponential, Gaussian, Intermediate };

struct ShapeVerdict {
    double exp_amplitude = 0.0;
    double p_loc = 0.0;  // decay scale of exp(-|P|/p_loc), kbar units
    double gauss_amplitude = 0.0;
    double sigma = 0.0;  // of exp(-P^2/(2 sigma^2)), kbar units
    double ssr_exp = 0.0;
    double ssr_gauss = 0.0;
    Shape verdict = Shape::Intermediate;
};

std::string to_string(Shape s);

// Fits log f against |P| (exponential) and against P^2 (Gaussian) over
// bins with |center| >= 1 and f > 1e-6 * max f; the central bins carry the
// initial-condition remnant and are excluded. The verdict requires one
// residual to beat the other by a factor 1.2, otherwise Intermediate.
// Throws ConfigError when fewer than 15 usable bins remain.
ShapeVerdict classify_distribution(const MomentumDistribution& dist);

struct ClassicalResult {
    std::vector<double> energy;  // <p^2>/2 per step, t = 0..n_steps
    double slope = 0.0;          // least-squares slope over the second half
};

// Standard map p <- p + K sin x, x <- x + p (mod 2pi) from p = 0, x
// uniform. Particle i uses RngStream(seed, i); reduction is index-ordered,
// so the result is thread-count independent.
ClassicalResult classical_diffusion(double K, int n_steps, int n_particles,
                                    std::uint64_t seed, int n_threads = 0);

}  // namespace qkr::analysis
