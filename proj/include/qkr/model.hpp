/* Closed-form rate-equation model of filtered energy growth.
 *
 * Populations: F0 = fraction of atoms with no SE yet (still in the initial
 * quasimomentum window), FDelta = fraction scattered back into a detection
 * window by SE. The instantaneous diffusion coefficient of the coherent
 * fraction decays as d0(t) = D_q exp(-t/t_s); tau_s = Pi*t_s compares the
 * SE rate to that decay. All times are in kicks, energies in the normalized
 * units of the one-period map.
 */
#pragma once

#include <string>
#include <vector>

#include "qkr/core.hpp"

namespace qkr::model {

struct ModelCurve {
    std::vector<double> t;      // strictly increasing, kicks
    std::vector<double> value;
    std::string label;
};

// Instantaneous diffusion coefficient D_q exp(-t/t_s).
double d0(double t, const ModelParams& mp);

// Asymptotic diffusion coefficient D_q tau_s / (1 + tau_s).
double d_infty(const ModelParams& mp);

// exp(-Pi t): no-SE survival.
double pop_f0(double t, const ModelParams& mp);

// delta (1 - exp(-Pi t)): scattered-back population.
double pop_fdelta(double t, const ModelParams& mp);

// pop_f0 + pop_fdelta = delta + (1-delta) exp(-Pi t).
double detected_fraction(double t, const ModelParams& mp);

// Coherent-fraction energy D_q t_s (1 - exp(-t/t_s)) exp(-Pi t); zero at t=0.
double e0(double t, const ModelParams& mp);

// Energy carried by the scattered-back fraction; zero at t=0, late-time
// slope delta * d_infty.
double e_delta(double t, const ModelParams& mp);

// Filtered mean energy (e0 + e_delta) / (pop_f0 + pop_fdelta).
double ebar(double t, const ModelParams& mp);

// Small-delta, small-tau_s limit of ebar: D_q tau_s Pi delta e^{Pi t}(1 + Pi t).
double ebar_approx(double t, const ModelParams& mp);

// Time of the e0 maximum, t_s ln(1 + 1/tau_s); +inf when tau_s = 0.
double t1(const ModelParams& mp);

// Crossover time where the scattered-back population overtakes the coherent
// one: exact root of pop_fdelta = pop_f0, and the small-delta approximation
// -ln(delta)/Pi. Both +inf when Pi = 0.
double t2_exact(const ModelParams& mp);
double t2_approx(const ModelParams& mp);

// Reduced diffusion coefficient of the filtered transient, 2e D_q tau_s delta.
double d_r(const ModelParams& mp);

struct OdeCurves {
    ModelCurve f0;
    ModelCurve fdelta;
    ModelCurve e0;
};

// Fixed-step RK4 integration of the population/energy rate equations
//   dF0/dt = -Pi F0,  dFD/dt = -Pi FD + Pi delta,  dE0/dt = d0(t) F0 - Pi E0,
// sampled at integer kicks up to horizon. Independent cross-check of the
// closed forms above; dt must divide 1 exactly and be <= 0.1.
OdeCurves ode_oracle(const ModelParams& mp, int horizon, double dt = 1.0 / 16);

}  // namespace qkr::model
