#include "qkr/core.hpp"

#include <cmath>

namespace qkr {

void SimParams::validate() const {
    auto fail = [](const std::string& msg) { throw ConfigError(msg); };
    if (!(K >= 0.0)) fail("K must be >= 0");
    if (!(kbar > 0.0)) fail("kbar must be > 0");
    if (!(se_prob >= 0.0 && se_prob <= 1.0)) fail("pi must be in [0, 1]");
    if (!(delta > 0.0 && delta <= 1.0)) fail("delta must be in (0, 1]");
    if (n_kicks < 1) fail("n_kicks must be positive");
    if (n_traj < 1) fail("n_traj must be positive");
    if (n_max < 1) fail("n_max must be >= 1");
    int prev = -1;
    for (int c : checkpoints) {
        if (c < 0 || c > n_kicks)
            fail("checkpoint " + std::to_string(c) + " outside [0, n_kicks]");
        if (c <= prev) fail("checkpoints must be strictly increasing");
        prev = c;
    }
}

void PhysicalParams::validate() const {
    if (!(gamma_tau >= 0.0)) throw ConfigError("gamma_tau must be >= 0");
}

double se_probability(const PhysicalParams& p, SeMode mode) {
    p.validate();
    const double g = p.gamma_tau;
    const double s = p.omega * p.omega;  // Omega^2
    switch (mode) {
        case SeMode::Exact:
            if (s == 0.0) return 0.0;
            return 0.5 * g * (0.5 * s) /
                   (p.detuning * p.detuning + 0.5 * s + 0.25 * g * g);
        case SeMode::Approximate:
            if (p.detuning == 0.0)
                throw std::domain_error("se_probability: approximate form needs detuning != 0");
            return g * s / (4.0 * p.detuning * p.detuning);
    }
    return 0.0;
}

void ModelParams::validate() const {
    auto fail = [](const std::string& msg) { throw ConfigError(msg); };
    if (!(d_q >= 0.0)) fail("d_q must be >= 0");
    if (!(t_s > 0.0)) fail("t_s must be > 0");
    if (!(se_prob >= 0.0 && se_prob <= 1.0)) fail("pi must be in [0, 1]");
    if (!(delta > 0.0 && delta <= 1.0)) fail("delta must be in (0, 1]");
}

}  // namespace qkr
