#include "qkr/model.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace qkr::model {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

double d0(double t, const ModelParams& mp) {
    return mp.d_q * std::exp(-t / mp.t_s);
}

double d_infty(const ModelParams& mp) {
    const double tau = mp.tau_s();
    return mp.d_q * tau / (1.0 + tau);
}

double pop_f0(double t, const ModelParams& mp) {
    return std::exp(-mp.se_prob * t);
}

double pop_fdelta(double t, const ModelParams& mp) {
    return -mp.delta * std::expm1(-mp.se_prob * t);
}

double detected_fraction(double t, const ModelParams& mp) {
    return pop_f0(t, mp) + pop_fdelta(t, mp);
}

double e0(double t, const ModelParams& mp) {
    return -mp.d_q * mp.t_s * std::expm1(-t / mp.t_s) * std::exp(-mp.se_prob * t);
}

double e_delta(double t, const ModelParams& mp) {
    const double tau = mp.tau_s();
    // Bracket regrouped through expm1 so the t=0 cancellation is exact in
    // floating point; the constant term of the reference form equals
    // (1+tau) - a with a below.
    const double a = tau * (1.0 + 2.0 * tau) / (1.0 + tau);
    const double bracket = mp.se_prob * t - (1.0 + tau) * std::expm1(-mp.se_prob * t) +
                           a * std::expm1(-(1.0 + tau) * t / mp.t_s);
    return mp.delta * mp.d_q * mp.t_s / (1.0 + tau) * bracket;
}

double ebar(double t, const ModelParams& mp) {
    return (e0(t, mp) + e_delta(t, mp)) / detected_fraction(t, mp);
}

double ebar_approx(double t, const ModelParams& mp) {
    const double pt = mp.se_prob * t;
    return mp.d_q * mp.tau_s() * mp.se_prob * mp.delta * std::exp(pt) * (1.0 + pt);
}

double t1(const ModelParams& mp) {
    const double tau = mp.tau_s();
    if (tau == 0.0) return kInf;
    return mp.t_s * std::log1p(1.0 / tau);
}

double t2_exact(const ModelParams& mp) {
    if (mp.se_prob == 0.0) return kInf;
    return std::log1p(1.0 / mp.delta) / mp.se_prob;
}

double t2_approx(const ModelParams& mp) {
    if (mp.se_prob == 0.0) return kInf;
    return -std::log(mp.delta) / mp.se_prob;
}

double d_r(const ModelParams& mp) {
    return 2.0 * std::numbers::e * mp.d_q * mp.tau_s() * mp.delta;
}

OdeCurves ode_oracle(const ModelParams& mp, int horizon, double dt) {
    mp.validate();
    if (horizon < 1) throw std::invalid_argument("ode_oracle: horizon must be >= 1");
    const int per_kick = static_cast<int>(std::lround(1.0 / dt));
    if (per_kick < 10 || per_kick * dt != 1.0)
        throw std::invalid_argument("ode_oracle: dt must divide 1 exactly and be <= 0.1");

    const double pi = mp.se_prob;
    auto deriv = [&](double t, const double y[3], double dy[3]) {
        dy[0] = -pi * y[0];
        dy[1] = -pi * y[1] + pi * mp.delta;
        dy[2] = d0(t, mp) * y[0] - pi * y[2];
    };

    OdeCurves out;
    out.f0.label = "pop_f0";
    out.fdelta.label = "pop_fdelta";
    out.e0.label = "e0";
    auto record = [&](double t, const double y[3]) {
        out.f0.t.push_back(t);
        out.f0.value.push_back(y[0]);
        out.fdelta.t.push_back(t);
        out.fdelta.value.push_back(y[1]);
        out.e0.t.push_back(t);
        out.e0.value.push_back(y[2]);
    };

    double y[3] = {1.0, 0.0, 0.0};
    record(0.0, y);
    for (int k = 0; k < horizon; ++k) {
        for (int i = 0; i < per_kick; ++i) {
            const double t = k + i * dt;
            double k1[3], k2[3], k3[3], k4[3], tmp[3];
            deriv(t, y, k1);
            for (int j = 0; j < 3; ++j) tmp[j] = y[j] + 0.5 * dt * k1[j];
            deriv(t + 0.5 * dt, tmp, k2);
            for (int j = 0; j < 3; ++j) tmp[j] = y[j] + 0.5 * dt * k2[j];
            deriv(t + 0.5 * dt, tmp, k3);
            for (int j = 0; j < 3; ++j) tmp[j] = y[j] + dt * k3[j];
            deriv(t + dt, tmp, k4);
            for (int j = 0; j < 3; ++j)
                y[j] += dt / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
        }
        record(static_cast<double>(k + 1), y);
    }
    return out;
}

}  // namespace qkr::model
