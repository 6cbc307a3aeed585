#include "qkr/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <omp.h>

#include "qkr/model.hpp"
#include "qkr/rng.hpp"

namespace qkr::analysis {

namespace {

double clamp(double x, double lo, double hi) { return std::min(std::max(x, lo), hi); }

struct LinFit {
    double slope = 0.0;
    double intercept = 0.0;
    double ssr = 0.0;
};

LinFit linear_lsq(const std::vector<double>& x, const std::vector<double>& y) {
    const double n = static_cast<double>(x.size());
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    LinFit f;
    const double det = n * sxx - sx * sx;
    f.slope = (n * sxy - sx * sy) / det;
    f.intercept = (sy - f.slope * sx) / n;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double r = y[i] - (f.intercept + f.slope * x[i]);
        f.ssr += r * r;
    }
    return f;
}

}  // namespace

FitResult fit_energy_curve(const std::vector<double>& t,
                           const std::vector<double>& value, double se_prob,
                           double delta, const FitOptions& opt) {
    if (t.size() != value.size())
        throw ConfigError("fit_energy_curve: time and value lengths differ");
    std::vector<double> ft, fv;
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (std::isfinite(value[i])) {
            ft.push_back(t[i]);
            fv.push_back(value[i]);
        }
    }
    if (ft.size() < 20)
        throw ConfigError("fit_energy_curve: fewer than 20 finite data points");

    FitResult res;
    const double lo[2] = {opt.d_q_min, opt.t_s_min};
    const double hi[2] = {opt.d_q_max, opt.t_s_max};
    double th[2] = {clamp(opt.d_q_init, lo[0], hi[0]), clamp(opt.t_s_init, lo[1], hi[1])};

    auto ssr_at = [&](const double q[2]) {
        ModelParams mp{q[0], q[1], se_prob, delta};
        double s = 0.0;
        for (std::size_t i = 0; i < ft.size(); ++i) {
            const double r = fv[i] - model::ebar(ft[i], mp);
            s += r * r;
        }
        ++res.n_evals;
        return s;
    };

    double ssr = ssr_at(th);
    double lambda = 1e-3;
    const std::size_t m = ft.size();
    std::vector<double> r0(m), jac[2]{std::vector<double>(m), std::vector<double>(m)};

    while (res.n_evals < opt.max_evals) {
        {
            ModelParams mp{th[0], th[1], se_prob, delta};
            for (std::size_t i = 0; i < m; ++i) r0[i] = fv[i] - model::ebar(ft[i], mp);
            ++res.n_evals;
        }
        for (int j = 0; j < 2; ++j) {
            const double h = 1e-6 * std::max(std::fabs(th[j]), 1.0);
            double q[2] = {th[0], th[1]};
            q[j] += h;
            ModelParams mp{q[0], q[1], se_prob, delta};
            for (std::size_t i = 0; i < m; ++i)
                jac[j][i] = ((fv[i] - model::ebar(ft[i], mp)) - r0[i]) / h;
            ++res.n_evals;
        }
        // Normal equations of the 2-parameter problem, solved directly.
        double a00 = 0.0, a01 = 0.0, a11 = 0.0, g0 = 0.0, g1 = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
            a00 += jac[0][i] * jac[0][i];
            a01 += jac[0][i] * jac[1][i];
            a11 += jac[1][i] * jac[1][i];
            g0 += jac[0][i] * r0[i];
            g1 += jac[1][i] * r0[i];
        }

        bool accepted = false;
        for (int attempt = 0; attempt < 12 && res.n_evals < opt.max_evals; ++attempt) {
            const double b00 = a00 * (1.0 + lambda), b11 = a11 * (1.0 + lambda);
            const double det = b00 * b11 - a01 * a01;
            if (det == 0.0) break;
            // jac holds residual derivatives, so g = J^T r is half the SSR
            // gradient and the damped Gauss-Newton update is th - A^{-1} g.
            const double d0 = (b11 * g0 - a01 * g1) / det;
            const double d1 = (b00 * g1 - a01 * g0) / det;
            double cand[2] = {clamp(th[0] - d0, lo[0], hi[0]),
                              clamp(th[1] - d1, lo[1], hi[1])};
            const double s = ssr_at(cand);
            if (s < ssr) {
                const double step = std::hypot(cand[0] - th[0], cand[1] - th[1]);
                const double rel_drop = (ssr - s) / std::max(ssr, 1e-300);
                th[0] = cand[0];
                th[1] = cand[1];
                ssr = s;
                lambda = std::max(lambda / 3.0, 1e-12);
                accepted = true;
                if (rel_drop < 1e-12 || step < 1e-10 * (1.0 + std::hypot(th[0], th[1])))
                    res.converged = true;
                break;
            }
            lambda *= 4.0;
        }
        if (!accepted) {
            // No downhill direction left at this damping range; treat the
            // current point as the (possibly boundary) minimum.
            res.converged = true;
        }
        if (res.converged) break;
    }

    res.d_q = th[0];
    res.t_s = th[1];
    res.residual_norm = ssr;
    return res;
}

std::string to_string(Shape s) {
    switch (s) {
        case Shape::Exponential: return "exponential";
        case Shape::Gaussian: return "gaussian";
        case Shape::Intermediate: return "intermediate";
    }
    return "intermediate";
}

ShapeVerdict classify_distribution(const MomentumDistribution& dist) {
    double fmax = 0.0;
    for (double p : dist.prob) fmax = std::max(fmax, p);
    if (fmax <= 0.0) throw ConfigError("classify_distribution: empty distribution");

    std::vector<double> u, u2, y;
    int nonzero = 0;
    for (std::size_t i = 0; i < dist.prob.size(); ++i) {
        if (dist.prob[i] > 0.0) ++nonzero;
        if (std::fabs(dist.center[i]) < 1.0) continue;  // initial-condition remnant
        if (dist.prob[i] <= 1e-6 * fmax) continue;
        u.push_back(std::fabs(dist.center[i]));
        u2.push_back(dist.center[i] * dist.center[i]);
        y.push_back(std::log(dist.prob[i]));
    }
    if (nonzero < 15 || u.size() < 15)
        throw ConfigError("classify_distribution: fewer than 15 usable bins");

    const LinFit fe = linear_lsq(u, y);
    const LinFit fg = linear_lsq(u2, y);

    ShapeVerdict v;
    v.exp_amplitude = std::exp(fe.intercept);
    v.p_loc = -1.0 / fe.slope;
    v.gauss_amplitude = std::exp(fg.intercept);
    v.sigma = fg.slope < 0.0 ? std::sqrt(-0.5 / fg.slope)
                             : std::numeric_limits<double>::quiet_NaN();
    v.ssr_exp = fe.ssr;
    v.ssr_gauss = fg.ssr;
    if (v.ssr_exp < v.ssr_gauss / 1.2)
        v.verdict = Shape::Exponential;
    else if (v.ssr_gauss < v.ssr_exp / 1.2)
        v.verdict = Shape::Gaussian;
    else
        v.verdict = Shape::Intermediate;
    return v;
}

ClassicalResult classical_diffusion(double K, int n_steps, int n_particles,
                                    std::uint64_t seed, int n_threads) {
    if (K < 0.0) throw ConfigError("classical_diffusion: K must be >= 0");
    if (n_steps < 1 || n_particles < 1)
        throw ConfigError("classical_diffusion: need n_steps, n_particles >= 1");

    const int nthreads = n_threads > 0 ? n_threads : omp_get_max_threads();
    const std::size_t nt = static_cast<std::size_t>(n_steps) + 1;
    std::vector<double> sum(nt, 0.0);

    constexpr int kBlock = 256;
    std::vector<std::vector<double>> traces(kBlock, std::vector<double>(nt));

    for (int base = 0; base < n_particles; base += kBlock) {
        const int count = std::min(kBlock, n_particles - base);
#pragma omp parallel for schedule(static) num_threads(nthreads)
        for (int i = 0; i < count; ++i) {
            RngStream rng(seed, static_cast<std::uint64_t>(base + i));
            double x = 2.0 * std::numbers::pi * rng.next_double();
            double p = 0.0;
            auto& tr = traces[static_cast<std::size_t>(i)];
            tr[0] = 0.0;
            for (int s = 1; s <= n_steps; ++s) {
                p += K * std::sin(x);
                x = std::fmod(x + p, 2.0 * std::numbers::pi);
                tr[static_cast<std::size_t>(s)] = 0.5 * p * p;
            }
        }
        for (int i = 0; i < count; ++i)
            for (std::size_t s = 0; s < nt; ++s) sum[s] += traces[static_cast<std::size_t>(i)][s];
    }

    ClassicalResult res;
    res.energy.resize(nt);
    for (std::size_t s = 0; s < nt; ++s)
        res.energy[s] = sum[s] / static_cast<double>(n_particles);

    std::vector<double> tx, ty;
    for (int s = n_steps / 2; s <= n_steps; ++s) {
        tx.push_back(static_cast<double>(s));
        ty.push_back(res.energy[static_cast<std::size_t>(s)]);
    }
    res.slope = tx.size() >= 2 ? linear_lsq(tx, ty).slope : 0.0;
    return res;
}

}  // namespace qkr::analysis
