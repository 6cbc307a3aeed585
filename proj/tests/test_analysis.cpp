#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstring>
#include <limits>
#include <vector>

#include "oracles.hpp"
#include "qkr/analysis.hpp"
#include "qkr/model.hpp"
#include "qkr/rng.hpp"

using namespace qkr;
using analysis::Shape;

namespace {

// Model trace on integer kicks with optional multiplicative uniform noise.
std::vector<double> synthetic_trace(const ModelParams& mp, int horizon,
                                    double noise, std::uint64_t seed,
                                    std::vector<double>* t_out) {
    RngStream rng(seed, 0);
    std::vector<double> v;
    for (int t = 0; t <= horizon; ++t) {
        t_out->push_back(static_cast<double>(t));
        const double eta = 2.0 * rng.next_double() - 1.0;
        v.push_back(model::ebar(static_cast<double>(t), mp) * (1.0 + noise * eta));
    }
    return v;
}

MomentumDistribution exp_profile(double p_loc, int half_span, double scale) {
    MomentumDistribution d;
    d.bin_width = 1.0;
    for (int c = -half_span; c <= half_span; ++c) {
        d.center.push_back(static_cast<double>(c));
        d.prob.push_back(scale * std::exp(-std::fabs(static_cast<double>(c)) / p_loc));
    }
    return d;
}

MomentumDistribution gauss_profile(double sigma, int half_span, double step) {
    MomentumDistribution d;
    d.bin_width = step;
    for (double c = -half_span; c <= half_span + 0.5 * step; c += step) {
        d.center.push_back(c);
        d.prob.push_back(std::exp(-c * c / (2.0 * sigma * sigma)));
    }
    return d;
}

}  // namespace

TEST_CASE("fit recovers the generating parameters from a noisy trace") {
    ModelParams mp{30.7, 41.3, 0.01, 0.04};
    std::vector<double> t;
    const std::vector<double> v = synthetic_trace(mp, 500, 0.01, 77, &t);
    const analysis::FitResult f = analysis::fit_energy_curve(t, v, mp.se_prob, mp.delta);
    CHECK(f.converged);
    CHECK(std::fabs(f.d_q - mp.d_q) / mp.d_q < 0.02);
    CHECK(std::fabs(f.t_s - mp.t_s) / mp.t_s < 0.02);
    CHECK(f.n_evals < 4000);
}

TEST_CASE("amplitude scaling moves only the diffusion constant") {
    ModelParams mp{30.7, 41.3, 0.0, 0.04};
    std::vector<double> t;
    const std::vector<double> base = synthetic_trace(mp, 400, 0.0, 1, &t);
    for (double c : {0.5, 2.0}) {
        std::vector<double> v = base;
        for (double& x : v) x *= c;
        const analysis::FitResult f = analysis::fit_energy_curve(t, v, 0.0, mp.delta);
        CHECK(f.converged);
        CHECK(std::fabs(f.d_q - c * mp.d_q) / (c * mp.d_q) < 0.005);
        CHECK(std::fabs(f.t_s - mp.t_s) / mp.t_s < 0.005);
    }
}

TEST_CASE("fit skips gaps left by empty detection") {
    ModelParams mp{26.3, 48.8, 0.005, 0.04};
    std::vector<double> t;
    std::vector<double> v = synthetic_trace(mp, 300, 0.005, 9, &t);
    for (std::size_t i = 0; i < v.size(); i += 7)
        v[i] = std::numeric_limits<double>::quiet_NaN();
    const analysis::FitResult f = analysis::fit_energy_curve(t, v, mp.se_prob, mp.delta);
    CHECK(f.converged);
    CHECK(std::fabs(f.d_q - mp.d_q) / mp.d_q < 0.02);
    CHECK(std::fabs(f.t_s - mp.t_s) / mp.t_s < 0.02);
}

TEST_CASE("fit refuses sparse input") {
    ModelParams mp{30.7, 41.3, 0.01, 0.04};
    std::vector<double> t;
    std::vector<double> v = synthetic_trace(mp, 30, 0.0, 2, &t);
    for (std::size_t i = 12; i < v.size(); ++i)
        v[i] = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(analysis::fit_energy_curve(t, v, mp.se_prob, mp.delta), ConfigError);

    std::vector<double> short_t(t.begin(), t.end() - 1);
    CHECK_THROWS_AS(analysis::fit_energy_curve(short_t, v, mp.se_prob, mp.delta),
                    ConfigError);
}

TEST_CASE("exponential profile is classified with its decay scale") {
    const MomentumDistribution d = exp_profile(12.0, 60, 1.0);
    const analysis::ShapeVerdict v = analysis::classify_distribution(d);
    CHECK(v.verdict == Shape::Exponential);
    CHECK(std::fabs(v.p_loc - 12.0) / 12.0 < 0.02);
    CHECK(v.ssr_exp < v.ssr_gauss);
}

TEST_CASE("noisy exponential keeps its verdict") {
    MomentumDistribution d = exp_profile(12.0, 60, 1.0);
    RngStream rng(4, 0);
    for (double& p : d.prob) p *= 1.0 + 0.05 * (2.0 * rng.next_double() - 1.0);
    const analysis::ShapeVerdict v = analysis::classify_distribution(d);
    CHECK(v.verdict == Shape::Exponential);
    CHECK(std::fabs(v.p_loc - 12.0) / 12.0 < 0.10);
}

TEST_CASE("gaussian profile is classified with its width") {
    const MomentumDistribution d = gauss_profile(40.0, 150, 2.0);
    const analysis::ShapeVerdict v = analysis::classify_distribution(d);
    CHECK(v.verdict == Shape::Gaussian);
    CHECK(std::fabs(v.sigma - 40.0) / 40.0 < 0.02);
    CHECK(v.ssr_gauss < v.ssr_exp);
}

TEST_CASE("classification ignores overall normalization") {
    const MomentumDistribution d1 = exp_profile(9.0, 50, 1.0);
    const MomentumDistribution d2 = exp_profile(9.0, 50, 137.0);
    const analysis::ShapeVerdict v1 = analysis::classify_distribution(d1);
    const analysis::ShapeVerdict v2 = analysis::classify_distribution(d2);
    CHECK(v1.verdict == v2.verdict);
    CHECK(v1.p_loc == doctest::Approx(v2.p_loc).epsilon(1e-9));
    CHECK(v2.exp_amplitude == doctest::Approx(137.0 * v1.exp_amplitude).epsilon(1e-6));
}

TEST_CASE("classification refuses starved histograms") {
    MomentumDistribution d;
    d.bin_width = 1.0;
    for (int c = -5; c <= 5; ++c) {
        d.center.push_back(static_cast<double>(c));
        d.prob.push_back(std::exp(-std::fabs(static_cast<double>(c))));
    }
    CHECK_THROWS_AS(analysis::classify_distribution(d), ConfigError);
}

TEST_CASE("kick-free classical ensemble stores no energy") {
    const analysis::ClassicalResult r = analysis::classical_diffusion(0.0, 40, 500, 3);
    for (double e : r.energy) CHECK(e == 0.0);
    CHECK(r.slope == 0.0);
}

TEST_CASE("first classical kick deposits the impulsive energy") {
    const analysis::ClassicalResult r = analysis::classical_diffusion(10.0, 1, 100000, 3);
    CHECK(r.energy[0] == 0.0);
    CHECK(std::fabs(r.energy[1] - 25.0) / 25.0 < 0.01);
}

TEST_CASE("chaotic classical transport is diffusive at the expected rate") {
    const analysis::ClassicalResult r = analysis::classical_diffusion(10.0, 200, 4000, 7);
    CHECK(r.slope > 15.0);   // quasilinear rate K^2/4 = 25 with
    CHECK(r.slope < 45.0);   // oscillatory corrections
    for (double e : r.energy) CHECK(e >= 0.0);
}

TEST_CASE("classical energy keeps growing above the chaos border") {
    const analysis::ClassicalResult r = analysis::classical_diffusion(5.0, 300, 20000, 11);
    CHECK(r.energy[100] > r.energy[50]);
    CHECK(r.energy[200] > r.energy[100]);
    CHECK(r.energy[300] > r.energy[200]);
}

TEST_CASE("classical reduction is thread-count independent") {
    const analysis::ClassicalResult a = analysis::classical_diffusion(7.0, 50, 600, 5, 1);
    const analysis::ClassicalResult b = analysis::classical_diffusion(7.0, 50, 600, 5, 3);
    REQUIRE(a.energy.size() == b.energy.size());
    CHECK(std::memcmp(a.energy.data(), b.energy.data(),
                      a.energy.size() * sizeof(double)) == 0);
    CHECK(a.slope == b.slope);
}
