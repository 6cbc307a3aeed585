/* Timing comparison of the OpenMP ensemble runner against the plain-loop
 * reference, with a bitwise equality check of everything both produce.
 * Usage: qkr_bench [n_traj] [n_kicks] [max_threads]
 */
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <cstring>

#include <omp.h>

#include "qkr/ensemble.hpp"

using namespace qkr;

namespace {

bool bits_equal(const std::vector<double>& a, const std::vector<double>& b) {
    return a.size() == b.size() &&
           (a.empty() || std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0);
}

bool same_result(const EnsembleResult& a, const EnsembleResult& b) {
    if (!bits_equal(a.mean_energy, b.mean_energy)) return false;
    if (!bits_equal(a.filtered_energy, b.filtered_energy)) return false;
    if (!bits_equal(a.pop_f0, b.pop_f0)) return false;
    if (!bits_equal(a.pop_fdelta, b.pop_fdelta)) return false;
    if (a.total_se != b.total_se) return false;
    if (a.distributions.size() != b.distributions.size()) return false;
    for (std::size_t i = 0; i < a.distributions.size(); ++i) {
        if (!bits_equal(a.distributions[i].unfiltered.prob,
                        b.distributions[i].unfiltered.prob))
            return false;
        if (!bits_equal(a.distributions[i].filtered.prob, b.distributions[i].filtered.prob))
            return false;
    }
    return true;
}

template <typename F>
double seconds(F&& f) {
    const auto t0 = std::chrono::steady_clock::now();
    f();
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

int main(int argc, char** argv) {
    SimParams p;
    p.K = 10.0;
    p.kbar = 2.9;
    p.se_prob = 0.01;
    p.delta = 0.04;
    p.n_traj = argc > 1 ? std::atoi(argv[1]) : 256;
    p.n_kicks = argc > 2 ? std::atoi(argv[2]) : 200;
    p.n_max = 256;
    p.seed = 7;
    p.checkpoints = {p.n_kicks};
    const int max_threads = argc > 3 ? std::atoi(argv[3]) : omp_get_max_threads();

    std::printf("ensemble: %d trajectories x %d kicks, n_max=%d\n", p.n_traj, p.n_kicks,
                p.n_max);

    EnsembleResult ref;
    const double t_ref = seconds([&] { ref = run_ensemble_serial(p); });
    std::printf("%-18s %8.3fs\n", "serial reference", t_ref);

    bool all_equal = true;
    for (int t = 1; t <= max_threads; t *= 2) {
        EnsembleResult par;
        const double t_par = seconds([&] { par = run_ensemble(p, t); });
        const bool eq = same_result(ref, par);
        all_equal = all_equal && eq;
        std::printf("omp %2d thread%s  %8.3fs  speedup %5.2fx  %s\n", t, t > 1 ? "s" : " ",
                    t_par, t_ref / t_par, eq ? "bit-identical" : "MISMATCH");
    }
    if (!all_equal) {
        std::printf("FAIL: parallel output diverged from the serial reference\n");
        return 1;
    }
    return 0;
}
