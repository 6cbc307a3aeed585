#include "qkr/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <memory>
#include <stdexcept>
#include <string>

#include <omp.h>

namespace qkr {

namespace {

bool in_window(double beta, double delta) { return std::fabs(beta) <= 0.5 * delta; }

// Dense bin accumulator over index round(x / w), offset to non-negative.
class HistAccum {
public:
    HistAccum(int n_max, double w) : w_(w) {
        half_span_ = static_cast<long long>(std::ceil((n_max + 1.0) / w)) + 1;
        mass_.assign(static_cast<std::size_t>(2 * half_span_ + 1), 0.0);
    }

    void add(const StateSnapshot& s) {
        const int n_max = (static_cast<int>(s.prob.size()) - 1) / 2;
        for (int i = 0; i < static_cast<int>(s.prob.size()); ++i) {
            const double p = s.prob[static_cast<std::size_t>(i)];
            if (p == 0.0) continue;
            const long long idx = std::llround((i - n_max + s.beta) / w_);
            mass_[static_cast<std::size_t>(idx + half_span_)] += p;
        }
    }

    MomentumDistribution finalize(double divisor) const {
        MomentumDistribution d;
        d.bin_width = w_;
        const long long n = static_cast<long long>(mass_.size());
        long long lo = 0, hi = n - 1;
        while (lo < n && mass_[static_cast<std::size_t>(lo)] == 0.0) ++lo;
        while (hi >= lo && mass_[static_cast<std::size_t>(hi)] == 0.0) --hi;
        for (long long i = lo; i <= hi; ++i) {
            d.center.push_back(static_cast<double>(i - half_span_) * w_);
            d.prob.push_back(mass_[static_cast<std::size_t>(i)] / divisor);
        }
        return d;
    }

private:
    double w_;
    long long half_span_;
    std::vector<double> mass_;
};

// Order-fixed reduction shared by the serial and parallel runners: add()
// is called for trajectory indices 0, 1, 2, ... exactly once each.
class Accumulator {
public:
    Accumulator(const SimParams& p, double bin_width) : p_(p) {
        const std::size_t nt = static_cast<std::size_t>(p.n_kicks) + 1;
        energy_sum_.assign(nt, 0.0);
        filtered_sum_.assign(nt, 0.0);
        detected_.assign(nt, 0);
        f0_.assign(nt, 0);
        for (std::size_t j = 0; j < p.checkpoints.size(); ++j) {
            unfiltered_.emplace_back(p.n_max, bin_width);
            filtered_hist_.emplace_back(p.n_max, bin_width);
        }
    }

    void add(const TrajectoryResult& r) {
        const int first_se = r.se_events.empty()
                                 ? std::numeric_limits<int>::max()
                                 : r.se_events.front().kick_index;
        for (std::size_t t = 0; t < r.energies.size(); ++t) {
            energy_sum_[t] += r.energies[t];
            if (r.detected[t]) {
                filtered_sum_[t] += r.energies[t];
                ++detected_[t];
            }
            if (first_se > static_cast<int>(t)) ++f0_[t];
        }
        total_se_ += r.se_count();
        for (std::size_t j = 0; j < r.snapshots.size(); ++j) {
            unfiltered_[j].add(r.snapshots[j]);
            if (in_window(r.snapshots[j].beta, p_.delta)) filtered_hist_[j].add(r.snapshots[j]);
        }
    }

    EnsembleResult finalize() const {
        EnsembleResult out;
        out.params = p_;
        const double n = static_cast<double>(p_.n_traj);
        const std::size_t nt = energy_sum_.size();
        out.mean_energy.resize(nt);
        out.filtered_energy.resize(nt);
        out.pop_f0.resize(nt);
        out.pop_fdelta.resize(nt);
        out.pop_rest.resize(nt);
        out.detected_count = detected_;
        out.f0_count = f0_;
        out.total_se = total_se_;
        for (std::size_t t = 0; t < nt; ++t) {
            out.mean_energy[t] = energy_sum_[t] / n;
            out.filtered_energy[t] =
                detected_[t] > 0 ? filtered_sum_[t] / static_cast<double>(detected_[t])
                                 : std::numeric_limits<double>::quiet_NaN();
            out.pop_f0[t] = static_cast<double>(f0_[t]) / n;
            out.pop_fdelta[t] = static_cast<double>(detected_[t] - f0_[t]) / n;
            out.pop_rest[t] = static_cast<double>(p_.n_traj - detected_[t]) / n;
        }
        for (std::size_t j = 0; j < unfiltered_.size(); ++j) {
            EnsembleResult::CheckpointDist cd;
            cd.kick = p_.checkpoints[j];
            cd.unfiltered = unfiltered_[j].finalize(n);
            cd.filtered = filtered_hist_[j].finalize(n);
            out.distributions.push_back(std::move(cd));
        }
        return out;
    }

private:
    SimParams p_;
    std::vector<double> energy_sum_;
    std::vector<double> filtered_sum_;
    std::vector<long long> detected_;
    std::vector<long long> f0_;
    long long total_se_ = 0;
    std::vector<HistAccum> unfiltered_;
    std::vector<HistAccum> filtered_hist_;
};

}  // namespace

QuantumState sample_initial(const SimParams& p, RngStream& rng) {
    const double beta = p.delta * (rng.next_double() - 0.5);
    return plane_wave(p.n_max, p.kbar, beta);
}

TrajectoryResult run_trajectory(const SimParams& p, std::uint64_t traj_index,
                                Propagator& prop) {
    RngStream rng(p.seed, traj_index);
    QuantumState s = sample_initial(p, rng);

    TrajectoryResult r;
    r.energies.reserve(static_cast<std::size_t>(p.n_kicks) + 1);
    r.detected.reserve(static_cast<std::size_t>(p.n_kicks) + 1);

    auto checkpoint_it = p.checkpoints.begin();
    auto record = [&](int kick) {
        r.energies.push_back(energy(s));
        r.detected.push_back(in_window(s.beta, p.delta) ? 1 : 0);
        if (checkpoint_it != p.checkpoints.end() && *checkpoint_it == kick) {
            StateSnapshot snap;
            snap.kick = kick;
            snap.beta = s.beta;
            snap.prob.resize(s.amps.size());
            for (std::size_t i = 0; i < s.amps.size(); ++i) snap.prob[i] = std::norm(s.amps[i]);
            r.snapshots.push_back(std::move(snap));
            ++checkpoint_it;
        }
    };

    record(0);
    for (int k = 1; k <= p.n_kicks; ++k) {
        try {
            if (auto ev = prop.step(s, p.se_prob, rng)) {
                ev->kick_index = k;
                r.se_events.push_back(*ev);
            }
        } catch (const BoundaryLeakError& e) {
            throw BoundaryLeakError("trajectory " + std::to_string(traj_index),
                                    e.leaked_probability);
        }
        record(k);
    }
    r.final_beta = s.beta;
    return r;
}

TrajectoryResult run_trajectory(const SimParams& p, std::uint64_t traj_index) {
    Propagator prop(p);
    return run_trajectory(p, traj_index, prop);
}

EnsembleResult run_ensemble_serial(const SimParams& p, double bin_width) {
    p.validate();
    Accumulator acc(p, bin_width);
    Propagator prop(p);
    for (int i = 0; i < p.n_traj; ++i)
        acc.add(run_trajectory(p, static_cast<std::uint64_t>(i), prop));
    return acc.finalize();
}

EnsembleResult run_ensemble(const SimParams& p, int n_threads, double bin_width) {
    p.validate();
    const int nthreads = n_threads > 0 ? n_threads : omp_get_max_threads();

    Accumulator acc(p, bin_width);
    std::vector<std::unique_ptr<Propagator>> props(static_cast<std::size_t>(nthreads));

    constexpr int kBlock = 256;
    std::vector<TrajectoryResult> results(kBlock);
    std::vector<std::exception_ptr> errors(kBlock);

    for (int base = 0; base < p.n_traj; base += kBlock) {
        const int count = std::min(kBlock, p.n_traj - base);

#pragma omp parallel num_threads(nthreads)
        {
            const std::size_t tid = static_cast<std::size_t>(omp_get_thread_num());
            if (!props[tid]) props[tid] = std::make_unique<Propagator>(p);
#pragma omp for schedule(dynamic)
            for (int i = 0; i < count; ++i) {
                try {
                    results[static_cast<std::size_t>(i)] = run_trajectory(
                        p, static_cast<std::uint64_t>(base + i), *props[tid]);
                    errors[static_cast<std::size_t>(i)] = nullptr;
                } catch (...) {
                    errors[static_cast<std::size_t>(i)] = std::current_exception();
                }
            }
        }

        // Index order keeps both error selection and floating-point
        // reduction independent of the schedule.
        for (int i = 0; i < count; ++i) {
            if (errors[static_cast<std::size_t>(i)])
                std::rethrow_exception(errors[static_cast<std::size_t>(i)]);
            acc.add(results[static_cast<std::size_t>(i)]);
        }
    }
    return acc.finalize();
}

MomentumDistribution momentum_histogram(const std::vector<StateSnapshot>& snaps,
                                        Filter filter, double delta,
                                        double bin_width, bool renormalize) {
    if (!(bin_width > 0.0)) throw std::invalid_argument("bin_width must be > 0");
    int n_max = 0;
    for (const auto& s : snaps)
        n_max = std::max(n_max, (static_cast<int>(s.prob.size()) - 1) / 2);
    HistAccum h(n_max, bin_width);
    for (const auto& s : snaps) {
        if (filter == Filter::Windows && !in_window(s.beta, delta)) continue;
        h.add(s);
    }
    double divisor = snaps.empty() ? 1.0 : static_cast<double>(snaps.size());
    MomentumDistribution d = h.finalize(divisor);
    if (renormalize) {
        double total = 0.0;
        for (double v : d.prob) total += v;
        if (total > 0.0)
            for (double& v : d.prob) v /= total;
    }
    return d;
}

}  // namespace qkr
