#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <mutex>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "pfla/automaton.hpp"
#include "pfla/env.hpp"
#include "pfla/rng.hpp"

namespace pfla {

struct ExperimentConfig {
    EnvironmentSpec env = benchmark("E1");
    double eta = 0.99;
    std::uint64_t mc_samples = 1000;
    std::uint64_t replications = 10'000;
    std::uint64_t seed = 1;
    std::uint64_t max_iter = 1'000'000;
    Estimator estimator = Estimator::monte_carlo;
    std::size_t grid_cells = GridEstimator::kDefaultCells;
    unsigned threads = 0;  // 0: one per hardware thread

    [[nodiscard]] PflaOptions options() const {
        PflaOptions o;
        o.eta = eta;
        o.mc_samples = mc_samples;
        o.max_iter = max_iter;
        o.estimator = estimator;
        o.grid_cells = grid_cells;
        return o;
    }
};

inline void validate(const ExperimentConfig& c) {
    if (c.replications == 0) {
        throw std::domain_error("replications must be positive");
    }
    validate(c.options());
}

struct ExperimentReport {
    std::string env;
    double eta = 0.0;
    std::uint64_t mc_samples = 0;
    std::uint64_t replications = 0;
    std::uint64_t seed = 0;
    double accuracy = 0.0;
    double mean_iterations = 0.0;    // over correctly converged runs
    double stddev_iterations = 0.0;  // sample standard deviation, same runs
    std::uint64_t nonconverged = 0;
    double wall_time_s = 0.0;

    std::uint64_t correct = 0;
    std::uint64_t estimates = 0;  // hypothesis estimates computed and checked for normalization
    std::uint64_t total_iterations = 0;  // over all runs, correct or not

    /// Half-width of the normal 95% interval for mean_iterations.
    [[nodiscard]] double mean_iterations_ci95() const {
        return correct > 1 ? 1.96 * stddev_iterations / std::sqrt(static_cast<double>(correct)) : 0.0;
    }

    friend bool operator==(const ExperimentReport&, const ExperimentReport&) = default;
};

/// Accumulates run outcomes in replication order. Integer sums keep the
/// aggregate independent of how the runs were scheduled.
class OutcomeTally {
public:
    explicit OutcomeTally(const EnvironmentSpec& env) : env_(&env) {}

    void add(const RunOutcome& o) {
        ++runs_;
        estimates_ += o.estimates;
        total_iterations_ += o.iterations;
        if (!o.converged) {
            ++nonconverged_;
            return;
        }
        if (is_optimal(*env_, o.converged_action)) {
            ++correct_;
            sum_ += o.iterations;
            sum_sq_ += static_cast<unsigned __int128>(o.iterations) * o.iterations;
        }
    }

    void fill(ExperimentReport& r) const {
        r.correct = correct_;
        r.nonconverged = nonconverged_;
        r.estimates = estimates_;
        r.total_iterations = total_iterations_;
        r.accuracy = runs_ == 0 ? 0.0 : static_cast<double>(correct_) / static_cast<double>(runs_);
        if (correct_ > 0) {
            const auto n = static_cast<double>(correct_);
            r.mean_iterations = static_cast<double>(sum_) / n;
        }
        if (correct_ > 1) {
            // n * sum_sq - sum^2 is exact in 128 bits.
            const unsigned __int128 spread =
                static_cast<unsigned __int128>(correct_) * sum_sq_ -
                static_cast<unsigned __int128>(sum_) * sum_;
            const auto n = static_cast<double>(correct_);
            r.stddev_iterations = std::sqrt(static_cast<double>(spread) / (n * (n - 1.0)));
        }
    }

private:
    const EnvironmentSpec* env_;
    std::uint64_t runs_ = 0;
    std::uint64_t correct_ = 0;
    std::uint64_t nonconverged_ = 0;
    std::uint64_t estimates_ = 0;
    std::uint64_t total_iterations_ = 0;
    std::uint64_t sum_ = 0;
    unsigned __int128 sum_sq_ = 0;
};

/// Runs fn(i) for i in [0, count) on `threads` workers and returns the
/// results indexed by i. The first exception thrown by any call is rethrown.
template <class Fn>
auto parallel_map(std::uint64_t count, unsigned threads, Fn fn) {
    using Result = decltype(fn(std::uint64_t{}));
    std::vector<Result> results(count);
    if (threads == 0) {
        threads = std::max(1U, std::thread::hardware_concurrency());
    }
    threads = static_cast<unsigned>(std::min<std::uint64_t>(threads, count));
    std::atomic<std::uint64_t> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto worker = [&] {
        for (;;) {
            const std::uint64_t i = next.fetch_add(1);
            if (i >= count || failed.load()) {
                return;
            }
            try {
                results[i] = fn(i);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!error) {
                    error = std::current_exception();
                }
                failed = true;
            }
        }
    };
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(threads);
        for (unsigned t = 0; t < threads; ++t) {
            pool.emplace_back(worker);
        }
    }
    if (error) {
        std::rethrow_exception(error);
    }
    return results;
}

/// `replications` independent runs; run i uses RngStream(seed, i).
inline ExperimentReport run_experiment(const ExperimentConfig& config) {
    validate(config);
    const PflaOptions options = config.options();
    const auto start = std::chrono::steady_clock::now();
    const auto outcomes = parallel_map(config.replications, config.threads, [&](std::uint64_t i) {
        return run(config.env, options, RngStream(config.seed, i));
    });
    OutcomeTally tally(config.env);
    for (const auto& o : outcomes) {
        tally.add(o);
    }
    ExperimentReport r;
    r.env = config.env.label();
    r.eta = config.eta;
    r.mc_samples = config.mc_samples;
    r.replications = config.replications;
    r.seed = config.seed;
    tally.fill(r);
    r.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return r;
}

/// One report per benchmark E1..E9, in order, sharing every other setting.
inline std::vector<ExperimentReport> run_suite(ExperimentConfig base) {
    std::vector<ExperimentReport> out;
    for (const auto& env : benchmark_suite()) {
        base.env = env;
        out.push_back(run_experiment(base));
    }
    return out;
}

/// (pfla - other) / pfla: the fraction of PFLA's iterations saved (positive)
/// or added (negative) by the other scheme.
inline double relative_improvement(double iters_pfla, double iters_other) {
    if (!(iters_pfla > 0.0)) {
        throw std::domain_error("relative_improvement: PFLA iteration count must be positive");
    }
    return (iters_pfla - iters_other) / iters_pfla;
}

}  // namespace pfla
