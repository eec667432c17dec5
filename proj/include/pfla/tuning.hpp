#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "pfla/automaton.hpp"
#include "pfla/env.hpp"
#include "pfla/rng.hpp"

namespace pfla {

/// A learning scheme with a resolution parameter n (and optionally a
/// perturbation parameter gamma) fixed at construction.
class TunableScheme {
public:
    virtual ~TunableScheme() = default;
    virtual RunOutcome run(const EnvironmentSpec& env, const RngStream& rng) = 0;
};

using SchemeFactory =
    std::function<std::unique_ptr<TunableScheme>(std::uint64_t n, std::optional<int> gamma)>;

/// Test scheme with a known answer: it converges to the optimal action
/// exactly when n >= n_star, otherwise to the first suboptimal action.
/// A run costs base + per_n * n + per_gamma * |gamma - gamma_star|
/// interactions plus a uniform jitter in [0, jitter).
class SyntheticScheme final : public TunableScheme {
public:
    struct Params {
        std::uint64_t n_star = 7;
        int gamma_star = 3;
        std::uint64_t base = 20;
        std::uint64_t per_n = 10;
        std::uint64_t per_gamma = 5;
        std::uint64_t jitter = 4;
    };

    SyntheticScheme(std::uint64_t n, std::optional<int> gamma, Params params)
        : n_(n), gamma_(gamma), params_(params) {
        if (n_ == 0) {
            throw std::domain_error("resolution parameter must be at least 1");
        }
    }

    RunOutcome run(const EnvironmentSpec& env, const RngStream& rng) override {
        RngStream draw = rng;
        const auto best = optimal_actions(env);
        std::size_t wrong = 0;
        while (is_optimal(env, wrong)) {
            ++wrong;
        }
        RunOutcome out;
        out.converged = true;
        out.converged_action = n_ >= params_.n_star ? best.front() : wrong;
        out.terminal_max_prob = 1.0;
        out.iterations = params_.base + params_.per_n * n_;
        if (gamma_) {
            out.iterations += params_.per_gamma *
                              static_cast<std::uint64_t>(std::abs(*gamma_ - params_.gamma_star));
        }
        if (params_.jitter > 0) {
            out.iterations += draw.uniform_index(params_.jitter);
        }
        return out;
    }

    static SchemeFactory factory(Params params) {
        return [params](std::uint64_t n, std::optional<int> gamma) {
            return std::make_unique<SyntheticScheme>(n, gamma, params);
        };
    }

private:
    std::uint64_t n_;
    std::optional<int> gamma_;
    Params params_;
};

struct TuningOptions {
    std::uint64_t ne = 750;       // consecutive correct runs that end a search
    std::uint64_t repeats = 20;   // independent searches averaged
    std::uint64_t budget = 10'000'000'000;  // interaction cap over the whole tuning job
    std::uint64_t eval_replications = 1000;  // speed evaluation per (n, gamma)
};

struct ResolutionResult {
    double average_n = 0.0;
    std::vector<std::uint64_t> best_n;  // one per completed repeat
    std::uint64_t interactions = 0;
};

struct GammaEntry {
    int gamma = 0;
    double average_n = 0.0;
    std::uint64_t n = 0;  // ceil(average_n), the resolution evaluated
    double mean_iterations = 0.0;
    std::uint64_t interactions = 0;  // search plus evaluation
};

struct GammaResult {
    int best_gamma = 0;
    std::uint64_t best_n = 0;
    double best_mean_iterations = 0.0;
    std::vector<GammaEntry> grid;
    std::uint64_t interactions = 0;
};

class BudgetExceeded : public std::runtime_error {
public:
    BudgetExceeded(ResolutionResult partial, std::uint64_t budget)
        : std::runtime_error("tuning exceeded its budget of " + std::to_string(budget) +
                             " interactions"),
          partial_(std::move(partial)) {}

    [[nodiscard]] const ResolutionResult& partial() const noexcept { return partial_; }

private:
    ResolutionResult partial_;
};

inline void validate(const TuningOptions& o) {
    if (o.ne == 0 || o.repeats == 0) {
        throw std::domain_error("NE and repeats must be positive");
    }
    if (o.eval_replications == 0) {
        throw std::domain_error("evaluation replications must be positive");
    }
}

namespace detail {

inline bool correct_run(const EnvironmentSpec& env, const RunOutcome& o) {
    return o.converged && is_optimal(env, o.converged_action);
}

// `spent` carries interactions already used by an enclosing job.
inline ResolutionResult tune_resolution(const SchemeFactory& factory, std::optional<int> gamma,
                                        const EnvironmentSpec& env, const TuningOptions& options,
                                        const RngStream& rng, std::uint64_t spent) {
    ResolutionResult result;
    auto charge = [&](std::uint64_t cost) {
        result.interactions += cost;
        if (spent + result.interactions > options.budget) {
            if (!result.best_n.empty()) {
                double sum = 0.0;
                for (auto n : result.best_n) {
                    sum += static_cast<double>(n);
                }
                result.average_n = sum / static_cast<double>(result.best_n.size());
            }
            throw BudgetExceeded(result, options.budget);
        }
    };
    double sum = 0.0;
    for (std::uint64_t rep = 0; rep < options.repeats; ++rep) {
        const RngStream search = rng.substream(rep);
        std::uint64_t n = 1;
        std::uint64_t streak = 0;
        std::uint64_t experiment = 0;
        auto scheme = factory(n, gamma);
        while (streak < options.ne) {
            const RunOutcome o = scheme->run(env, search.substream(experiment++));
            charge(o.iterations);
            if (correct_run(env, o)) {
                ++streak;
            } else {
                streak = 0;
                scheme = factory(++n, gamma);
            }
        }
        result.best_n.push_back(n);
        sum += static_cast<double>(n);
    }
    result.average_n = sum / static_cast<double>(options.repeats);
    return result;
}

}  // namespace detail

/// Smallest resolution that yields NE consecutive correct runs, starting from
/// n = 1 and incrementing after every wrong convergence; averaged over
/// `repeats` independent searches.
inline ResolutionResult tune_resolution(const SchemeFactory& factory, const EnvironmentSpec& env,
                                        const TuningOptions& options, const RngStream& rng,
                                        std::optional<int> gamma = std::nullopt) {
    validate(options);
    return detail::tune_resolution(factory, gamma, env, options, rng, 0);
}

/// For each gamma in [gamma_min, gamma_max]: tune n, then measure mean
/// iterations over eval_replications runs at (ceil(average n), gamma).
/// The fastest pair wins; ties go to the smaller gamma.
inline GammaResult tune_gamma_grid(const SchemeFactory& factory, const EnvironmentSpec& env,
                                   int gamma_min, int gamma_max, const TuningOptions& options,
                                   const RngStream& rng) {
    validate(options);
    if (gamma_min > gamma_max) {
        throw std::domain_error("empty gamma range");
    }
    GammaResult out;
    for (int gamma = gamma_min; gamma <= gamma_max; ++gamma) {
        const RngStream g_rng = rng.substream(static_cast<std::uint64_t>(gamma - gamma_min));
        GammaEntry entry;
        entry.gamma = gamma;
        ResolutionResult res;
        try {
            res = detail::tune_resolution(factory, gamma, env, options, g_rng.substream(0),
                                          out.interactions);
        } catch (const BudgetExceeded& e) {
            ResolutionResult partial = e.partial();
            partial.interactions += out.interactions;
            throw BudgetExceeded(std::move(partial), options.budget);
        }
        entry.average_n = res.average_n;
        entry.n = static_cast<std::uint64_t>(std::ceil(res.average_n));
        entry.interactions = res.interactions;
        out.interactions += res.interactions;

        const RngStream eval = g_rng.substream(1);
        auto scheme = factory(entry.n, gamma);
        std::uint64_t correct = 0;
        std::uint64_t sum = 0;
        for (std::uint64_t i = 0; i < options.eval_replications; ++i) {
            const RunOutcome o = scheme->run(env, eval.substream(i));
            entry.interactions += o.iterations;
            out.interactions += o.iterations;
            if (out.interactions > options.budget) {
                ResolutionResult partial;
                partial.interactions = out.interactions;
                throw BudgetExceeded(std::move(partial), options.budget);
            }
            if (detail::correct_run(env, o)) {
                ++correct;
                sum += o.iterations;
            }
        }
        entry.mean_iterations = correct == 0 ? std::numeric_limits<double>::infinity()
                                             : static_cast<double>(sum) / static_cast<double>(correct);
        if (out.grid.empty() || entry.mean_iterations < out.best_mean_iterations) {
            out.best_gamma = gamma;
            out.best_n = entry.n;
            out.best_mean_iterations = entry.mean_iterations;
        }
        out.grid.push_back(entry);
    }
    return out;
}

/// Gamma search ranges: 1-10 for two actions, 1-20 for more, 1-30 for E7.
inline std::pair<int, int> default_gamma_range(const EnvironmentSpec& env) {
    if (env.label() == "E7") {
        return {1, 30};
    }
    return {1, env.actions() == 2 ? 10 : 20};
}

}  // namespace pfla
