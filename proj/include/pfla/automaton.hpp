#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "pfla/beta.hpp"
#include "pfla/env.hpp"
#include "pfla/exact.hpp"
#include "pfla/grid_estimator.hpp"
#include "pfla/mc.hpp"
#include "pfla/rng.hpp"

namespace pfla {

enum class Estimator : std::uint8_t {
    monte_carlo,         // N-sample Monte Carlo through tabulated CDFs (GridEstimator)
    monte_carlo_direct,  // N-sample Monte Carlo through gamma-ratio draws
    exact_two_action,    // closed form, two actions only
};

struct PflaOptions {
    double eta = 0.99;
    std::uint64_t mc_samples = 1000;
    std::uint64_t max_iter = 1'000'000;
    Estimator estimator = Estimator::monte_carlo;
    std::size_t grid_cells = GridEstimator::kDefaultCells;
};

inline void validate(const PflaOptions& o) {
    if (!(o.eta > 0.0 && o.eta < 1.0)) {
        throw std::domain_error("eta must lie in (0,1)");
    }
    if (o.mc_samples == 0) {
        throw std::domain_error("mc_samples must be positive");
    }
    if (o.max_iter == 0) {
        throw std::domain_error("max_iter must be positive");
    }
}

/// Optimistic prior shared by every action.
inline constexpr BetaPosterior kInitialPosterior{2, 1};

/// Times an action has been selected under the Beta(2,1) prior.
constexpr std::int64_t selections(const BetaPosterior& p) noexcept { return p.alpha + p.beta - 3; }

struct PflaState {
    std::vector<BetaPosterior> posteriors;
    std::uint64_t t = 0;
    HypothesisProbs last_probs;
};

inline PflaState init(std::size_t actions) {
    if (actions < 2) {
        throw std::domain_error("the automaton needs at least two actions");
    }
    return {std::vector<BetaPosterior>(actions, kInitialPosterior), 0, {}};
}

struct Selection {
    std::size_t first = 0;   // highest estimate
    std::size_t second = 0;  // runner-up
    std::size_t chosen = 0;
};

/// Picks the two actions with the top estimates (a random pair when three or
/// more share the maximum, a random runner-up when several share second place)
/// and returns whichever of the pair has been observed less, or either one
/// with equal probability when both have been observed equally often.
inline Selection select_pair(const HypothesisProbs& probs, std::span<const BetaPosterior> posteriors,
                             RngStream& rng) {
    const std::size_t r = probs.size();
    if (r < 2 || posteriors.size() != r) {
        throw std::invalid_argument("select_action: need matching estimates and posteriors, r >= 2");
    }
    auto pick_among = [&](double value, std::size_t skip) {
        std::vector<std::size_t> idx;
        for (std::size_t i = 0; i < r; ++i) {
            if (i != skip && probs[i] == value) {
                idx.push_back(i);
            }
        }
        return idx[rng.uniform_index(idx.size())];
    };
    const double top = probs.max();
    Selection s;
    s.first = pick_among(top, r);
    double runner_up = -1.0;
    for (std::size_t i = 0; i < r; ++i) {
        if (i != s.first && probs[i] > runner_up) {
            runner_up = probs[i];
        }
    }
    s.second = pick_among(runner_up, s.first);

    const std::int64_t n1 = posteriors[s.first].total();
    const std::int64_t n2 = posteriors[s.second].total();
    if (n1 < n2) {
        s.chosen = s.first;
    } else if (n2 < n1) {
        s.chosen = s.second;
    } else {
        s.chosen = rng.bernoulli(0.5) ? s.first : s.second;
    }
    return s;
}

inline std::size_t select_action(const HypothesisProbs& probs, std::span<const BetaPosterior> posteriors,
                                 RngStream& rng) {
    return select_pair(probs, posteriors, rng).chosen;
}

struct RunOutcome {
    std::size_t converged_action = 0;
    std::uint64_t iterations = 0;
    bool converged = false;
    double terminal_max_prob = 0.0;
    std::uint64_t estimates = 0;  // hypothesis estimates computed, each checked for normalization
};

/// One automaton run. Randomness comes from three children of the run's
/// stream: 0 for Monte Carlo sampling, 1 for tie-breaking; child 2 is reserved
/// for environment feedback (see `run`), so changing N never perturbs the
/// feedback sequence.
class Automaton {
public:
    Automaton(std::size_t actions, PflaOptions options, const RngStream& rng)
        : options_(options),
          state_(init(actions)),
          mc_rng_(rng.substream(0)),
          tie_rng_(rng.substream(1)) {
        validate(options_);
        if (options_.estimator == Estimator::exact_two_action && actions != 2) {
            throw std::invalid_argument("the closed-form estimator handles exactly two actions");
        }
        if (options_.estimator == Estimator::monte_carlo) {
            grid_.emplace(state_.posteriors, options_.grid_cells);
        }
    }

    [[nodiscard]] const PflaState& state() const noexcept { return state_; }
    [[nodiscard]] const PflaOptions& options() const noexcept { return options_; }
    [[nodiscard]] std::uint64_t estimates() const noexcept { return estimates_; }

    /// Recomputes the hypothesis probabilities from the current posteriors.
    const HypothesisProbs& estimate() {
        switch (options_.estimator) {
            case Estimator::monte_carlo:
                state_.last_probs = grid_->estimate(options_.mc_samples, mc_rng_);
                break;
            case Estimator::monte_carlo_direct:
                state_.last_probs =
                    estimate_hypothesis_probs(state_.posteriors, options_.mc_samples, mc_rng_);
                break;
            case Estimator::exact_two_action: {
                const double g = prob_first_beats_second(state_.posteriors[0], state_.posteriors[1]).value;
                state_.last_probs = HypothesisProbs::from_probabilities({g, 1.0 - g});
                break;
            }
        }
        if (!state_.last_probs.normalized()) {
            throw std::logic_error("hypothesis estimate does not partition its samples");
        }
        ++estimates_;
        return state_.last_probs;
    }

    [[nodiscard]] bool converged() const noexcept { return state_.last_probs.max() > options_.eta; }

    /// Chooses the next action from the latest estimate.
    Selection select() {
        if (state_.last_probs.empty()) {
            throw std::logic_error("select before estimate");
        }
        return select_pair(state_.last_probs, state_.posteriors, tie_rng_);
    }

    void observe(std::size_t action, Feedback fb) {
        BetaPosterior& p = state_.posteriors.at(action);
        p = updated(p, fb);
        if (grid_) {
            grid_->update(action, fb);
        }
        ++state_.t;
    }

    /// estimate -> select -> pull -> update. Returns the action played.
    template <class Pull>
    std::size_t step(Pull&& pull) {
        estimate();
        return act(pull);
    }

    /// Repeats steps until the largest estimate exceeds eta or max_iter
    /// interactions have been spent. The threshold is checked right after each
    /// estimate, so a satisfied run stops without a further pull.
    template <class Pull>
    RunOutcome run(Pull&& pull) {
        for (;;) {
            estimate();
            if (converged() || state_.t >= options_.max_iter) {
                break;
            }
            act(pull);
        }
        RunOutcome out;
        out.converged_action = state_.last_probs.argmax();
        out.iterations = state_.t;
        out.converged = converged();
        out.terminal_max_prob = state_.last_probs.max();
        out.estimates = estimates_;
        return out;
    }

private:
    template <class Pull>
    std::size_t act(Pull& pull) {
        const std::size_t a = select().chosen;
        const Feedback fb = pull(a);
        observe(a, fb);
        return a;
    }

    PflaOptions options_;
    PflaState state_;
    RngStream mc_rng_;
    RngStream tie_rng_;
    std::optional<GridEstimator> grid_;
    std::uint64_t estimates_ = 0;
};

inline RunOutcome run(const EnvironmentSpec& env, const PflaOptions& options, const RngStream& rng) {
    Automaton automaton(env.actions(), options, rng);
    RngStream feedback = rng.substream(2);
    return automaton.run([&](std::size_t a) { return pull(env, a, feedback); });
}

}  // namespace pfla
