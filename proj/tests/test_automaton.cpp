#include <array>
#include <cmath>
#include <map>
#include <stdexcept>
#include <utility>
#include <vector>

#include <gtest/gtest.h>

#include "pfla/automaton.hpp"

using namespace pfla;

namespace {

// Posterior under the Beta(2,1) prior after `s` selections, all penalties.
BetaPosterior selected(std::int64_t s) { return {2, 1 + s}; }

struct Stats {
    double mean = 0;
    double var = 0;
    double accuracy = 0;
};

Stats many_runs(const EnvironmentSpec& env, const PflaOptions& o, std::uint64_t seed, int reps) {
    double s = 0, ss = 0;
    int correct = 0;
    for (int i = 0; i < reps; ++i) {
        const auto out = run(env, o, RngStream(seed, static_cast<std::uint64_t>(i)));
        if (out.converged && is_optimal(env, out.converged_action)) {
            ++correct;
            s += static_cast<double>(out.iterations);
            ss += static_cast<double>(out.iterations) * static_cast<double>(out.iterations);
        }
    }
    Stats st;
    st.accuracy = static_cast<double>(correct) / reps;
    st.mean = s / correct;
    st.var = (ss - correct * st.mean * st.mean) / (correct - 1);
    return st;
}

}  // namespace

TEST(Init, OptimisticPrior) {
    const auto s2 = init(2);
    EXPECT_EQ(s2.posteriors, (std::vector<BetaPosterior>{{2, 1}, {2, 1}}));
    EXPECT_EQ(s2.t, 0U);
    EXPECT_TRUE(s2.last_probs.empty());
    const auto s10 = init(10);
    ASSERT_EQ(s10.posteriors.size(), 10U);
    std::int64_t total = 0;
    for (const auto& p : s10.posteriors) {
        EXPECT_EQ(p, kInitialPosterior);
        EXPECT_DOUBLE_EQ(p.mean(), 2.0 / 3.0);
        total += selections(p);
    }
    EXPECT_EQ(total, 0);
    EXPECT_THROW((void)init(1), std::domain_error);
    EXPECT_THROW((void)init(0), std::domain_error);
}

TEST(SelectAction, PrefersLessSampledOfTopTwo) {
    RngStream rng(1, 0);
    const auto probs = HypothesisProbs::from_probabilities({0.7, 0.2, 0.1});
    const std::vector<BetaPosterior> post{selected(5), selected(3), selected(0)};
    for (int i = 0; i < 50; ++i) {
        const auto s = select_pair(probs, post, rng);
        EXPECT_EQ(s.first, 0U);
        EXPECT_EQ(s.second, 1U);
        EXPECT_EQ(s.chosen, 1U);
    }
}

TEST(SelectAction, EqualSamplesSplitEvenly) {
    RngStream rng(2, 0);
    const auto probs = HypothesisProbs::from_probabilities({0.5, 0.5});
    const std::vector<BetaPosterior> post{selected(4), selected(4)};
    const int n = 10'000;
    int zeros = 0;
    for (int i = 0; i < n; ++i) {
        zeros += select_action(probs, post, rng) == 0 ? 1 : 0;
    }
    EXPECT_LE(std::abs(static_cast<double>(zeros) / n - 0.5), 3.0 * std::sqrt(0.25 / n));
}

TEST(SelectAction, TiedRunnersUpNeverPickThird) {
    RngStream rng(3, 0);
    const auto probs = HypothesisProbs::from_probabilities({0.4, 0.4, 0.2});
    const std::vector<BetaPosterior> post{selected(2), selected(2), selected(0)};
    std::array<int, 3> hits{};
    for (int i = 0; i < 4000; ++i) {
        const auto s = select_pair(probs, post, rng);
        EXPECT_NE(s.first, 2U);
        EXPECT_NE(s.second, 2U);
        EXPECT_NE(s.first, s.second);
        ++hits[s.chosen];
    }
    EXPECT_EQ(hits[2], 0);
}

TEST(SelectAction, ThreeWayMaximumGivesUniformPairs) {
    RngStream rng(4, 0);
    const auto probs = HypothesisProbs::from_probabilities({0.3, 0.3, 0.3, 0.1});
    const std::vector<BetaPosterior> post(4, selected(1));
    std::map<std::pair<std::size_t, std::size_t>, int> pairs;
    const int n = 30'000;
    for (int i = 0; i < n; ++i) {
        const auto s = select_pair(probs, post, rng);
        ASSERT_NE(s.first, 3U);
        ASSERT_NE(s.second, 3U);
        ++pairs[std::minmax(s.first, s.second)];
    }
    ASSERT_EQ(pairs.size(), 3U);
    for (const auto& [pair, count] : pairs) {
        EXPECT_LE(std::abs(static_cast<double>(count) / n - 1.0 / 3.0), 3.0 * std::sqrt(2.0 / 9.0 / n));
    }
}

TEST(SelectAction, RunnerUpTieIsRandomized) {
    RngStream rng(5, 0);
    const auto probs = HypothesisProbs::from_probabilities({0.6, 0.2, 0.2});
    const std::vector<BetaPosterior> post{selected(9), selected(1), selected(1)};
    const int n = 10'000;
    int ones = 0;
    for (int i = 0; i < n; ++i) {
        const auto s = select_pair(probs, post, rng);
        EXPECT_EQ(s.first, 0U);
        EXPECT_EQ(s.chosen, s.second);
        ones += s.second == 1 ? 1 : 0;
    }
    EXPECT_LE(std::abs(static_cast<double>(ones) / n - 0.5), 3.0 * std::sqrt(0.25 / n));
}

TEST(SelectAction, MismatchedLengthsRejected) {
    RngStream rng(6, 0);
    const auto probs = HypothesisProbs::from_probabilities({0.6, 0.4});
    const std::vector<BetaPosterior> post(3, selected(0));
    EXPECT_THROW((void)select_action(probs, post, rng), std::invalid_argument);
}

TEST(Step, OneInteractionPerStep) {
    const auto env = benchmark("E5");
    Automaton automaton(env.actions(), {}, RngStream(7, 0));
    RngStream feedback(7, 1);
    auto pull_fn = [&](std::size_t a) { return pull(env, a, feedback); };
    auto before = automaton.state().posteriors;
    const std::size_t a = automaton.step(pull_fn);
    const auto& after = automaton.state().posteriors;
    int changed = 0;
    for (std::size_t i = 0; i < after.size(); ++i) {
        if (after[i] != before[i]) {
            ++changed;
            EXPECT_EQ(i, a);
            EXPECT_EQ(after[i].total(), before[i].total() + 1);
        }
    }
    EXPECT_EQ(changed, 1);
    for (std::uint64_t k = 2; k <= 200; ++k) {
        before = automaton.state().posteriors;
        const auto& probs = automaton.estimate();
        const auto sel = automaton.select();
        const std::size_t chosen = sel.chosen;
        // Never the strictly more-sampled member of the top pair.
        EXPECT_LE(selections(before[chosen]),
                  std::min(selections(before[sel.first]), selections(before[sel.second])));
        EXPECT_TRUE(probs.normalized());
        automaton.observe(chosen, pull_fn(chosen));
        std::int64_t total = 0;
        for (const auto& p : automaton.state().posteriors) {
            total += selections(p);
        }
        EXPECT_EQ(static_cast<std::uint64_t>(total), k);
        EXPECT_EQ(automaton.state().t, k);
    }
}

TEST(Step, AlwaysRewardingEnvironmentGrowsAlpha) {
    Automaton automaton(3, {}, RngStream(8, 0));
    for (int i = 0; i < 100; ++i) {
        const auto before = automaton.state().posteriors;
        const std::size_t a = automaton.step([](std::size_t) { return Feedback::reward; });
        EXPECT_EQ(automaton.state().posteriors[a].alpha, before[a].alpha + 1);
        EXPECT_EQ(automaton.state().posteriors[a].beta, before[a].beta);
    }
}

TEST(Run, TinyEtaStopsAtFirstCheck) {
    PflaOptions o;
    o.eta = 1e-6;
    const auto out = run(benchmark("E5"), o, RngStream(9, 0));
    EXPECT_TRUE(out.converged);
    EXPECT_EQ(out.iterations, 0U);
    EXPECT_EQ(out.estimates, 1U);
    EXPECT_GT(out.terminal_max_prob, o.eta);
}

TEST(Run, ConvergenceCertificateAndCap) {
    PflaOptions o;
    for (const char* id : {"E1", "E4", "E8"}) {
        const auto env = benchmark(id);
        for (std::uint64_t i = 0; i < 20; ++i) {
            const auto out = run(env, o, RngStream(10, i));
            EXPECT_TRUE(out.converged);
            EXPECT_GT(out.terminal_max_prob, o.eta);
            EXPECT_LE(out.iterations, o.max_iter);
            EXPECT_EQ(out.estimates, out.iterations + 1);
        }
    }
    o.max_iter = 5;
    const auto capped = run(benchmark("E7"), o, RngStream(11, 0));
    EXPECT_FALSE(capped.converged);
    EXPECT_EQ(capped.iterations, 5U);
    EXPECT_LE(capped.terminal_max_prob, o.eta);
}

TEST(Run, ReproducibleAndValidated) {
    const auto env = benchmark("E2");
    PflaOptions o;
    const auto a = run(env, o, RngStream(12, 3));
    const auto b = run(env, o, RngStream(12, 3));
    EXPECT_EQ(a.iterations, b.iterations);
    EXPECT_EQ(a.converged_action, b.converged_action);
    EXPECT_EQ(a.terminal_max_prob, b.terminal_max_prob);
    o.eta = 1.0;
    EXPECT_THROW((void)run(env, o, RngStream(1, 1)), std::domain_error);
    o.eta = 0.99;
    o.mc_samples = 0;
    EXPECT_THROW((void)run(env, o, RngStream(1, 1)), std::domain_error);
    o.mc_samples = 1000;
    o.estimator = Estimator::exact_two_action;
    EXPECT_THROW((void)run(benchmark("E5"), o, RngStream(1, 1)), std::invalid_argument);
}

TEST(Run, SamplersAgreeInDistribution) {
    // Grid and direct Monte Carlo give the same iteration distribution.
    const auto env = benchmark("E1");
    PflaOptions grid;
    PflaOptions direct;
    direct.estimator = Estimator::monte_carlo_direct;
    const int reps = 1500;
    const auto g = many_runs(env, grid, 13, reps);
    const auto d = many_runs(env, direct, 14, reps);
    const double se = std::sqrt(g.var / (g.accuracy * reps) + d.var / (d.accuracy * reps));
    EXPECT_LE(std::abs(g.mean - d.mean), 4.0 * se);
    EXPECT_GE(g.accuracy, 0.99);
    EXPECT_GE(d.accuracy, 0.99);
}

TEST(Run, ExactTwoActionPath) {
    PflaOptions o;
    o.estimator = Estimator::exact_two_action;
    const auto s = many_runs(benchmark("E1"), o, 15, 1000);
    EXPECT_GE(s.accuracy, 0.99);
    EXPECT_GT(s.mean, 30.0);
    EXPECT_LT(s.mean, 60.0);
}

TEST(Run, EarlyBenchmarkScaleOnE1) {
    const auto s = many_runs(benchmark("E1"), {}, 16, 1000);
    EXPECT_GE(s.accuracy, 0.99);
    EXPECT_NEAR(s.mean, 44.0, 44.0 * 0.1);
}
