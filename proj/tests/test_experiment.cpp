#include <cmath>
#include <stdexcept>

#include <gtest/gtest.h>

#include "pfla/experiment.hpp"

using namespace pfla;

namespace {

ExperimentReport strip_time(ExperimentReport r) {
    r.wall_time_s = 0.0;
    return r;
}

}  // namespace

TEST(RunExperiment, SingleReplicationExtremeGap) {
    ExperimentConfig c;
    c.env = EnvironmentSpec({0.99, 0.01}, "gap");
    c.replications = 1;
    const auto r = run_experiment(c);
    EXPECT_EQ(r.replications, 1U);
    EXPECT_EQ(r.accuracy, 1.0);
    EXPECT_EQ(r.correct, 1U);
    EXPECT_EQ(r.nonconverged, 0U);
    EXPECT_GT(r.mean_iterations, 0.0);
    EXPECT_EQ(r.stddev_iterations, 0.0);
    EXPECT_EQ(r.env, "gap");
}

TEST(RunExperiment, DeterministicAcrossThreadCounts) {
    ExperimentConfig c;
    c.env = benchmark("E3");
    c.replications = 60;
    c.seed = 99;
    c.threads = 1;
    const auto serial = strip_time(run_experiment(c));
    EXPECT_EQ(serial, strip_time(run_experiment(c)));
    c.threads = 4;
    EXPECT_EQ(serial, strip_time(run_experiment(c)));
    c.seed = 100;
    EXPECT_NE(serial, strip_time(run_experiment(c)));
}

TEST(RunExperiment, AggregatesMatchIndividualRuns) {
    ExperimentConfig c;
    c.env = benchmark("E2");
    c.replications = 40;
    c.seed = 5;
    const auto r = run_experiment(c);
    std::uint64_t correct = 0;
    std::uint64_t nonconverged = 0;
    std::uint64_t estimates = 0;
    double s = 0, ss = 0;
    for (std::uint64_t i = 0; i < c.replications; ++i) {
        const auto o = run(c.env, c.options(), RngStream(c.seed, i));
        estimates += o.estimates;
        if (!o.converged) {
            ++nonconverged;
        } else if (is_optimal(c.env, o.converged_action)) {
            ++correct;
            s += static_cast<double>(o.iterations);
            ss += static_cast<double>(o.iterations) * static_cast<double>(o.iterations);
        }
    }
    const double n = static_cast<double>(correct);
    EXPECT_EQ(r.correct, correct);
    EXPECT_EQ(r.nonconverged, nonconverged);
    EXPECT_EQ(r.estimates, estimates);
    EXPECT_DOUBLE_EQ(r.accuracy, n / 40.0);
    EXPECT_DOUBLE_EQ(r.mean_iterations, s / n);
    EXPECT_NEAR(r.stddev_iterations, std::sqrt((ss - s * s / n) / (n - 1)), 1e-9);
}

TEST(RunExperiment, NonconvergedCountedSeparately) {
    ExperimentConfig c;
    c.env = benchmark("E7");
    c.replications = 5;
    c.max_iter = 3;
    const auto r = run_experiment(c);
    EXPECT_EQ(r.nonconverged, 5U);
    EXPECT_EQ(r.accuracy, 0.0);
    EXPECT_EQ(r.mean_iterations, 0.0);
    EXPECT_EQ(r.total_iterations, 15U);
}

TEST(RunExperiment, RejectsInvalidConfig) {
    ExperimentConfig c;
    c.replications = 0;
    EXPECT_THROW((void)run_experiment(c), std::domain_error);
    c.replications = 1;
    c.eta = 0.0;
    EXPECT_THROW((void)run_experiment(c), std::domain_error);
}

TEST(ParallelMap, PropagatesExceptions) {
    EXPECT_THROW((void)parallel_map(10, 3,
                                    [](std::uint64_t i) {
                                        if (i == 7) {
                                            throw std::runtime_error("boom");
                                        }
                                        return i;
                                    }),
                 std::runtime_error);
    const auto v = parallel_map(100, 4, [](std::uint64_t i) { return i * i; });
    for (std::uint64_t i = 0; i < 100; ++i) {
        EXPECT_EQ(v[i], i * i);
    }
}

TEST(RunSuite, NineReportsInBenchmarkOrder) {
    ExperimentConfig c;
    c.replications = 2;
    c.seed = 3;
    const auto reports = run_suite(c);
    ASSERT_EQ(reports.size(), 9U);
    for (std::size_t i = 0; i < 9; ++i) {
        EXPECT_EQ(reports[i].env, std::string(kBenchmarkIds[i]));
        EXPECT_EQ(reports[i].replications, 2U);
    }
}

TEST(RelativeImprovement, Examples) {
    EXPECT_EQ(relative_improvement(44, 44), 0.0);
    EXPECT_NEAR(relative_improvement(2737, 2032), 0.2576, 5e-5);
    EXPECT_DOUBLE_EQ(relative_improvement(100, 150), -0.5);
    EXPECT_THROW((void)relative_improvement(0, 10), std::domain_error);
    EXPECT_THROW((void)relative_improvement(-1, 10), std::domain_error);
}
