// Command-line front end: replicated runs, the benchmark suite, and the
// resolution/perturbation tuner.
#include <cstdint>
#include <exception>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "pfla/pfla.hpp"

namespace {

struct Common {
    double eta = 0.99;
    std::uint64_t mc_samples = 1000;
    std::uint64_t reps = 10'000;
    std::uint64_t seed = 1;
    std::uint64_t max_iter = 1'000'000;
    std::string format = "csv";
    std::string out;
    std::string sampler = "grid";
    unsigned threads = 0;
};

void add_common(CLI::App* cmd, Common& c) {
    cmd->add_option("--reps", c.reps, "replications per environment")->check(CLI::PositiveNumber);
    cmd->add_option("--seed", c.seed, "base seed; replication i uses stream i");
    cmd->add_option("--eta", c.eta, "convergence threshold in (0,1)")->check(CLI::Range(0.0, 1.0));
    cmd->add_option("--mc-samples", c.mc_samples, "Monte Carlo samples per estimate")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--max-iter", c.max_iter, "interaction cap per run")->check(CLI::PositiveNumber);
    cmd->add_option("--format", c.format, "report format")->check(CLI::IsMember({"csv", "json"}));
    cmd->add_option("--out", c.out, "output file (default stdout)");
    cmd->add_option("--threads", c.threads, "worker threads (0 = all cores)");
    cmd->add_option("--sampler", c.sampler,
                    "Monte Carlo sampler: grid (tabulated inverse CDF) or direct (gamma ratios)")
        ->check(CLI::IsMember({"grid", "direct"}));
}

pfla::ExperimentConfig make_config(const Common& c, pfla::EnvironmentSpec env, bool exact) {
    pfla::ExperimentConfig cfg;
    cfg.env = std::move(env);
    cfg.eta = c.eta;
    cfg.mc_samples = c.mc_samples;
    cfg.replications = c.reps;
    cfg.seed = c.seed;
    cfg.max_iter = c.max_iter;
    cfg.threads = c.threads;
    if (exact) {
        cfg.estimator = pfla::Estimator::exact_two_action;
    } else if (c.sampler == "direct") {
        cfg.estimator = pfla::Estimator::monte_carlo_direct;
    }
    return cfg;
}

std::optional<std::string> out_path(const Common& c) {
    return c.out.empty() ? std::nullopt : std::optional<std::string>(c.out);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Parameter-free learning automaton: experiments and tuning"};
    app.require_subcommand(1);

    Common run_opts;
    std::string env_text;
    bool exact = false;
    auto* run_cmd = app.add_subcommand("run", "replicated runs on one environment");
    run_cmd->add_option("--env", env_text, "E1..E9 or a comma-separated probability list")->required();
    run_cmd->add_flag("--exact-two-action", exact, "closed-form estimate instead of Monte Carlo (r = 2)");
    add_common(run_cmd, run_opts);

    Common suite_opts;
    auto* suite_cmd = app.add_subcommand("suite", "all nine benchmark environments");
    add_common(suite_cmd, suite_opts);

    std::string scheme = "synthetic";
    std::string tune_env = "E1";
    pfla::TuningOptions tuning;
    std::optional<int> gamma_min;
    std::optional<int> gamma_max;
    std::uint64_t tune_seed = 1;
    pfla::SyntheticScheme::Params synth;
    bool no_gamma = false;
    auto* tune_cmd = app.add_subcommand("tune", "resolution and perturbation search for a tunable scheme");
    tune_cmd->add_option("--scheme", scheme, "scheme to tune")->check(CLI::IsMember({"synthetic"}));
    tune_cmd->add_option("--env", tune_env, "E1..E9 or a comma-separated probability list");
    tune_cmd->add_option("--ne", tuning.ne, "consecutive correct runs required")->check(CLI::PositiveNumber);
    tune_cmd->add_option("--repeats", tuning.repeats, "independent searches averaged")
        ->check(CLI::PositiveNumber);
    tune_cmd->add_option("--gamma-min", gamma_min, "smallest gamma (default by environment)");
    tune_cmd->add_option("--gamma-max", gamma_max, "largest gamma (default by environment)");
    tune_cmd->add_flag("--no-gamma", no_gamma, "tune the resolution only");
    tune_cmd->add_option("--eval-reps", tuning.eval_replications, "runs per (n, gamma) speed evaluation")
        ->check(CLI::PositiveNumber);
    tune_cmd->add_option("--budget", tuning.budget, "interaction budget for the whole search");
    tune_cmd->add_option("--seed", tune_seed, "seed");
    tune_cmd->add_option("--n-star", synth.n_star, "synthetic scheme: smallest correct resolution")
        ->check(CLI::PositiveNumber);
    tune_cmd->add_option("--gamma-star", synth.gamma_star, "synthetic scheme: fastest gamma");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e, std::cerr, std::cerr);
    }

    try {
        if (*run_cmd) {
            const auto env = pfla::resolve_environment(env_text);
            const auto report = pfla::run_experiment(make_config(run_opts, env, exact));
            pfla::emit_report({report}, pfla::parse_report_format(run_opts.format), out_path(run_opts));
        } else if (*suite_cmd) {
            std::vector<pfla::ExperimentReport> reports;
            for (const auto& env : pfla::benchmark_suite()) {
                reports.push_back(pfla::run_experiment(make_config(suite_opts, env, false)));
                std::cerr << env.label() << " done in " << reports.back().wall_time_s << " s\n";
            }
            pfla::emit_report(reports, pfla::parse_report_format(suite_opts.format), out_path(suite_opts));
        } else if (*tune_cmd) {
            const auto env = pfla::resolve_environment(tune_env);
            const auto factory = pfla::SyntheticScheme::factory(synth);
            const pfla::RngStream rng(tune_seed, 0);
            nlohmann::json out;
            out["scheme"] = scheme;
            out["env"] = env.label();
            out["ne"] = tuning.ne;
            out["repeats"] = tuning.repeats;
            if (no_gamma) {
                const auto res = pfla::tune_resolution(factory, env, tuning, rng);
                out["average_n"] = res.average_n;
                out["best_n"] = res.best_n;
                out["interactions"] = res.interactions;
            } else {
                auto [lo, hi] = pfla::default_gamma_range(env);
                const auto res = pfla::tune_gamma_grid(factory, env, gamma_min.value_or(lo),
                                                       gamma_max.value_or(hi), tuning, rng);
                out["best_gamma"] = res.best_gamma;
                out["best_n"] = res.best_n;
                out["best_mean_iterations"] = res.best_mean_iterations;
                out["interactions"] = res.interactions;
                for (const auto& g : res.grid) {
                    out["grid"].push_back({{"gamma", g.gamma},
                                           {"average_n", g.average_n},
                                           {"n", g.n},
                                           {"mean_iterations", g.mean_iterations},
                                           {"interactions", g.interactions}});
                }
            }
            std::cout << out.dump(2) << '\n';
        }
    } catch (const pfla::BudgetExceeded& e) {
        std::cerr << "error: " << e.what() << " (partial: " << e.partial().best_n.size()
                  << " searches finished, " << e.partial().interactions << " interactions)\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
