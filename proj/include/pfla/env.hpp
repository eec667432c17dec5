#pragma once

#include <algorithm>
#include <array>
#include <charconv>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "pfla/beta.hpp"
#include "pfla/rng.hpp"

namespace pfla {

/// Stationary P-model environment: action i is rewarded with probability c_i.
class EnvironmentSpec {
public:
    EnvironmentSpec(std::vector<double> reward_probs, std::string label)
        : reward_probs_(std::move(reward_probs)), label_(std::move(label)) {
        if (reward_probs_.size() < 2) {
            throw std::invalid_argument("environment needs at least two actions");
        }
        for (double c : reward_probs_) {
            if (!(c > 0.0 && c < 1.0)) {
                throw std::invalid_argument("reward probabilities must lie in the open interval (0,1)");
            }
        }
    }

    [[nodiscard]] const std::vector<double>& reward_probs() const noexcept { return reward_probs_; }
    [[nodiscard]] const std::string& label() const noexcept { return label_; }
    [[nodiscard]] std::size_t actions() const noexcept { return reward_probs_.size(); }

    friend bool operator==(const EnvironmentSpec&, const EnvironmentSpec&) = default;

private:
    std::vector<double> reward_probs_;
    std::string label_;
};

inline constexpr std::array<std::string_view, 9> kBenchmarkIds = {"E1", "E2", "E3", "E4", "E5",
                                                                 "E6", "E7", "E8", "E9"};

/// The nine benchmark environments (four two-action, five ten-action).
inline EnvironmentSpec benchmark(std::string_view id) {
    std::vector<double> c;
    if (id == "E1") {
        c = {0.90, 0.60};
    } else if (id == "E2") {
        c = {0.80, 0.50};
    } else if (id == "E3") {
        c = {0.80, 0.60};
    } else if (id == "E4") {
        c = {0.20, 0.50};
    } else if (id == "E5") {
        c = {0.65, 0.50, 0.45, 0.40, 0.35, 0.30, 0.25, 0.20, 0.15, 0.10};
    } else if (id == "E6") {
        c = {0.60, 0.50, 0.45, 0.40, 0.35, 0.30, 0.25, 0.20, 0.15, 0.10};
    } else if (id == "E7") {
        c = {0.55, 0.50, 0.45, 0.40, 0.35, 0.30, 0.25, 0.20, 0.15, 0.10};
    } else if (id == "E8") {
        c = {0.70, 0.50, 0.30, 0.20, 0.40, 0.50, 0.40, 0.30, 0.50, 0.20};
    } else if (id == "E9") {
        c = {0.10, 0.45, 0.84, 0.76, 0.20, 0.40, 0.60, 0.70, 0.50, 0.30};
    } else {
        throw std::invalid_argument("unknown environment '" + std::string(id) +
                                    "'; valid identifiers are E1..E9");
    }
    return EnvironmentSpec(std::move(c), std::string(id));
}

inline std::vector<EnvironmentSpec> benchmark_suite() {
    std::vector<EnvironmentSpec> out;
    out.reserve(kBenchmarkIds.size());
    for (auto id : kBenchmarkIds) {
        out.push_back(benchmark(id));
    }
    return out;
}

/// Parses "0.9,0.6" into a custom environment labelled `label`.
inline EnvironmentSpec parse_environment(std::string_view text, std::string label = "custom") {
    std::vector<double> c;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const std::size_t comma = std::min(text.find(',', pos), text.size());
        std::string_view field = text.substr(pos, comma - pos);
        while (!field.empty() && field.front() == ' ') {
            field.remove_prefix(1);
        }
        while (!field.empty() && field.back() == ' ') {
            field.remove_suffix(1);
        }
        double value = 0.0;
        const auto [end, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
        if (field.empty() || ec != std::errc{} || end != field.data() + field.size()) {
            throw std::invalid_argument("malformed probability '" + std::string(field) +
                                        "' in environment list");
        }
        c.push_back(value);
        pos = comma + 1;
    }
    return EnvironmentSpec(std::move(c), std::move(label));
}

/// Benchmark id or comma-separated probability list.
inline EnvironmentSpec resolve_environment(std::string_view text) {
    if (text.find(',') == std::string_view::npos) {
        return benchmark(text);
    }
    return parse_environment(text);
}

inline Feedback pull(const EnvironmentSpec& env, std::size_t action, RngStream& rng) {
    if (action >= env.actions()) {
        throw std::out_of_range("action index " + std::to_string(action) + " out of range for " +
                                std::to_string(env.actions()) + "-action environment");
    }
    return rng.bernoulli(env.reward_probs()[action]) ? Feedback::reward : Feedback::penalty;
}

/// Indices attaining the maximal reward probability. A run is scored correct
/// if it converges to any of them.
inline std::vector<std::size_t> optimal_actions(const EnvironmentSpec& env) {
    const auto& c = env.reward_probs();
    const double best = *std::max_element(c.begin(), c.end());
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < c.size(); ++i) {
        if (c[i] == best) {
            out.push_back(i);
        }
    }
    return out;
}

inline bool is_optimal(const EnvironmentSpec& env, std::size_t action) {
    const auto& c = env.reward_probs();
    return action < c.size() && c[action] == *std::max_element(c.begin(), c.end());
}

}  // namespace pfla
