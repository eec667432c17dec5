#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <stdexcept>
#include <vector>

#include "pfla/beta.hpp"
#include "pfla/rng.hpp"

namespace pfla {

/// Estimated probabilities that each action is the optimal one.
///
/// Monte Carlo estimates carry integer counts that partition n_samples, so
/// the probabilities sum to exactly one and are multiples of 1/n_samples.
/// Closed-form estimates leave counts empty and n_samples zero.
class HypothesisProbs {
public:
    HypothesisProbs() = default;

    HypothesisProbs(std::vector<std::uint64_t> counts, std::uint64_t n_samples)
        : counts_(std::move(counts)), n_samples_(n_samples) {
        if (n_samples_ == 0) {
            throw std::domain_error("hypothesis estimate needs at least one sample");
        }
        probs_.reserve(counts_.size());
        for (auto c : counts_) {
            probs_.push_back(static_cast<double>(c) / static_cast<double>(n_samples_));
        }
    }

    static HypothesisProbs from_probabilities(std::vector<double> probs) {
        HypothesisProbs out;
        out.probs_ = std::move(probs);
        return out;
    }

    [[nodiscard]] std::size_t size() const noexcept { return probs_.size(); }
    [[nodiscard]] bool empty() const noexcept { return probs_.empty(); }
    [[nodiscard]] double operator[](std::size_t i) const { return probs_[i]; }
    [[nodiscard]] const std::vector<double>& probs() const noexcept { return probs_; }
    [[nodiscard]] const std::vector<std::uint64_t>& counts() const noexcept { return counts_; }
    [[nodiscard]] std::uint64_t n_samples() const noexcept { return n_samples_; }

    /// Counts partition the sample size (always true for Monte Carlo estimates).
    [[nodiscard]] bool normalized() const noexcept {
        if (counts_.empty()) {
            return !probs_.empty();
        }
        return std::accumulate(counts_.begin(), counts_.end(), std::uint64_t{0}) == n_samples_;
    }

    /// Lowest index holding the maximum.
    [[nodiscard]] std::size_t argmax() const noexcept {
        return static_cast<std::size_t>(std::max_element(probs_.begin(), probs_.end()) - probs_.begin());
    }
    [[nodiscard]] double max() const noexcept {
        return probs_.empty() ? 0.0 : *std::max_element(probs_.begin(), probs_.end());
    }

    friend bool operator==(const HypothesisProbs&, const HypothesisProbs&) = default;

private:
    std::vector<double> probs_;
    std::vector<std::uint64_t> counts_;
    std::uint64_t n_samples_ = 0;
};

/// Direct Monte Carlo estimate: each of the N replications draws one sample
/// per posterior and credits the strict maximum (lowest index on an exact tie).
inline HypothesisProbs estimate_hypothesis_probs(std::span<const BetaPosterior> posteriors,
                                                 std::uint64_t n_samples, RngStream& rng) {
    if (posteriors.empty()) {
        throw std::domain_error("estimate_hypothesis_probs: no posteriors");
    }
    if (n_samples == 0) {
        throw std::domain_error("estimate_hypothesis_probs: N must be positive");
    }
    for (const auto& p : posteriors) {
        require_valid(p);
    }
    std::vector<std::uint64_t> counts(posteriors.size(), 0);
    for (std::uint64_t n = 0; n < n_samples; ++n) {
        std::size_t best = 0;
        double best_x = -1.0;
        for (std::size_t i = 0; i < posteriors.size(); ++i) {
            const double x = sample(posteriors[i], rng);
            if (x > best_x) {
                best_x = x;
                best = i;
            }
        }
        ++counts[best];
    }
    return {std::move(counts), n_samples};
}


}  // namespace pfla
