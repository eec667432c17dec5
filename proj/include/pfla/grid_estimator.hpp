#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "pfla/beta.hpp"
#include "pfla/mc.hpp"
#include "pfla/rng.hpp"

namespace pfla {

/// Monte Carlo hypothesis estimator that samples through tabulated posterior CDFs.
///
/// Every posterior's CDF is held on a uniform grid of `cells` intervals over
/// [0,1]. In a replication each action's Beta sample is fixed by one uniform
/// through its inverse CDF, but it is only resolved as far as the argmax needs:
///
///  * the anchor (largest posterior mean) is located to its cell k;
///  * with probability Q(k) = prod_{j != anchor} F_j(k/cells) every other
///    sample lies below that cell and the anchor wins outright;
///  * otherwise the others are drawn conditionally on "not all below", each
///    located only if it can reach the best cell so far;
///  * actions sharing the top cell get exact positions drawn from their
///    densities restricted to it, by rejection.
///
/// The counts therefore have exactly the distribution of the direct estimator
/// (`estimate_hypothesis_probs`); only the work per replication differs.
///
/// After one observation the affected row follows
///   I_x(a+1, b) = I_x(a, b) - x^a (1-x)^b / (a B(a, b))
///   I_x(a, b+1) = I_x(a, b) + x^a (1-x)^b / (b B(a, b))
/// over the cells where the correction exceeds e^-50.
class GridEstimator {
public:
    static constexpr std::size_t kDefaultCells = 1024;

    explicit GridEstimator(std::span<const BetaPosterior> posteriors,
                           std::size_t cells = kDefaultCells)
        : cells_(cells), posteriors_(posteriors.begin(), posteriors.end()) {
        if (posteriors_.empty()) {
            throw std::domain_error("GridEstimator: no posteriors");
        }
        if (cells_ < 2) {
            throw std::domain_error("GridEstimator: need at least two cells");
        }
        log_x_.resize(cells_ + 1);
        log_1mx_.resize(cells_ + 1);
        for (std::size_t k = 1; k < cells_; ++k) {
            const double x = grid_point(k);
            log_x_[k] = std::log(x);
            log_1mx_[k] = std::log1p(-x);
        }
        tables_.resize(posteriors_.size() * (cells_ + 1));
        guides_.resize(posteriors_.size() * cells_);
        for (std::size_t i = 0; i < posteriors_.size(); ++i) {
            require_valid(posteriors_[i]);
            rebuild(i);
            rebuild_guide(i);
        }
    }

    [[nodiscard]] const std::vector<BetaPosterior>& posteriors() const noexcept { return posteriors_; }
    [[nodiscard]] std::size_t cells() const noexcept { return cells_; }

    /// Tabulated CDF of `action` at k/cells.
    [[nodiscard]] double table_cdf(std::size_t action, std::size_t k) const { return row(action)[k]; }

    void update(std::size_t action, Feedback fb) {
        BetaPosterior& p = posteriors_.at(action);
        advance(action, p, fb);
        p = updated(p, fb);
        rebuild_guide(action);
    }

    HypothesisProbs estimate(std::uint64_t n_samples, RngStream& stream) const {
        if (n_samples == 0) {
            throw std::domain_error("GridEstimator::estimate: N must be positive");
        }
        const std::size_t r = posteriors_.size();
        std::size_t anchor = 0;
        for (std::size_t i = 1; i < r; ++i) {
            if (posteriors_[i].alpha * posteriors_[anchor].total() >
                posteriors_[anchor].alpha * posteriors_[i].total()) {
                anchor = i;
            }
        }
        // Strongest contenders first, so the conditional scan below usually
        // stops at the first action it looks at.
        std::vector<std::size_t> others;
        others.reserve(r - 1);
        for (std::size_t i = 0; i < r; ++i) {
            if (i != anchor) {
                others.push_back(i);
            }
        }
        std::stable_sort(others.begin(), others.end(), [&](std::size_t x, std::size_t y) {
            return posteriors_[x].alpha * posteriors_[y].total() >
                   posteriors_[y].alpha * posteriors_[x].total();
        });

        std::vector<std::uint64_t> counts(r, 0);
        std::vector<double> all_below(cells_, -1.0);
        std::vector<double> suffix(r);
        std::vector<std::size_t> tied(r);
        std::size_t n_tied = 0;
        RngStream rng = stream;

        for (std::uint64_t n = 0; n < n_samples; ++n) {
            std::size_t top = locate(anchor, 0, rng.uniform01());
            double& q = all_below[top];
            if (q < 0.0) {
                q = 1.0;
                for (std::size_t j : others) {
                    q *= row(j)[top];
                }
            }
            if (rng.uniform01() < q) {
                ++counts[anchor];
                continue;
            }
            tied[0] = anchor;
            n_tied = 1;
            // others[next..] are still unresolved; at least one of them
            // reaches cell `top`.
            std::size_t next = 0;
            bool conditioned = true;
            while (next < others.size()) {
                const std::size_t m = others.size() - next;
                suffix[m] = 1.0;
                for (std::size_t t = m; t-- > 0;) {
                    suffix[t] = suffix[t + 1] * row(others[next + t])[top];
                }
                if (!conditioned && rng.uniform01() < suffix[0]) {
                    break;
                }
                // Conditioned on "not all below": action t is below with
                // probability F_t (1 - S_{t+1}) / (1 - S_t).
                std::size_t t = 0;
                for (; t < m; ++t) {
                    const double rest_reach = 1.0 - suffix[t + 1];
                    const double f_top = row(others[next + t])[top];
                    if (!(rest_reach > 0.0) ||
                        rng.uniform01() * (1.0 - suffix[t]) >= f_top * rest_reach) {
                        break;
                    }
                }
                const std::size_t j = others[next + t];
                const double* f = row(j);
                const double u = std::min(f[top] + (1.0 - f[top]) * rng.uniform01(), kBelowOne);
                const std::size_t cell = locate(j, top, u);
                if (cell > top) {
                    top = cell;
                    n_tied = 0;
                }
                tied[n_tied++] = j;
                next += t + 1;
                conditioned = false;
            }
            ++counts[n_tied == 1 ? tied[0]
                                 : resolve_within_cell(std::span(tied.data(), n_tied), top, rng)];
        }
        stream = rng;
        return {std::move(counts), n_samples};
    }

private:
    static constexpr double kBelowOne = 0x1.fffffffffffffp-1;

    [[nodiscard]] double grid_point(std::size_t k) const noexcept {
        return static_cast<double>(k) / static_cast<double>(cells_);
    }

    [[nodiscard]] const double* row(std::size_t i) const { return tables_.data() + i * (cells_ + 1); }
    double* row(std::size_t i) { return tables_.data() + i * (cells_ + 1); }

    // Cell k with F[k] <= u < F[k+1], given that the answer is at least `from`.
    [[nodiscard]] std::size_t locate(std::size_t action, std::size_t from, double u) const {
        const double* f = row(action);
        const auto bucket = static_cast<std::size_t>(u * static_cast<double>(cells_));
        std::size_t k = std::max(guides_[action * cells_ + std::min(bucket, cells_ - 1)], from);
        while (f[k + 1] <= u) {
            ++k;
        }
        return k;
    }

    // guide[m] = cell holding u = m/cells.
    void rebuild_guide(std::size_t i) {
        const double* f = row(i);
        std::size_t* guide = guides_.data() + i * cells_;
        std::size_t k = 0;
        for (std::size_t m = 0; m < cells_; ++m) {
            const double u = grid_point(m);
            while (f[k + 1] <= u) {
                ++k;
            }
            guide[m] = k;
        }
    }

    [[nodiscard]] static double log_kernel(const BetaPosterior& p, double x) {
        double v = 0.0;
        if (p.alpha > 1) {
            v += static_cast<double>(p.alpha - 1) * std::log(x);
        }
        if (p.beta > 1) {
            v += static_cast<double>(p.beta - 1) * std::log1p(-x);
        }
        return v;
    }

    // Densities are log-concave, so the kernel's maximum over the cell sits at
    // the mode clamped into it.
    std::size_t resolve_within_cell(std::span<const std::size_t> tied, std::size_t top,
                                    RngStream& rng) const {
        const double lo = grid_point(top);
        const double hi = grid_point(top + 1);
        std::size_t best = tied.front();
        double best_x = -1.0;
        for (std::size_t j : tied) {
            const BetaPosterior& p = posteriors_[j];
            const double mode = p.total() == 2 ? lo
                                               : static_cast<double>(p.alpha - 1) /
                                                     static_cast<double>(p.total() - 2);
            const double envelope = log_kernel(p, std::clamp(mode, lo, hi));
            double x = 0.0;
            do {
                x = lo + (hi - lo) * rng.uniform01();
            } while (std::log(rng.uniform01()) > log_kernel(p, x) - envelope);
            if (x > best_x || (x == best_x && j < best)) {
                best_x = x;
                best = j;
            }
        }
        return best;
    }

    // Beta(1,1) has F(x) = x; small posteriors are reached through the
    // recurrences, larger ones are tabulated from the incomplete beta.
    void rebuild(std::size_t i) {
        const BetaPosterior target = posteriors_[i];
        double* f = row(i);
        if (target.total() <= 64) {
            for (std::size_t k = 0; k <= cells_; ++k) {
                f[k] = grid_point(k);
            }
            BetaPosterior p{1, 1};
            while (p.alpha < target.alpha) {
                advance(i, p, Feedback::reward);
                ++p.alpha;
            }
            while (p.beta < target.beta) {
                advance(i, p, Feedback::penalty);
                ++p.beta;
            }
            return;
        }
        f[0] = 0.0;
        f[cells_] = 1.0;
        for (std::size_t k = 1; k < cells_; ++k) {
            f[k] = cdf(target, grid_point(k));
        }
    }

    // Moves row i from posterior p to updated(p, fb).
    void advance(std::size_t i, const BetaPosterior& p, Feedback fb) {
        const auto a = static_cast<double>(p.alpha);
        const auto b = static_cast<double>(p.beta);
        const double sign = fb == Feedback::reward ? -1.0 : 1.0;
        const double log_scale = -log_beta(a, b) - std::log(fb == Feedback::reward ? a : b);
        double* f = row(i);

        // The correction is unimodal in x with its peak at a/(a+b).
        constexpr double kNegligible = -50.0;
        auto exponent = [&](std::size_t k) { return a * log_x_[k] + b * log_1mx_[k] + log_scale; };
        const auto peak = std::clamp<std::size_t>(
            static_cast<std::size_t>(std::lround(a / (a + b) * static_cast<double>(cells_))), 1,
            cells_ - 1);
        std::size_t first = peak;
        std::size_t last = peak;
        for (std::size_t k = peak; k >= 1; --k) {
            const double e = exponent(k);
            if (e < kNegligible && k != peak) {
                break;
            }
            f[k] = std::clamp(f[k] + sign * std::exp(e), 0.0, 1.0);
            first = k;
        }
        for (std::size_t k = peak + 1; k < cells_; ++k) {
            const double e = exponent(k);
            if (e < kNegligible) {
                break;
            }
            f[k] = std::clamp(f[k] + sign * std::exp(e), 0.0, 1.0);
            last = k;
        }
        // Rounding can leave one-ulp inversions where the CDF is flat.
        for (std::size_t k = first; k <= cells_; ++k) {
            if (f[k] < f[k - 1]) {
                f[k] = f[k - 1];
            } else if (k > last) {
                break;
            }
        }
    }

    std::size_t cells_;
    std::vector<BetaPosterior> posteriors_;
    std::vector<double> log_x_;
    std::vector<double> log_1mx_;
    std::vector<double> tables_;
    std::vector<std::size_t> guides_;
};

}  // namespace pfla
