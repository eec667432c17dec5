#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "pfla/beta.hpp"

namespace pfla {

/// The four finite sums for Pr(e1 > e2) with e_k ~ Beta(alpha_k, beta_k).
/// Each is indexed by the parameter that bounds its number of terms.
enum class ExactForm : std::uint8_t {
    by_alpha1,  // sum over i < alpha1
    by_beta2,   // sum over i < beta2
    by_alpha2,  // 1 - sum over i < alpha2
    by_beta1,   // 1 - sum over i < beta1
};

inline constexpr std::array<ExactForm, 4> kExactForms = {ExactForm::by_alpha1, ExactForm::by_beta2,
                                                         ExactForm::by_alpha2, ExactForm::by_beta1};

struct ExactProbResult {
    double value = 0.0;
    std::int64_t terms_summed = 0;
    ExactForm form = ExactForm::by_alpha1;
};

namespace detail {

// sum_{i<count} B(x+i, y) / ((z+i) B(1+i, z) B(u, v)), accumulated in log space.
inline double beta_ratio_sum(std::int64_t count, double x, double y, double z, double u, double v) {
    const double log_norm = log_beta(u, v);
    std::vector<double> logs(static_cast<std::size_t>(count));
    double top = -std::numeric_limits<double>::infinity();
    for (std::int64_t i = 0; i < count; ++i) {
        const auto di = static_cast<double>(i);
        const double lt = log_beta(x + di, y) - std::log(z + di) - log_beta(1.0 + di, z) - log_norm;
        logs[static_cast<std::size_t>(i)] = lt;
        top = std::max(top, lt);
    }
    double acc = 0.0;
    for (double lt : logs) {
        acc += std::exp(lt - top);
    }
    return std::exp(top) * acc;
}

}  // namespace detail

inline std::int64_t terms_for(ExactForm form, const BetaPosterior& p1, const BetaPosterior& p2) {
    switch (form) {
        case ExactForm::by_alpha1: return p1.alpha;
        case ExactForm::by_beta2: return p2.beta;
        case ExactForm::by_alpha2: return p2.alpha;
        case ExactForm::by_beta1: return p1.beta;
    }
    return 0;
}

/// Pr(e1 > e2) evaluated with one specific sum.
inline ExactProbResult prob_first_beats_second(const BetaPosterior& p1, const BetaPosterior& p2,
                                               ExactForm form) {
    require_valid(p1);
    require_valid(p2);
    const auto a1 = static_cast<double>(p1.alpha);
    const auto b1 = static_cast<double>(p1.beta);
    const auto a2 = static_cast<double>(p2.alpha);
    const auto b2 = static_cast<double>(p2.beta);
    double value = 0.0;
    switch (form) {
        case ExactForm::by_alpha1:
            value = detail::beta_ratio_sum(p1.alpha, a2, b1 + b2, b1, a2, b2);
            break;
        case ExactForm::by_beta2:
            value = detail::beta_ratio_sum(p2.beta, b1, a1 + a2, a2, a1, b1);
            break;
        case ExactForm::by_alpha2:
            value = 1.0 - detail::beta_ratio_sum(p2.alpha, a1, b1 + b2, b2, a1, b1);
            break;
        case ExactForm::by_beta1:
            value = 1.0 - detail::beta_ratio_sum(p1.beta, b2, a1 + a2, a1, a2, b2);
            break;
    }
    return {std::clamp(value, 0.0, 1.0), terms_for(form, p1, p2), form};
}

/// Pr(e1 > e2) using whichever sum has the fewest terms; ties resolve in the
/// order by_alpha1, by_beta2, by_alpha2, by_beta1. Cost O(min(a1, a2, b1, b2)).
inline ExactProbResult prob_first_beats_second(const BetaPosterior& p1, const BetaPosterior& p2) {
    ExactForm best = kExactForms[0];
    for (ExactForm f : kExactForms) {
        if (terms_for(f, p1, p2) < terms_for(best, p1, p2)) {
            best = f;
        }
    }
    return prob_first_beats_second(p1, p2, best);
}

/// h = B(a1+a2, b1+b2) / (B(a1,b1) B(a2,b2)), the step size in the
/// single-count recurrences of Pr(e1 > e2).
inline double h_factor(const BetaPosterior& p1, const BetaPosterior& p2) {
    require_valid(p1);
    require_valid(p2);
    const double lh = log_beta(static_cast<double>(p1.alpha + p2.alpha),
                               static_cast<double>(p1.beta + p2.beta)) -
                      log_beta(p1) - log_beta(p2);
    return std::exp(lh);
}

struct RecurrenceCheck {
    bool alpha1 = false;  // g(a1+1) = g + h/a1
    bool beta1 = false;   // g(b1+1) = g - h/b1
    bool alpha2 = false;  // g(a2+1) = g - h/a2
    bool beta2 = false;   // g(b2+1) = g + h/b2

    [[nodiscard]] bool all() const noexcept { return alpha1 && beta1 && alpha2 && beta2; }
};

/// Checks the four single-count recurrences against direct evaluation.
inline RecurrenceCheck recurrence_check(const BetaPosterior& p1, const BetaPosterior& p2,
                                        double tolerance = 1e-9) {
    const double g = prob_first_beats_second(p1, p2).value;
    const double h = h_factor(p1, p2);
    auto near = [tolerance](double direct, double predicted) {
        return std::abs(direct - predicted) <= tolerance;
    };
    const auto a1 = static_cast<double>(p1.alpha);
    const auto b1 = static_cast<double>(p1.beta);
    const auto a2 = static_cast<double>(p2.alpha);
    const auto b2 = static_cast<double>(p2.beta);
    RecurrenceCheck out;
    out.alpha1 = near(prob_first_beats_second({p1.alpha + 1, p1.beta}, p2).value, g + h / a1);
    out.beta1 = near(prob_first_beats_second({p1.alpha, p1.beta + 1}, p2).value, g - h / b1);
    out.alpha2 = near(prob_first_beats_second(p1, {p2.alpha + 1, p2.beta}).value, g - h / a2);
    out.beta2 = near(prob_first_beats_second(p1, {p2.alpha, p2.beta + 1}).value, g + h / b2);
    return out;
}

}  // namespace pfla
