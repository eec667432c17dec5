#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>

#include <boost/math/special_functions/beta.hpp>
#include <boost/random/normal_distribution.hpp>

#include "pfla/rng.hpp"

namespace pfla {

enum class Feedback : std::uint8_t { penalty = 0, reward = 1 };

/// Beta(alpha, beta) posterior over a Bernoulli reward probability.
///
/// Parameters are integer counts: each reward adds one to alpha, each penalty
/// adds one to beta. Under the automaton's Beta(2,1) prior, rewards = alpha-2,
/// penalties = beta-1 and selections = alpha+beta-3.
struct BetaPosterior {
    std::int64_t alpha = 1;
    std::int64_t beta = 1;

    [[nodiscard]] constexpr double mean() const noexcept {
        return static_cast<double>(alpha) / static_cast<double>(alpha + beta);
    }
    [[nodiscard]] constexpr std::int64_t total() const noexcept { return alpha + beta; }
    [[nodiscard]] constexpr bool valid() const noexcept { return alpha >= 1 && beta >= 1; }

    friend constexpr bool operator==(const BetaPosterior&, const BetaPosterior&) = default;
};

inline void require_valid(const BetaPosterior& p) {
    if (!p.valid()) {
        throw std::domain_error("beta posterior parameters must be >= 1");
    }
}

[[nodiscard]] constexpr BetaPosterior updated(BetaPosterior p, Feedback fb) noexcept {
    if (fb == Feedback::reward) {
        ++p.alpha;
    } else {
        ++p.beta;
    }
    return p;
}

namespace detail {

// Stirling-series remainder lgamma(x) - [(x-1/2)ln x - x + ln sqrt(2 pi)], x >= 10.
inline double lgamma_correction(double x) noexcept {
    const double inv = 1.0 / x;
    const double inv2 = inv * inv;
    return inv *
           (1.0 / 12.0 +
            inv2 * (-1.0 / 360.0 +
                    inv2 * (1.0 / 1260.0 +
                            inv2 * (-1.0 / 1680.0 +
                                    inv2 * (1.0 / 1188.0 +
                                            inv2 * (-691.0 / 360360.0 + inv2 * (1.0 / 156.0)))))));
}

inline constexpr double kLnSqrt2Pi = 0.918938533204672741780329736406;

}  // namespace detail

/// ln B(a, b) for a, b > 0.
///
/// Large arguments go through Stirling corrections so that ln B keeps full
/// relative precision when one argument is much larger than the other, where
/// lgamma(a) + lgamma(b) - lgamma(a+b) cancels catastrophically.
inline double log_beta(double a, double b) {
    if (!(a > 0.0) || !(b > 0.0)) {
        throw std::domain_error("log_beta: arguments must be positive");
    }
    const double p = std::min(a, b);
    const double q = std::max(a, b);
    const double s = p + q;
    if (p >= 10.0) {
        const double corr = detail::lgamma_correction(p) + detail::lgamma_correction(q) -
                            detail::lgamma_correction(s);
        return -0.5 * std::log(q) + detail::kLnSqrt2Pi + corr + (p - 0.5) * std::log(p / s) +
               q * std::log1p(-p / s);
    }
    if (q >= 10.0) {
        const double corr = detail::lgamma_correction(q) - detail::lgamma_correction(s);
        return std::lgamma(p) + corr + p - p * std::log(s) + (q - 0.5) * std::log1p(-p / s);
    }
    return std::log(std::tgamma(p) * (std::tgamma(q) / std::tgamma(s)));
}

inline double log_beta(const BetaPosterior& p) {
    return log_beta(static_cast<double>(p.alpha), static_cast<double>(p.beta));
}

/// Gamma(shape, 1) variate for shape >= 1 (Marsaglia-Tsang squeeze).
inline double standard_gamma(double shape, RngStream& rng) {
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    boost::random::normal_distribution<double> normal;
    for (;;) {
        const double x = normal(rng);
        double v = 1.0 + c * x;
        if (v <= 0.0) {
            continue;
        }
        v = v * v * v;
        const double u = rng.uniform01();
        const double x2 = x * x;
        if (u < 1.0 - 0.0331 * x2 * x2) {
            return d * v;
        }
        if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) {
            return d * v;
        }
    }
}

/// One draw from Beta(alpha, beta) as X/(X+Y) with X ~ Gamma(alpha), Y ~ Gamma(beta).
/// The result is kept strictly inside (0,1).
inline double sample(const BetaPosterior& p, RngStream& rng) {
    const double x = standard_gamma(static_cast<double>(p.alpha), rng);
    const double y = standard_gamma(static_cast<double>(p.beta), rng);
    const double v = x / (x + y);
    return std::clamp(v, std::numeric_limits<double>::min(), std::nextafter(1.0, 0.0));
}

/// Regularized incomplete beta I_x(alpha, beta), i.e. the posterior CDF at x.
inline double cdf(const BetaPosterior& p, double x) {
    require_valid(p);
    if (x <= 0.0) {
        return 0.0;
    }
    if (x >= 1.0) {
        return 1.0;
    }
    return boost::math::ibeta(static_cast<double>(p.alpha), static_cast<double>(p.beta), x);
}

/// Posterior mass on [lo, hi] intersected with [0,1].
inline double mass_within(const BetaPosterior& p, double lo, double hi) {
    if (hi < lo) {
        return 0.0;
    }
    return cdf(p, hi) - cdf(p, lo);
}

}  // namespace pfla
