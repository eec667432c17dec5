#pragma once

#include <array>
#include <bit>
#include <cstdint>
#include <limits>

namespace pfla {

namespace detail {

// SplitMix64 finalizer. Used only for key derivation and state seeding.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

}  // namespace detail

/// Reproducible random stream addressed by (seed, stream_id[, substream path]).
///
/// Each address hashes to a 64-bit key which seeds a xoshiro256++ state through
/// SplitMix64. Equal addresses give bit-identical sequences; distinct addresses
/// give streams whose 256-bit starting states are unrelated. Streams are owned
/// by one run at a time and are never shared between threads.
class RngStream {
public:
    using result_type = std::uint64_t;

    RngStream(std::uint64_t seed, std::uint64_t stream_id) noexcept
        : seed_(seed), stream_id_(stream_id), path_(0) {
        reseed();
    }

    /// Independent child stream. Children with different indices, and the
    /// parent itself, never share a sequence.
    [[nodiscard]] RngStream substream(std::uint64_t index) const noexcept {
        RngStream child = *this;
        child.path_ = detail::mix64(path_ + detail::kGolden * (index + 1)) | 1U;
        child.reseed();
        return child;
    }

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept {
        return std::numeric_limits<result_type>::max();
    }

    result_type operator()() noexcept {
        const std::uint64_t result = std::rotl(s_[0] + s_[3], 23) + s_[0];
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = std::rotl(s_[3], 45);
        return result;
    }

    /// Uniform double on the open interval (0,1) with 53 random bits.
    double uniform01() noexcept {
        return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53;
    }

    /// Unbiased uniform integer in [0, n). n must be positive.
    std::uint64_t uniform_index(std::uint64_t n) noexcept {
        // Lemire's multiply-and-reject.
        unsigned __int128 m = static_cast<unsigned __int128>((*this)()) * n;
        auto low = static_cast<std::uint64_t>(m);
        if (low < n) {
            const std::uint64_t threshold = (0 - n) % n;
            while (low < threshold) {
                m = static_cast<unsigned __int128>((*this)()) * n;
                low = static_cast<std::uint64_t>(m);
            }
        }
        return static_cast<std::uint64_t>(m >> 64);
    }

    bool bernoulli(double p) noexcept { return uniform01() < p; }

    [[nodiscard]] std::uint64_t seed() const noexcept { return seed_; }
    [[nodiscard]] std::uint64_t stream_id() const noexcept { return stream_id_; }

    friend bool operator==(const RngStream&, const RngStream&) = default;

private:
    void reseed() noexcept {
        std::uint64_t key = detail::mix64(seed_ ^ 0x5851f42d4c957f2dULL);
        key = detail::mix64(key ^ detail::mix64(stream_id_ + detail::kGolden));
        key = detail::mix64(key ^ path_);
        for (auto& word : s_) {
            key += detail::kGolden;
            word = detail::mix64(key);
        }
    }

    std::uint64_t seed_;
    std::uint64_t stream_id_;
    std::uint64_t path_;
    std::array<std::uint64_t, 4> s_{};
};

}  // namespace pfla
