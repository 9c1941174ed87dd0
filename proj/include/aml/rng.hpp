#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace aml {

/// SplitMix64 finalizer. Used to derive child stream keys and to expand a
/// 64-bit key into generator state.
constexpr std::uint64_t splitmix64(std::uint64_t& state) noexcept {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Deterministic, splittable random stream (xoshiro256** core).
///
/// Every stream is identified by a 64-bit key. `child(tag)` derives an
/// independent stream from the key and the tag without touching the parent
/// state, so a hierarchy such as master -> run -> iteration -> side ->
/// simulation yields the same numbers regardless of evaluation order or
/// thread count.
///
/// Satisfies UniformRandomBitGenerator, so it plugs into <random>
/// distributions.
class Stream {
public:
    using result_type = std::uint64_t;

    explicit Stream(std::uint64_t key = 0) noexcept : key_(key) {
        std::uint64_t sm = key;
        for (auto& word : state_) word = splitmix64(sm);
    }

    [[nodiscard]] std::uint64_t key() const noexcept { return key_; }

    [[nodiscard]] Stream child(std::uint64_t tag) const noexcept {
        std::uint64_t sm = key_ ^ 0x6a09e667f3bcc909ULL;
        std::uint64_t mixed = splitmix64(sm);
        sm = mixed ^ (tag * 0xd1342543de82ef95ULL + 0x2545f4914f6cdd1dULL);
        return Stream(splitmix64(sm));
    }

    template <typename... Tags>
    [[nodiscard]] Stream child(std::uint64_t first, Tags... rest) const noexcept {
        if constexpr (sizeof...(rest) == 0) {
            return child(first);
        } else {
            return child(first).child(static_cast<std::uint64_t>(rest)...);
        }
    }

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept {
        return std::numeric_limits<result_type>::max();
    }

    result_type operator()() noexcept {
        const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform01() noexcept {
        return static_cast<double>((*this)() >> 11) * 0x1.0p-53;
    }

private:
    static constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept {
        return (x << k) | (x >> (64 - k));
    }

    std::uint64_t key_;
    std::array<std::uint64_t, 4> state_{};
};

// Stream tags for the estimator's hierarchy.
namespace stream_tag {
inline constexpr std::uint64_t kScreen = 1;
inline constexpr std::uint64_t kRun = 2;
inline constexpr std::uint64_t kCalibrate = 3;
inline constexpr std::uint64_t kIteration = 4;
inline constexpr std::uint64_t kDiagnostic = 5;
inline constexpr std::uint64_t kFinal = 6;
inline constexpr std::uint64_t kObserved = 7;
inline constexpr std::uint64_t kReplicate = 8;
inline constexpr std::uint64_t kBootstrap = 9;
inline constexpr std::uint64_t kPerturbation = 10;
inline constexpr std::uint64_t kMinus = 11;
inline constexpr std::uint64_t kPlus = 12;
inline constexpr std::uint64_t kOld = 13;
inline constexpr std::uint64_t kNew = 14;
}  // namespace stream_tag

}  // namespace aml
