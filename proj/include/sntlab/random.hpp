#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "sntlab/simd/kernels.hpp"

namespace sntlab {

/// What a substream is used for; becomes the third Philox counter word so
/// the purposes never share a block.
enum class StreamPurpose : std::uint32_t { cohort = 1, assignment = 2, pool_sampling = 3 };

/// Replicate index reserved for the scenario-level superpopulation pool.
inline constexpr std::uint64_t kPoolReplicate = ~std::uint64_t{0};

std::uint64_t splitmix64(std::uint64_t x);

/// Substream key for one (seed, scenario, replicate) triple.
simd::PhiloxKey derive_key(std::uint64_t master_seed, int scenario_ordinal, std::uint64_t replicate);

/// Counter-based random stream over Philox4x32-10. Each block yields four
/// 32-bit words; the stream position is a block index, so any stream can be
/// replayed or split without shared state.
class RandomStream {
public:
    RandomStream(simd::PhiloxKey key, StreamPurpose purpose, std::uint64_t first_block = 0)
        : key_(key), purpose_(purpose), next_block_(first_block) {}

    /// Fills `out` (any length) and advances by ceil(out.size() / 4) blocks.
    void fill(std::span<std::uint32_t> out);

    std::uint32_t next_u32();
    std::uint64_t next_u64();
    /// Uniform integer in [0, bound) by 64x64 -> 128 multiply-shift.
    std::uint64_t next_below(std::uint64_t bound);

    std::uint64_t position() const { return next_block_; }

private:
    void refill();

    simd::PhiloxKey key_;
    StreamPurpose purpose_;
    std::uint64_t next_block_;
    std::uint32_t buffer_[4] = {};
    int buffered_ = 0;
};

/// Threshold t with P(u32 < t) = p for a uniform 32-bit word (p quantised to 2^-32).
inline std::uint64_t bernoulli_threshold(double p) {
    if (!(p > 0.0)) return 0;
    if (p >= 1.0) return std::uint64_t{1} << 32;
    return static_cast<std::uint64_t>(p * 4294967296.0);
}

inline bool bernoulli(std::uint32_t word, std::uint64_t threshold) { return word < threshold; }

}  // namespace sntlab
