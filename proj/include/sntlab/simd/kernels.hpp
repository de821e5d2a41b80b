#pragma once

// Data-parallel inner loops. Every kernel has a portable scalar reference and,
// on x86-64, an AVX2 variant; the variants are bit-identical by contract (the
// kernels are integer-only), which keeps simulation output independent of the
// host's instruction set.

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>

namespace sntlab::simd {

struct PhiloxKey {
    std::uint32_t k0 = 0;
    std::uint32_t k1 = 0;
};

enum class Level : std::uint8_t { scalar, avx2 };

std::string_view to_string(Level level);
std::optional<Level> parse_level(std::string_view text);

bool supported(Level level);
/// Best level the host supports.
Level detected_level();
/// Level used by the dispatching entry points. Initialised from the
/// SNT_LAB_SIMD environment variable when set, otherwise detected_level().
Level active_level();
/// Throws std::invalid_argument if the host cannot run `level`.
void set_active_level(Level level);

/// Philox4x32-10 blocks for counters {lo(first_block + b), hi(first_block + b), tag, 0},
/// written four words per block. out.size() must be a multiple of 4.
void philox_fill(PhiloxKey key, std::uint64_t first_block, std::uint32_t tag, std::span<std::uint32_t> out);

/// counts[c] += number of codes equal to c. Every code must be < counts.size() <= 256.
void count_codes(std::span<const std::uint8_t> codes, std::span<std::uint32_t> counts);

namespace scalar {
/// One Philox4x32-10 block for an arbitrary 128-bit counter.
std::array<std::uint32_t, 4> philox_block(std::array<std::uint32_t, 4> counter, PhiloxKey key);
void philox_fill(PhiloxKey key, std::uint64_t first_block, std::uint32_t tag, std::span<std::uint32_t> out);
void count_codes(std::span<const std::uint8_t> codes, std::span<std::uint32_t> counts);
}  // namespace scalar

namespace avx2 {
void philox_fill(PhiloxKey key, std::uint64_t first_block, std::uint32_t tag, std::span<std::uint32_t> out);
void count_codes(std::span<const std::uint8_t> codes, std::span<std::uint32_t> counts);
}  // namespace avx2

}  // namespace sntlab::simd
