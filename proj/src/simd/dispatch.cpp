#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string>

#include "sntlab/simd/kernels.hpp"

namespace sntlab::simd {

namespace {

bool cpu_has_avx2() {
#if defined(SNTLAB_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
    __builtin_cpu_init();
    return __builtin_cpu_supports("avx2");
#else
    return false;
#endif
}

Level initial_level() {
    if (const char* env = std::getenv("SNT_LAB_SIMD")) {
        if (auto lvl = parse_level(env); lvl && supported(*lvl)) return *lvl;
    }
    return detected_level();
}

std::atomic<Level>& level_slot() {
    static std::atomic<Level> slot{initial_level()};
    return slot;
}

}  // namespace

std::string_view to_string(Level level) { return level == Level::avx2 ? "avx2" : "scalar"; }

std::optional<Level> parse_level(std::string_view text) {
    if (text == "scalar") return Level::scalar;
    if (text == "avx2") return Level::avx2;
    return std::nullopt;
}

bool supported(Level level) {
    if (level == Level::scalar) return true;
    static const bool avx2 = cpu_has_avx2();
    return avx2;
}

Level detected_level() { return supported(Level::avx2) ? Level::avx2 : Level::scalar; }

Level active_level() { return level_slot().load(std::memory_order_relaxed); }

void set_active_level(Level level) {
    if (!supported(level)) throw std::invalid_argument("SIMD level " + std::string(to_string(level)) + " unsupported");
    level_slot().store(level, std::memory_order_relaxed);
}

void philox_fill(PhiloxKey key, std::uint64_t first_block, std::uint32_t tag, std::span<std::uint32_t> out) {
#if defined(SNTLAB_HAVE_AVX2)
    if (active_level() == Level::avx2) return avx2::philox_fill(key, first_block, tag, out);
#endif
    scalar::philox_fill(key, first_block, tag, out);
}

void count_codes(std::span<const std::uint8_t> codes, std::span<std::uint32_t> counts) {
#if defined(SNTLAB_HAVE_AVX2)
    if (active_level() == Level::avx2) return avx2::count_codes(codes, counts);
#endif
    scalar::count_codes(codes, counts);
}

}  // namespace sntlab::simd
