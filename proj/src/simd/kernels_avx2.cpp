// Compiled with -mavx2; only reached after a runtime CPU check.

#include <immintrin.h>

#include <array>
#include <stdexcept>

#include "sntlab/simd/kernels.hpp"

namespace sntlab::simd::avx2 {

namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

// 32x32 -> 64 multiply of all eight lanes against one constant.
inline void mulhilo8(__m256i x, __m256i m, __m256i& hi, __m256i& lo) {
    const __m256i even = _mm256_mul_epu32(x, m);
    const __m256i odd = _mm256_mul_epu32(_mm256_srli_epi64(x, 32), m);
    lo = _mm256_blend_epi32(even, _mm256_slli_epi64(odd, 32), 0b10101010);
    hi = _mm256_blend_epi32(_mm256_srli_epi64(even, 32), odd, 0b10101010);
}

}  // namespace

void philox_fill(PhiloxKey key, std::uint64_t first_block, std::uint32_t tag, std::span<std::uint32_t> out) {
    if (out.size() % 4 != 0) throw std::invalid_argument("philox_fill: output size must be a multiple of 4");
    const std::size_t blocks = out.size() / 4;
    const std::size_t full = blocks - blocks % 8;

    const __m256i m0 = _mm256_set1_epi32(static_cast<int>(kMul0));
    const __m256i m1 = _mm256_set1_epi32(static_cast<int>(kMul1));
    const __m256i tag_v = _mm256_set1_epi32(static_cast<int>(tag));

    alignas(32) std::uint32_t lo_ctr[8];
    alignas(32) std::uint32_t hi_ctr[8];
    alignas(32) std::uint32_t r[4][8];

    for (std::size_t b = 0; b < full; b += 8) {
        for (int lane = 0; lane < 8; ++lane) {
            const std::uint64_t ctr = first_block + b + static_cast<std::uint64_t>(lane);
            lo_ctr[lane] = static_cast<std::uint32_t>(ctr);
            hi_ctr[lane] = static_cast<std::uint32_t>(ctr >> 32);
        }
        __m256i c0 = _mm256_load_si256(reinterpret_cast<const __m256i*>(lo_ctr));
        __m256i c1 = _mm256_load_si256(reinterpret_cast<const __m256i*>(hi_ctr));
        __m256i c2 = tag_v;
        __m256i c3 = _mm256_setzero_si256();
        std::uint32_t k0 = key.k0, k1 = key.k1;
        for (int round = 0; round < 10; ++round) {
            __m256i hi0, lo0, hi1, lo1;
            mulhilo8(c0, m0, hi0, lo0);
            mulhilo8(c2, m1, hi1, lo1);
            const __m256i k0v = _mm256_set1_epi32(static_cast<int>(k0));
            const __m256i k1v = _mm256_set1_epi32(static_cast<int>(k1));
            c0 = _mm256_xor_si256(_mm256_xor_si256(hi1, c1), k0v);
            c1 = lo1;
            c2 = _mm256_xor_si256(_mm256_xor_si256(hi0, c3), k1v);
            c3 = lo0;
            k0 += kWeyl0;
            k1 += kWeyl1;
        }
        _mm256_store_si256(reinterpret_cast<__m256i*>(r[0]), c0);
        _mm256_store_si256(reinterpret_cast<__m256i*>(r[1]), c1);
        _mm256_store_si256(reinterpret_cast<__m256i*>(r[2]), c2);
        _mm256_store_si256(reinterpret_cast<__m256i*>(r[3]), c3);
        std::uint32_t* dst = out.data() + 4 * b;
        for (int lane = 0; lane < 8; ++lane) {
            dst[4 * lane + 0] = r[0][lane];
            dst[4 * lane + 1] = r[1][lane];
            dst[4 * lane + 2] = r[2][lane];
            dst[4 * lane + 3] = r[3][lane];
        }
    }
    if (full < blocks) scalar::philox_fill(key, first_block + full, tag, out.subspan(4 * full));
}

void count_codes(std::span<const std::uint8_t> codes, std::span<std::uint32_t> counts) {
    const std::size_t cells = counts.size();
    if (cells > 256) throw std::invalid_argument("count_codes: at most 256 cells");
    const std::size_t n = codes.size();
    const std::size_t full = n - n % 32;
    const std::uint8_t* src = codes.data();

    // Validate first so a bad code leaves counts untouched.
    __m256i vmax = _mm256_setzero_si256();
    for (std::size_t i = 0; i < full; i += 32) {
        vmax = _mm256_max_epu8(vmax, _mm256_loadu_si256(reinterpret_cast<const __m256i*>(src + i)));
    }
    alignas(32) std::uint8_t lanes[32];
    _mm256_store_si256(reinterpret_cast<__m256i*>(lanes), vmax);
    std::uint32_t top = 0;
    for (std::uint8_t v : lanes) top = v > top ? v : top;
    for (std::size_t i = full; i < n; ++i) top = src[i] > top ? src[i] : top;
    if (n > 0 && top >= cells) throw std::out_of_range("count_codes: code outside the cell range");

    // Byte-wide per-cell accumulators, flushed before they can overflow.
    std::array<__m256i, 256> acc;
    for (std::size_t c = 0; c < cells; ++c) acc[c] = _mm256_setzero_si256();
    const __m256i zero = _mm256_setzero_si256();
    auto flush = [&] {
        for (std::size_t c = 0; c < cells; ++c) {
            const __m256i sums = _mm256_sad_epu8(acc[c], zero);
            alignas(32) std::uint64_t s[4];
            _mm256_store_si256(reinterpret_cast<__m256i*>(s), sums);
            counts[c] += static_cast<std::uint32_t>(s[0] + s[1] + s[2] + s[3]);
            acc[c] = zero;
        }
    };

    std::size_t pending = 0;
    for (std::size_t i = 0; i < full; i += 32) {
        const __m256i v = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(src + i));
        for (std::size_t c = 0; c < cells; ++c) {
            const __m256i hit = _mm256_cmpeq_epi8(v, _mm256_set1_epi8(static_cast<char>(c)));
            acc[c] = _mm256_sub_epi8(acc[c], hit);
        }
        if (++pending == 255) {
            flush();
            pending = 0;
        }
    }
    if (pending) flush();
    for (std::size_t i = full; i < n; ++i) ++counts[src[i]];
}

}  // namespace sntlab::simd::avx2
