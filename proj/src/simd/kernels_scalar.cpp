#include <array>
#include <stdexcept>

#include "sntlab/simd/kernels.hpp"

namespace sntlab::simd::scalar {

namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
    const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
    hi = static_cast<std::uint32_t>(p >> 32);
    lo = static_cast<std::uint32_t>(p);
}

}  // namespace

std::array<std::uint32_t, 4> philox_block(std::array<std::uint32_t, 4> c, PhiloxKey key) {
    std::uint32_t k0 = key.k0, k1 = key.k1;
    for (int round = 0; round < 10; ++round) {
        std::uint32_t hi0, lo0, hi1, lo1;
        mulhilo(kMul0, c[0], hi0, lo0);
        mulhilo(kMul1, c[2], hi1, lo1);
        c = {hi1 ^ c[1] ^ k0, lo1, hi0 ^ c[3] ^ k1, lo0};
        k0 += kWeyl0;
        k1 += kWeyl1;
    }
    return c;
}

void philox_fill(PhiloxKey key, std::uint64_t first_block, std::uint32_t tag, std::span<std::uint32_t> out) {
    if (out.size() % 4 != 0) throw std::invalid_argument("philox_fill: output size must be a multiple of 4");
    const std::size_t blocks = out.size() / 4;
    for (std::size_t b = 0; b < blocks; ++b) {
        const std::uint64_t ctr = first_block + b;
        auto r = philox_block({static_cast<std::uint32_t>(ctr), static_cast<std::uint32_t>(ctr >> 32), tag, 0u}, key);
        out[4 * b + 0] = r[0];
        out[4 * b + 1] = r[1];
        out[4 * b + 2] = r[2];
        out[4 * b + 3] = r[3];
    }
}

void count_codes(std::span<const std::uint8_t> codes, std::span<std::uint32_t> counts) {
    if (counts.size() > 256) throw std::invalid_argument("count_codes: at most 256 cells");
    for (std::uint8_t c : codes) {
        if (c >= counts.size()) throw std::out_of_range("count_codes: code outside the cell range");
        ++counts[c];
    }
}

}  // namespace sntlab::simd::scalar
