#include "sntlab/random.hpp"

#include <algorithm>

namespace sntlab {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

simd::PhiloxKey derive_key(std::uint64_t master_seed, int scenario_ordinal, std::uint64_t replicate) {
    std::uint64_t h = splitmix64(master_seed);
    h = splitmix64(h ^ (static_cast<std::uint64_t>(scenario_ordinal) + 1) * 0xD6E8FEB86659FD93ull);
    h = splitmix64(h ^ replicate);
    return {static_cast<std::uint32_t>(h), static_cast<std::uint32_t>(h >> 32)};
}

void RandomStream::fill(std::span<std::uint32_t> out) {
    const std::size_t whole = out.size() - out.size() % 4;
    if (whole) {
        simd::philox_fill(key_, next_block_, static_cast<std::uint32_t>(purpose_), out.first(whole));
        next_block_ += whole / 4;
    }
    if (whole < out.size()) {
        std::uint32_t tail[4];
        simd::philox_fill(key_, next_block_, static_cast<std::uint32_t>(purpose_), tail);
        ++next_block_;
        std::copy_n(tail, out.size() - whole, out.begin() + static_cast<std::ptrdiff_t>(whole));
    }
    buffered_ = 0;
}

void RandomStream::refill() {
    simd::philox_fill(key_, next_block_++, static_cast<std::uint32_t>(purpose_), buffer_);
    buffered_ = 4;
}

std::uint32_t RandomStream::next_u32() {
    if (buffered_ == 0) refill();
    return buffer_[4 - buffered_--];
}

std::uint64_t RandomStream::next_u64() {
    const std::uint64_t lo = next_u32();
    const std::uint64_t hi = next_u32();
    return (hi << 32) | lo;
}

std::uint64_t RandomStream::next_below(std::uint64_t bound) {
    const unsigned __int128 m = static_cast<unsigned __int128>(next_u64()) * bound;
    return static_cast<std::uint64_t>(m >> 64);
}

}  // namespace sntlab
