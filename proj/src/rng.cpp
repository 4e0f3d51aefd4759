#include "klrlab/rng.hpp"

#include <cmath>
#include <numbers>

namespace klrlab {

namespace {

constexpr std::uint32_t kPhiloxW32A = 0x9E3779B9;
constexpr std::uint32_t kPhiloxW32B = 0xBB67AE85;
constexpr std::uint32_t kPhiloxM4x32A = 0xD2511F53;
constexpr std::uint32_t kPhiloxM4x32B = 0xCD9E8D57;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& lo, std::uint32_t& hi) {
    const std::uint64_t product = static_cast<std::uint64_t>(a) * b;
    lo = static_cast<std::uint32_t>(product);
    hi = static_cast<std::uint32_t>(product >> 32);
}

}  // namespace

std::uint64_t splitmix64(std::uint64_t x) noexcept {
    std::uint64_t z = x + 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

Seed Seed::derive(std::uint64_t tag) const noexcept {
    return Seed{root, splitmix64(stream ^ splitmix64(tag + 0x632be59bd9b4e019ull))};
}

Philox4x32::Philox4x32(const Seed& seed) noexcept {
    const std::uint64_t k = splitmix64(seed.root) ^ splitmix64(seed.stream ^ 0xa0761d6478bd642full);
    key_ = {static_cast<std::uint32_t>(k), static_cast<std::uint32_t>(k >> 32)};
}

Philox4x32 Philox4x32::from_key(std::uint32_t k0, std::uint32_t k1) noexcept {
    Philox4x32 engine;
    engine.key_ = {k0, k1};
    return engine;
}

std::array<std::uint32_t, 4> Philox4x32::block(std::uint64_t draw, std::uint64_t sub) const noexcept {
    std::array<std::uint32_t, 4> ctr = {
        static_cast<std::uint32_t>(draw), static_cast<std::uint32_t>(draw >> 32),
        static_cast<std::uint32_t>(sub), static_cast<std::uint32_t>(sub >> 32)};
    std::array<std::uint32_t, 2> key = key_;
    for (int round = 0; round < 10; ++round) {
        std::uint32_t lo0, hi0, lo1, hi1;
        mulhilo(kPhiloxM4x32A, ctr[0], lo0, hi0);
        mulhilo(kPhiloxM4x32B, ctr[2], lo1, hi1);
        ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
        key[0] += kPhiloxW32A;
        key[1] += kPhiloxW32B;
    }
    return ctr;
}

std::uint64_t DrawStream::next_u64() noexcept {
    if (buffered_ == 0) {
        const auto b = engine_->block(draw_, sub_++);
        buffer_[0] = (static_cast<std::uint64_t>(b[1]) << 32) | b[0];
        buffer_[1] = (static_cast<std::uint64_t>(b[3]) << 32) | b[2];
        buffered_ = 2;
    }
    return buffer_[2 - buffered_--];
}

double DrawStream::uniform() noexcept {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

std::uint64_t DrawStream::below(std::uint64_t bound) noexcept {
    unsigned __int128 m = static_cast<unsigned __int128>(next_u64()) * bound;
    auto low = static_cast<std::uint64_t>(m);
    if (low < bound) {
        const std::uint64_t threshold = (0 - bound) % bound;
        while (low < threshold) {
            m = static_cast<unsigned __int128>(next_u64()) * bound;
            low = static_cast<std::uint64_t>(m);
        }
    }
    return static_cast<std::uint64_t>(m >> 64);
}

double DrawStream::normal() noexcept {
    const double u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace klrlab
