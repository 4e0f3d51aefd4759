#pragma once

#include <array>
#include <cstdint>

namespace klrlab {

/// Identifies a reproducible random stream. Every sample drawn by the library
/// is a pure function of (root, stream, draw index).
struct Seed {
    std::uint64_t root = 0;
    std::uint64_t stream = 0;

    /// Child stream for a named sub-purpose (X matrix, permutations, ...).
    Seed derive(std::uint64_t tag) const noexcept;

    friend bool operator==(const Seed&, const Seed&) = default;
};

std::uint64_t splitmix64(std::uint64_t x) noexcept;

/// Philox4x32-10 keyed by a Seed. Stateless: `block(draw, sub)` maps the
/// 128-bit counter (draw, sub) to 128 random bits, so any draw can be
/// generated independently of all others.
class Philox4x32 {
  public:
    explicit Philox4x32(const Seed& seed) noexcept;

    /// Raw-key constructor, used for known-answer tests.
    static Philox4x32 from_key(std::uint32_t k0, std::uint32_t k1) noexcept;

    std::array<std::uint32_t, 4> block(std::uint64_t draw, std::uint64_t sub) const noexcept;

  private:
    Philox4x32() = default;

    std::array<std::uint32_t, 2> key_{};
};

/// Sequential view over the counter blocks of one draw index. Variable-length
/// samplers (mixtures, rejection loops) pull as many uniforms as they need.
class DrawStream {
  public:
    DrawStream(const Philox4x32& engine, std::uint64_t draw) noexcept
        : engine_(&engine), draw_(draw) {}

    std::uint64_t next_u64() noexcept;

    /// Uniform on the open interval (0, 1) with 53-bit resolution.
    double uniform() noexcept;

    /// Uniform integer in [0, bound) by Lemire's multiply-shift with rejection.
    std::uint64_t below(std::uint64_t bound) noexcept;

    /// Standard normal via Box-Muller (cosine branch only).
    double normal() noexcept;

  private:
    const Philox4x32* engine_;
    std::uint64_t draw_;
    std::uint64_t sub_ = 0;
    std::array<std::uint64_t, 2> buffer_{};
    int buffered_ = 0;
};

}  // namespace klrlab
