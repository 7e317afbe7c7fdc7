#pragma once

#include <cstdint>

// Counter-based randomness: every random quantity in the project is a pure
// function of a 64-bit key, so results never depend on iteration order or
// thread scheduling.

namespace perclab {

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

constexpr std::uint64_t mix(std::uint64_t a, std::uint64_t b) noexcept {
    std::uint64_t h = splitmix64(a);
    h ^= splitmix64(b) + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
    return splitmix64(h);
}

template <typename... Rest>
constexpr std::uint64_t mix(std::uint64_t a, std::uint64_t b, Rest... rest) noexcept {
    return mix(mix(a, b), static_cast<std::uint64_t>(rest)...);
}

// Uniform double in [0, 1) from a hashed key.
constexpr double uniform01(std::uint64_t h) noexcept {
    return static_cast<double>(h >> 11) * 0x1.0p-53;
}

// The per-site uniform U_x: drawn once per (seed, site), shared by all
// parameter values so coupled configurations are pointwise ordered.
inline double site_uniform(std::uint64_t seed, std::int64_t site) noexcept {
    return uniform01(mix(seed, static_cast<std::uint64_t>(site)));
}

// Small stateful generator for order-randomization; seeded from a key.
class KeyedRng {
public:
    explicit KeyedRng(std::uint64_t seed) : state_(splitmix64(seed)) {}

    std::uint64_t next() noexcept {
        state_ += 0x9e3779b97f4a7c15ull;
        return splitmix64(state_);
    }

    // Uniform integer in [0, n), n > 0.
    std::uint64_t below(std::uint64_t n) noexcept { return next() % n; }

    double uniform() noexcept { return uniform01(next()); }

private:
    std::uint64_t state_;
};

} // namespace perclab
