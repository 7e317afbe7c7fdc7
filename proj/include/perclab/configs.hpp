#pragma once

#include <cstdint>
#include <numeric>
#include <vector>

#include "perclab/geometry.hpp"

namespace perclab {

/// Nonnegative particle mass per site (integer-valued for the toppling
/// dynamics, arbitrary nonnegative in general).
struct ParticleConfig {
    std::vector<double> values;

    ParticleConfig() = default;
    explicit ParticleConfig(std::int64_t n, double fill = 0.0)
        : values(static_cast<std::size_t>(n), fill) {}

    double total() const { return std::accumulate(values.begin(), values.end(), 0.0); }
    bool operator==(const ParticleConfig&) const = default;
};

/// One open/closed bit per site.
struct SiteConfig {
    std::vector<std::uint8_t> bits;

    SiteConfig() = default;
    explicit SiteConfig(std::int64_t n, std::uint8_t fill = 0)
        : bits(static_cast<std::size_t>(n), fill) {}

    std::int64_t open_count() const {
        return std::accumulate(bits.begin(), bits.end(), std::int64_t{0});
    }
    bool operator==(const SiteConfig&) const = default;
};

/// (tau_z xi)_y = xi_{y-z}, coordinates mod L. Torus windows only.
ParticleConfig translate_config(const ParticleConfig& cfg, const Site& z, const LatticeGeometry& geom);
SiteConfig translate_bits(const SiteConfig& cfg, const Site& z, const LatticeGeometry& geom);

} // namespace perclab
