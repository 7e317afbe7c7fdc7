#include "perclab/configs.hpp"

#include <stdexcept>

namespace perclab {

namespace {

void check_sized(std::size_t have, const LatticeGeometry& geom) {
    if (have != static_cast<std::size_t>(geom.site_count()))
        throw std::invalid_argument("configuration size does not match the window");
}

} // namespace

ParticleConfig translate_config(const ParticleConfig& cfg, const Site& z, const LatticeGeometry& geom) {
    check_sized(cfg.values.size(), geom);
    ParticleConfig out(geom.site_count());
    for (std::int64_t i = 0; i < geom.site_count(); ++i)
        out.values[static_cast<std::size_t>(geom.translated(i, z))] = cfg.values[static_cast<std::size_t>(i)];
    return out;
}

SiteConfig translate_bits(const SiteConfig& cfg, const Site& z, const LatticeGeometry& geom) {
    check_sized(cfg.bits.size(), geom);
    SiteConfig out(geom.site_count());
    for (std::int64_t i = 0; i < geom.site_count(); ++i)
        out.bits[static_cast<std::size_t>(geom.translated(i, z))] = cfg.bits[static_cast<std::size_t>(i)];
    return out;
}

} // namespace perclab
