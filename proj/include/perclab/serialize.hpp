#pragma once

#include <iosfwd>
#include <string>

#include "perclab/configs.hpp"
#include "perclab/geometry.hpp"

namespace perclab {

// Flat binary layout, little-endian:
//   u32 dimension, u32 side, u8 boundary (0 = open box, 1 = torus),
//   u8 value width (8 = f64 particle masses, 1 = u8 open/closed bits),
//   then row-major values.

void write_particle_config(std::ostream& os, const ParticleConfig& cfg, const LatticeGeometry& geom);
void write_site_config(std::ostream& os, const SiteConfig& cfg, const LatticeGeometry& geom);

struct LoadedParticleConfig {
    ParticleConfig config;
    LatticeGeometry geometry;
};
struct LoadedSiteConfig {
    SiteConfig config;
    LatticeGeometry geometry;
};

LoadedParticleConfig read_particle_config(std::istream& is);
LoadedSiteConfig read_site_config(std::istream& is);

void save_particle_config(const std::string& path, const ParticleConfig& cfg, const LatticeGeometry& geom);
void save_site_config(const std::string& path, const SiteConfig& cfg, const LatticeGeometry& geom);
LoadedParticleConfig load_particle_config(const std::string& path);

} // namespace perclab
