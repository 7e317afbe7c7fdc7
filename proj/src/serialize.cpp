#include "perclab/serialize.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>

namespace perclab {

namespace {

static_assert(std::endian::native == std::endian::little,
              "serialization assumes a little-endian host");

void put_u32(std::ostream& os, std::uint32_t v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof v);
}

void put_u8(std::ostream& os, std::uint8_t v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof v);
}

std::uint32_t get_u32(std::istream& is) {
    std::uint32_t v = 0;
    is.read(reinterpret_cast<char*>(&v), sizeof v);
    return v;
}

std::uint8_t get_u8(std::istream& is) {
    std::uint8_t v = 0;
    is.read(reinterpret_cast<char*>(&v), sizeof v);
    return v;
}

void write_header(std::ostream& os, const LatticeGeometry& geom, std::uint8_t width) {
    put_u32(os, static_cast<std::uint32_t>(geom.dimension()));
    put_u32(os, static_cast<std::uint32_t>(geom.side()));
    put_u8(os, geom.boundary() == Boundary::OpenBox ? 0 : 1);
    put_u8(os, width);
}

LatticeGeometry read_header(std::istream& is, std::uint8_t expected_width) {
    const auto d = get_u32(is);
    const auto side = get_u32(is);
    const auto b = get_u8(is);
    const auto width = get_u8(is);
    if (!is) throw std::runtime_error("truncated configuration header");
    if (b > 1) throw std::runtime_error("bad boundary byte in configuration header");
    if (width != expected_width) throw std::runtime_error("unexpected value width in configuration header");
    return LatticeGeometry(static_cast<int>(d), static_cast<int>(side),
                           b == 0 ? Boundary::OpenBox : Boundary::Torus);
}

} // namespace

void write_particle_config(std::ostream& os, const ParticleConfig& cfg, const LatticeGeometry& geom) {
    if (cfg.values.size() != static_cast<std::size_t>(geom.site_count()))
        throw std::invalid_argument("configuration size does not match the window");
    write_header(os, geom, 8);
    os.write(reinterpret_cast<const char*>(cfg.values.data()),
             static_cast<std::streamsize>(cfg.values.size() * sizeof(double)));
}

void write_site_config(std::ostream& os, const SiteConfig& cfg, const LatticeGeometry& geom) {
    if (cfg.bits.size() != static_cast<std::size_t>(geom.site_count()))
        throw std::invalid_argument("configuration size does not match the window");
    write_header(os, geom, 1);
    os.write(reinterpret_cast<const char*>(cfg.bits.data()),
             static_cast<std::streamsize>(cfg.bits.size()));
}

LoadedParticleConfig read_particle_config(std::istream& is) {
    LatticeGeometry geom = read_header(is, 8);
    ParticleConfig cfg(geom.site_count());
    is.read(reinterpret_cast<char*>(cfg.values.data()),
            static_cast<std::streamsize>(cfg.values.size() * sizeof(double)));
    if (!is) throw std::runtime_error("truncated particle configuration payload");
    return {std::move(cfg), std::move(geom)};
}

LoadedSiteConfig read_site_config(std::istream& is) {
    LatticeGeometry geom = read_header(is, 1);
    SiteConfig cfg(geom.site_count());
    is.read(reinterpret_cast<char*>(cfg.bits.data()), static_cast<std::streamsize>(cfg.bits.size()));
    if (!is) throw std::runtime_error("truncated site configuration payload");
    return {std::move(cfg), std::move(geom)};
}

void save_particle_config(const std::string& path, const ParticleConfig& cfg, const LatticeGeometry& geom) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open " + path + " for writing");
    write_particle_config(os, cfg, geom);
}

void save_site_config(const std::string& path, const SiteConfig& cfg, const LatticeGeometry& geom) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open " + path + " for writing");
    write_site_config(os, cfg, geom);
}

LoadedParticleConfig load_particle_config(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open " + path);
    return read_particle_config(is);
}

} // namespace perclab
