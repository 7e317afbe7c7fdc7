#pragma once

#include <cstdint>
#include <vector>

#include "perclab/configs.hpp"
#include "perclab/geometry.hpp"

// The monotone maps T taking a particle configuration to an open/closed site
// configuration:
//
//  - sandpile: a site with mass >= t (default t = 2d) topples, sending one
//    particle to each of its 2d neighbors; omega is the set of sites that
//    toppled at least once. On the open box, particles sent across the
//    boundary vanish, which guarantees termination.
//  - bootstrap: sites with mass >= t start occupied; a vacant site becomes
//    occupied when at least theta neighbors are occupied; omega is the
//    closure.
//  - activated random walk: sitewise instruction stacks (Diaconis-Fulton);
//    an active particle consumes the next instruction at its site, either
//    falling asleep (probability lambda/(1+lambda), a no-op unless the
//    particle is alone) or stepping to a uniform directional neighbor,
//    sinks included. omega is the set of sites that emitted a move.
//  - identity: omega = {mass >= t}, the bare threshold map.
//
// All four are deterministic functions of (configuration, seed), which makes
// monotonicity and avalanche-connectivity checkable pathwise.

namespace perclab {

struct Odometer {
    std::vector<std::int64_t> topples;
    std::int64_t total = 0;

    Odometer() = default;
    explicit Odometer(std::int64_t n) : topples(static_cast<std::size_t>(n), 0) {}
    bool operator==(const Odometer&) const = default;
};

struct StabilizationResult {
    SiteConfig omega;
    Odometer odometer;
    ParticleConfig final_config;
    bool stabilized = true;
    double dissipated = 0.0; // mass lost to sinks (open box)
};

enum class AutomatonKind { Identity, Sandpile, Bootstrap, Arw };

struct AutomatonSpec {
    AutomatonKind kind = AutomatonKind::Sandpile;
    double threshold = 0.0; // mass threshold t; 0 picks the kind's default
    int theta = 2;          // bootstrap neighbor rule
    double lambda = 1.0;    // ARW sleep rate, may be infinity
    std::int64_t cap_factor = 10000; // toppling cap = cap_factor * site count

    const char* name() const noexcept;
    bool deterministic() const noexcept { return kind != AutomatonKind::Arw; }
    bool toppling() const noexcept {
        return kind == AutomatonKind::Sandpile || kind == AutomatonKind::Arw;
    }
    /// Effective t: 2d for the sandpile, 2 for ARW, 1 otherwise, unless set.
    double threshold_for(const LatticeGeometry& geom) const;
    std::int64_t cap_for(const LatticeGeometry& geom) const;
};

enum class TopplingOrder { Fifo, Random };

StabilizationResult sandpile_stabilize(const ParticleConfig& xi, const LatticeGeometry& geom,
                                       std::int64_t t, std::int64_t cap,
                                       TopplingOrder order = TopplingOrder::Fifo,
                                       std::uint64_t order_seed = 0);

/// Runs `trials` stabilizations with uniformly random unstable-site selection
/// and reports whether every odometer and final configuration is identical to
/// the FIFO result.
bool abelian_check(const ParticleConfig& xi, const LatticeGeometry& geom, std::int64_t t,
                   int trials, std::uint64_t seed);

SiteConfig bootstrap_apply(const ParticleConfig& xi, const LatticeGeometry& geom, int theta,
                           double occupy_threshold = 1.0);

StabilizationResult arw_stabilize(const ParticleConfig& xi, const LatticeGeometry& geom,
                                  double lambda, std::uint64_t stack_seed, std::int64_t cap,
                                  TopplingOrder order = TopplingOrder::Fifo,
                                  std::uint64_t order_seed = 0);

/// Pointwise OR of omega_p1 with the indicator {y >= t}.
SiteConfig interpolate_config(const SiteConfig& omega_p1, const ParticleConfig& y, double t);

StabilizationResult apply_automaton(const AutomatonSpec& spec, const ParticleConfig& xi,
                                    const LatticeGeometry& geom, std::uint64_t seed);

/// xi with the mass at one site raised to max(r, xi_x).
ParticleConfig raise_site(const ParticleConfig& xi, std::int64_t site, double r);

struct IncreaseDiff {
    SiteConfig before;
    SiteConfig after;
    std::vector<std::int64_t> diff; // sites open after but not before
};

/// Applies the automaton to xi and to xi^{x,r} under shared randomness and
/// reports the newly opened sites.
IncreaseDiff increase_and_diff(const AutomatonSpec& spec, const ParticleConfig& xi,
                               std::int64_t site, double r, const LatticeGeometry& geom,
                               std::uint64_t shared_seed);

} // namespace perclab
