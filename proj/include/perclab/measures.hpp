#pragma once

#include <cstdint>
#include <vector>

#include "perclab/configs.hpp"
#include "perclab/geometry.hpp"

namespace perclab {

enum class FamilyKind { Poisson, ScaledBernoulli, Table };

/// Step quantile function for a single parameter value: Q(u) = mass[k] for
/// the first k with u < cdf[k]. cdf must be strictly increasing and end at 1,
/// mass nondecreasing.
struct QuantileTable {
    double p = 0.0;
    std::vector<double> cdf;
    std::vector<double> mass;
};

/// One-parameter family of site-mass laws, stochastically increasing in p.
/// Poisson uses rate p * rho_max; the scaled Bernoulli puts mass t with
/// probability p and 0 otherwise.
class MeasureFamily {
public:
    static MeasureFamily poisson(double rho_max, double threshold_t);
    static MeasureFamily scaled_bernoulli(double threshold_t);
    static MeasureFamily table(std::vector<QuantileTable> tables, double threshold_t);

    FamilyKind kind() const noexcept { return kind_; }
    double threshold() const noexcept { return threshold_; }
    double rho_max() const noexcept { return rho_max_; }
    const char* name() const noexcept;

    /// Generalized inverse CDF of mu_p at u; nondecreasing in both arguments.
    double quantile(double p, double u) const;

    /// mu_p([t, inf)): the insertion probability of a single site. Zero means
    /// the family admits no insertion at this p (callers should warn).
    double insertion_epsilon(double p) const;

private:
    MeasureFamily() = default;

    FamilyKind kind_ = FamilyKind::ScaledBernoulli;
    double threshold_ = 1.0;
    double rho_max_ = 1.0;
    std::vector<QuantileTable> tables_;
};

/// Shared-uniform coupling across three parameters: one U_x per site feeds
/// the quantile at p1, p2, p3, so the three configurations are pointwise
/// ordered by construction.
struct CouplingSampler {
    MeasureFamily family;
    double p1 = 0.0, p2 = 0.0, p3 = 0.0; // strictly increasing
    std::uint64_t seed = 0;
};

struct CoupledTriple {
    ParticleConfig x, y, z;
};

CoupledTriple sample_coupled(const LatticeGeometry& geom, const CouplingSampler& sampler);

/// Single-parameter sample through the same per-site uniforms.
ParticleConfig sample_config(const LatticeGeometry& geom, const MeasureFamily& family, double p,
                             std::uint64_t seed);

} // namespace perclab
