#include "perclab/measures.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "perclab/rng.hpp"

namespace perclab {

namespace {

void check_parameter(double p) {
    if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("family parameter must lie in [0, 1]");
}

void check_uniform(double u) {
    if (!(u >= 0.0 && u < 1.0)) throw std::invalid_argument("uniform value must lie in [0, 1)");
}

// Smallest k with P(Poisson(rho) <= k) > u.
double poisson_quantile(double rho, double u) {
    if (rho <= 0.0) return 0.0;
    double pmf = std::exp(-rho);
    double cdf = pmf;
    double k = 0.0;
    // u < 1 strictly, so the loop terminates; the bound guards against
    // pathological rounding deep in the tail.
    const double kmax = 20.0 * rho + 200.0;
    while (cdf <= u && k < kmax) {
        k += 1.0;
        pmf *= rho / k;
        cdf += pmf;
    }
    return k;
}

double poisson_upper_tail(double rho, double t) {
    // P(X >= t) for integer X: sum the pmf below ceil(t).
    const double kt = std::ceil(t);
    if (kt <= 0.0) return 1.0;
    double pmf = std::exp(-rho);
    double cdf = pmf;
    for (double k = 1.0; k < kt; k += 1.0) {
        pmf *= rho / k;
        cdf += pmf;
    }
    return std::max(0.0, 1.0 - cdf);
}

} // namespace

MeasureFamily MeasureFamily::poisson(double rho_max, double threshold_t) {
    if (!(rho_max > 0.0)) throw std::invalid_argument("rho_max must be positive");
    if (!(threshold_t > 0.0)) throw std::invalid_argument("threshold t must be positive");
    MeasureFamily f;
    f.kind_ = FamilyKind::Poisson;
    f.rho_max_ = rho_max;
    f.threshold_ = threshold_t;
    return f;
}

MeasureFamily MeasureFamily::scaled_bernoulli(double threshold_t) {
    if (!(threshold_t > 0.0)) throw std::invalid_argument("threshold t must be positive");
    MeasureFamily f;
    f.kind_ = FamilyKind::ScaledBernoulli;
    f.threshold_ = threshold_t;
    return f;
}

MeasureFamily MeasureFamily::table(std::vector<QuantileTable> tables, double threshold_t) {
    if (tables.empty()) throw std::invalid_argument("table family needs at least one entry");
    if (!(threshold_t > 0.0)) throw std::invalid_argument("threshold t must be positive");
    std::sort(tables.begin(), tables.end(),
              [](const QuantileTable& a, const QuantileTable& b) { return a.p < b.p; });
    for (const auto& t : tables) {
        check_parameter(t.p);
        if (t.cdf.size() != t.mass.size() || t.cdf.empty())
            throw std::invalid_argument("quantile table needs matching cdf/mass lists");
        for (std::size_t i = 0; i < t.cdf.size(); ++i) {
            if (i > 0 && !(t.cdf[i] > t.cdf[i - 1]))
                throw std::invalid_argument("quantile table cdf must be strictly increasing");
            if (i > 0 && t.mass[i] < t.mass[i - 1])
                throw std::invalid_argument("quantile table masses must be nondecreasing");
            if (t.mass[i] < 0.0) throw std::invalid_argument("quantile table masses must be >= 0");
        }
        if (t.cdf.back() != 1.0) throw std::invalid_argument("quantile table cdf must end at 1");
    }
    // Monotone in p: check successive tables on the union of breakpoints.
    for (std::size_t i = 1; i < tables.size(); ++i) {
        std::vector<double> us;
        us.push_back(0.0);
        for (double c : tables[i - 1].cdf) us.push_back(std::nextafter(c, 0.0));
        for (double c : tables[i].cdf) us.push_back(std::nextafter(c, 0.0));
        MeasureFamily lo, hi;
        lo.kind_ = hi.kind_ = FamilyKind::Table;
        lo.tables_ = {tables[i - 1]};
        hi.tables_ = {tables[i]};
        for (double u : us) {
            if (u < 0.0 || u >= 1.0) continue;
            if (lo.quantile(tables[i - 1].p, u) > hi.quantile(tables[i].p, u))
                throw std::invalid_argument("quantile tables are not stochastically increasing in p");
        }
    }
    MeasureFamily f;
    f.kind_ = FamilyKind::Table;
    f.threshold_ = threshold_t;
    f.tables_ = std::move(tables);
    return f;
}

const char* MeasureFamily::name() const noexcept {
    switch (kind_) {
        case FamilyKind::Poisson: return "poisson";
        case FamilyKind::ScaledBernoulli: return "scaled_bernoulli";
        case FamilyKind::Table: return "table";
    }
    return "?";
}

double MeasureFamily::quantile(double p, double u) const {
    check_parameter(p);
    check_uniform(u);
    switch (kind_) {
        case FamilyKind::Poisson:
            return poisson_quantile(p * rho_max_, u);
        case FamilyKind::ScaledBernoulli:
            return u >= 1.0 - p ? threshold_ : 0.0;
        case FamilyKind::Table: {
            const QuantileTable* best = nullptr;
            for (const auto& t : tables_)
                if (std::abs(t.p - p) <= 1e-12) best = &t;
            if (!best) throw std::invalid_argument("parameter not tabulated in table family");
            const auto it = std::upper_bound(best->cdf.begin(), best->cdf.end(), u);
            const auto idx = static_cast<std::size_t>(it - best->cdf.begin());
            return best->mass[std::min(idx, best->mass.size() - 1)];
        }
    }
    return 0.0;
}

double MeasureFamily::insertion_epsilon(double p) const {
    check_parameter(p);
    switch (kind_) {
        case FamilyKind::Poisson:
            return poisson_upper_tail(p * rho_max_, threshold_);
        case FamilyKind::ScaledBernoulli:
            return p;
        case FamilyKind::Table: {
            const QuantileTable* best = nullptr;
            for (const auto& t : tables_)
                if (std::abs(t.p - p) <= 1e-12) best = &t;
            if (!best) throw std::invalid_argument("parameter not tabulated in table family");
            // P(mass >= t) = 1 - cdf just below the first mass >= t.
            double below = 0.0;
            for (std::size_t i = 0; i < best->mass.size(); ++i) {
                if (best->mass[i] >= threshold_) break;
                below = best->cdf[i];
            }
            return 1.0 - below;
        }
    }
    return 0.0;
}

CoupledTriple sample_coupled(const LatticeGeometry& geom, const CouplingSampler& sampler) {
    if (!(sampler.p1 < sampler.p2 && sampler.p2 < sampler.p3))
        throw std::invalid_argument("coupling parameters must satisfy p1 < p2 < p3 strictly");
    const std::int64_t n = geom.site_count();
    CoupledTriple out{ParticleConfig(n), ParticleConfig(n), ParticleConfig(n)};
    for (std::int64_t i = 0; i < n; ++i) {
        const double u = site_uniform(sampler.seed, i);
        out.x.values[static_cast<std::size_t>(i)] = sampler.family.quantile(sampler.p1, u);
        out.y.values[static_cast<std::size_t>(i)] = sampler.family.quantile(sampler.p2, u);
        out.z.values[static_cast<std::size_t>(i)] = sampler.family.quantile(sampler.p3, u);
    }
    return out;
}

ParticleConfig sample_config(const LatticeGeometry& geom, const MeasureFamily& family, double p,
                             std::uint64_t seed) {
    const std::int64_t n = geom.site_count();
    ParticleConfig out(n);
    for (std::int64_t i = 0; i < n; ++i)
        out.values[static_cast<std::size_t>(i)] = family.quantile(p, site_uniform(seed, i));
    return out;
}

} // namespace perclab
