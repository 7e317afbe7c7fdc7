#include "perclab/automata.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "perclab/rng.hpp"

namespace perclab {

namespace {

std::vector<std::int64_t> integer_masses(const ParticleConfig& xi, const LatticeGeometry& geom) {
    if (xi.values.size() != static_cast<std::size_t>(geom.site_count()))
        throw std::invalid_argument("configuration size does not match the window");
    std::vector<std::int64_t> out(xi.values.size());
    for (std::size_t i = 0; i < xi.values.size(); ++i) {
        const double v = xi.values[i];
        if (!(v >= 0.0) || v != std::floor(v) || v > 0x1p53)
            throw std::invalid_argument("toppling dynamics require nonnegative integer masses");
        out[i] = static_cast<std::int64_t>(v);
    }
    return out;
}

// Pending-site pool supporting FIFO and uniform-random extraction without
// duplicate entries.
class SitePool {
public:
    SitePool(std::int64_t n, TopplingOrder order, std::uint64_t seed)
        : order_(order), rng_(seed), member_(static_cast<std::size_t>(n), 0) {}

    bool empty() const { return head_ >= items_.size(); }
    std::size_t size() const { return items_.size() - head_; }

    void push(std::int64_t s) {
        if (member_[static_cast<std::size_t>(s)]) return;
        member_[static_cast<std::size_t>(s)] = 1;
        items_.push_back(s);
    }

    std::int64_t pop() {
        std::size_t at = 0;
        if (order_ == TopplingOrder::Fifo) {
            at = head_;
            const std::int64_t s = items_[at];
            ++head_;
            if (head_ > 1024 && head_ * 2 > items_.size()) {
                items_.erase(items_.begin(), items_.begin() + static_cast<std::ptrdiff_t>(head_));
                head_ = 0;
            }
            member_[static_cast<std::size_t>(s)] = 0;
            return s;
        }
        at = head_ + static_cast<std::size_t>(rng_.below(items_.size() - head_));
        std::swap(items_[at], items_[head_]);
        const std::int64_t s = items_[head_];
        ++head_;
        if (head_ > 1024 && head_ * 2 > items_.size()) {
            items_.erase(items_.begin(), items_.begin() + static_cast<std::ptrdiff_t>(head_));
            head_ = 0;
        }
        member_[static_cast<std::size_t>(s)] = 0;
        return s;
    }

private:
    TopplingOrder order_;
    KeyedRng rng_;
    std::vector<std::uint8_t> member_;
    std::vector<std::int64_t> items_;
    std::size_t head_ = 0;
};

} // namespace

const char* AutomatonSpec::name() const noexcept {
    switch (kind) {
        case AutomatonKind::Identity: return "identity";
        case AutomatonKind::Sandpile: return "sandpile";
        case AutomatonKind::Bootstrap: return "bootstrap";
        case AutomatonKind::Arw: return "arw";
    }
    return "?";
}

double AutomatonSpec::threshold_for(const LatticeGeometry& geom) const {
    if (threshold > 0.0) return threshold;
    switch (kind) {
        case AutomatonKind::Sandpile: return static_cast<double>(geom.degree());
        case AutomatonKind::Arw: return 2.0;
        default: return 1.0;
    }
}

std::int64_t AutomatonSpec::cap_for(const LatticeGeometry& geom) const {
    const std::int64_t n = geom.site_count();
    if (cap_factor <= 0 || cap_factor > std::numeric_limits<std::int64_t>::max() / n)
        throw std::invalid_argument("bad toppling cap factor");
    return cap_factor * n;
}

StabilizationResult sandpile_stabilize(const ParticleConfig& xi, const LatticeGeometry& geom,
                                       std::int64_t t, std::int64_t cap, TopplingOrder order,
                                       std::uint64_t order_seed) {
    if (cap <= 0) throw std::invalid_argument("toppling cap must be positive");
    if (t < geom.degree())
        throw std::invalid_argument("sandpile threshold below the degree would drive mass negative");
    const std::int64_t n = geom.site_count();
    std::vector<std::int64_t> height = integer_masses(xi, geom);

    StabilizationResult res;
    res.odometer = Odometer(n);
    std::int64_t dissipated = 0;

    SitePool pool(n, order, order_seed);
    for (std::int64_t i = 0; i < n; ++i)
        if (height[static_cast<std::size_t>(i)] >= t) pool.push(i);

    while (!pool.empty() && res.odometer.total < cap) {
        const std::int64_t x = pool.pop();
        // Queued sites stay unstable: mass only drops when the site itself
        // topples, which happens only here. One particle goes to each of the
        // 2d neighbors, so the site loses exactly its degree.
        height[static_cast<std::size_t>(x)] -= geom.degree();
        res.odometer.topples[static_cast<std::size_t>(x)] += 1;
        res.odometer.total += 1;
        dissipated += geom.sink_count(x);
        for (std::int64_t nb : geom.neighbors(x)) {
            height[static_cast<std::size_t>(nb)] += 1;
            if (height[static_cast<std::size_t>(nb)] >= t) pool.push(nb);
        }
        if (height[static_cast<std::size_t>(x)] >= t) pool.push(x);
    }

    res.stabilized = pool.empty();
    res.omega = SiteConfig(n);
    res.final_config = ParticleConfig(n);
    for (std::int64_t i = 0; i < n; ++i) {
        res.omega.bits[static_cast<std::size_t>(i)] =
            res.odometer.topples[static_cast<std::size_t>(i)] >= 1 ? 1 : 0;
        res.final_config.values[static_cast<std::size_t>(i)] =
            static_cast<double>(height[static_cast<std::size_t>(i)]);
    }
    res.dissipated = static_cast<double>(dissipated);
    return res;
}

bool abelian_check(const ParticleConfig& xi, const LatticeGeometry& geom, std::int64_t t,
                   int trials, std::uint64_t seed) {
    const std::int64_t cap = 10000 * geom.site_count();
    const StabilizationResult ref = sandpile_stabilize(xi, geom, t, cap);
    for (int k = 0; k < trials; ++k) {
        const StabilizationResult run =
            sandpile_stabilize(xi, geom, t, cap, TopplingOrder::Random, mix(seed, k));
        if (run.odometer != ref.odometer || run.final_config != ref.final_config ||
            run.stabilized != ref.stabilized)
            return false;
    }
    return true;
}

SiteConfig bootstrap_apply(const ParticleConfig& xi, const LatticeGeometry& geom, int theta,
                           double occupy_threshold) {
    if (theta < 1 || theta > geom.degree())
        throw std::invalid_argument("bootstrap threshold theta must lie in [1, 2d]");
    if (xi.values.size() != static_cast<std::size_t>(geom.site_count()))
        throw std::invalid_argument("configuration size does not match the window");
    const std::int64_t n = geom.site_count();
    SiteConfig occ(n);
    std::vector<std::int16_t> occupied_neighbors(static_cast<std::size_t>(n), 0);
    std::vector<std::int64_t> queue;
    for (std::int64_t i = 0; i < n; ++i) {
        if (xi.values[static_cast<std::size_t>(i)] >= occupy_threshold) {
            occ.bits[static_cast<std::size_t>(i)] = 1;
            queue.push_back(i);
        }
    }
    // Least fixed point: occupied sites never revert, each vacancy flips at
    // most once when its occupied-neighbor count reaches theta.
    for (std::size_t head = 0; head < queue.size(); ++head) {
        const std::int64_t x = queue[head];
        for (std::int64_t nb : geom.neighbors(x)) {
            if (occ.bits[static_cast<std::size_t>(nb)]) continue;
            if (++occupied_neighbors[static_cast<std::size_t>(nb)] == theta) {
                occ.bits[static_cast<std::size_t>(nb)] = 1;
                queue.push_back(nb);
            }
        }
    }
    return occ;
}

StabilizationResult arw_stabilize(const ParticleConfig& xi, const LatticeGeometry& geom,
                                  double lambda, std::uint64_t stack_seed, std::int64_t cap,
                                  TopplingOrder order, std::uint64_t order_seed) {
    if (cap <= 0) throw std::invalid_argument("toppling cap must be positive");
    if (!(lambda >= 0.0)) throw std::invalid_argument("sleep rate must be >= 0");
    const std::int64_t n = geom.site_count();
    std::vector<std::int64_t> count = integer_masses(xi, geom);
    const double sleep_prob = std::isinf(lambda) ? 1.0 : lambda / (1.0 + lambda);
    const int deg = geom.degree();

    std::vector<std::int64_t> stack_pos(static_cast<std::size_t>(n), 0);
    std::vector<std::uint8_t> asleep(static_cast<std::size_t>(n), 0);

    StabilizationResult res;
    res.odometer = Odometer(n);
    std::int64_t dissipated = 0;
    std::int64_t instructions = 0;

    const auto active = [&](std::int64_t s) {
        return count[static_cast<std::size_t>(s)] >= 2 ||
               (count[static_cast<std::size_t>(s)] == 1 && !asleep[static_cast<std::size_t>(s)]);
    };

    SitePool pool(n, order, order_seed);
    for (std::int64_t i = 0; i < n; ++i)
        if (active(i)) pool.push(i);

    while (!pool.empty() && instructions < cap) {
        const std::int64_t x = pool.pop();
        // Sites only deactivate when processed, so pool entries are active.
        const std::uint64_t h = mix(stack_seed, static_cast<std::uint64_t>(x),
                                    static_cast<std::uint64_t>(stack_pos[static_cast<std::size_t>(x)]));
        stack_pos[static_cast<std::size_t>(x)] += 1;
        ++instructions;
        const double u = uniform01(h);
        if (u < sleep_prob) {
            // Sleep acts only on a lone particle; otherwise the instruction
            // is consumed with no effect.
            if (count[static_cast<std::size_t>(x)] == 1) {
                asleep[static_cast<std::size_t>(x)] = 1;
                continue;
            }
        } else {
            const double v = sleep_prob >= 1.0 ? 0.0 : (u - sleep_prob) / (1.0 - sleep_prob);
            const int dir = std::min(deg - 1, static_cast<int>(v * deg));
            res.odometer.topples[static_cast<std::size_t>(x)] += 1;
            res.odometer.total += 1;
            count[static_cast<std::size_t>(x)] -= 1;
            const std::int64_t target = geom.neighbor_toward(x, dir);
            if (target < 0) {
                dissipated += 1;
            } else {
                count[static_cast<std::size_t>(target)] += 1;
                asleep[static_cast<std::size_t>(target)] = 0; // arrivals wake sleepers
                if (active(target)) pool.push(target);
            }
        }
        if (active(x)) pool.push(x);
    }

    res.stabilized = pool.empty();
    res.omega = SiteConfig(n);
    res.final_config = ParticleConfig(n);
    for (std::int64_t i = 0; i < n; ++i) {
        res.omega.bits[static_cast<std::size_t>(i)] =
            res.odometer.topples[static_cast<std::size_t>(i)] >= 1 ? 1 : 0;
        res.final_config.values[static_cast<std::size_t>(i)] =
            static_cast<double>(count[static_cast<std::size_t>(i)]);
    }
    res.dissipated = static_cast<double>(dissipated);
    return res;
}

SiteConfig interpolate_config(const SiteConfig& omega_p1, const ParticleConfig& y, double t) {
    if (omega_p1.bits.size() != y.values.size())
        throw std::invalid_argument("interpolation shapes do not match");
    SiteConfig out(static_cast<std::int64_t>(omega_p1.bits.size()));
    for (std::size_t i = 0; i < out.bits.size(); ++i)
        out.bits[i] = (omega_p1.bits[i] || y.values[i] >= t) ? 1 : 0;
    return out;
}

StabilizationResult apply_automaton(const AutomatonSpec& spec, const ParticleConfig& xi,
                                    const LatticeGeometry& geom, std::uint64_t seed) {
    const double t = spec.threshold_for(geom);
    switch (spec.kind) {
        case AutomatonKind::Sandpile:
            return sandpile_stabilize(xi, geom, static_cast<std::int64_t>(t), spec.cap_for(geom));
        case AutomatonKind::Arw:
            return arw_stabilize(xi, geom, spec.lambda, seed, spec.cap_for(geom));
        case AutomatonKind::Bootstrap: {
            StabilizationResult res;
            res.omega = bootstrap_apply(xi, geom, spec.theta, t);
            res.odometer = Odometer(geom.site_count());
            res.final_config = xi;
            return res;
        }
        case AutomatonKind::Identity: {
            StabilizationResult res;
            res.omega = SiteConfig(geom.site_count());
            for (std::size_t i = 0; i < xi.values.size(); ++i)
                res.omega.bits[i] = xi.values[i] >= t ? 1 : 0;
            res.odometer = Odometer(geom.site_count());
            res.final_config = xi;
            return res;
        }
    }
    throw std::logic_error("unknown automaton kind");
}

ParticleConfig raise_site(const ParticleConfig& xi, std::int64_t site, double r) {
    ParticleConfig out = xi;
    auto& v = out.values.at(static_cast<std::size_t>(site));
    v = std::max(v, r);
    return out;
}

IncreaseDiff increase_and_diff(const AutomatonSpec& spec, const ParticleConfig& xi,
                               std::int64_t site, double r, const LatticeGeometry& geom,
                               std::uint64_t shared_seed) {
    IncreaseDiff out;
    out.before = apply_automaton(spec, xi, geom, shared_seed).omega;
    out.after = apply_automaton(spec, raise_site(xi, site, r), geom, shared_seed).omega;
    for (std::size_t i = 0; i < out.after.bits.size(); ++i)
        if (out.after.bits[i] && !out.before.bits[i]) out.diff.push_back(static_cast<std::int64_t>(i));
    return out;
}

} // namespace perclab
