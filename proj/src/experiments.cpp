#include "perclab/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <stdexcept>

#include "perclab/parallel.hpp"
#include "perclab/rng.hpp"

namespace perclab {

namespace {

std::string format_value(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

struct TrialStats {
    std::uint8_t crossing = 0;
    double ratio = 0.0;
    std::int64_t macroscopic = 0;
    double density = 0.0;
    std::uint8_t stab_failed = 0;
    double center_odometer = 0.0;
    std::int64_t trifurcations = 0;
};

struct PointOptions {
    bool count_trifurcations = false;
    int block_radius = 1;
    int window_radius = 0;
};

// One trial of the plan's automaton at parameter p. uniform_seed fixes the
// per-site uniforms, automaton_seed the dynamics randomness.
TrialStats run_trial(const ExperimentPlan& plan, const LatticeGeometry& geom, double p,
                     std::uint64_t uniform_seed, std::uint64_t automaton_seed,
                     const PointOptions& opts) {
    const ParticleConfig xi = sample_config(geom, plan.family, p, uniform_seed);
    const StabilizationResult res = apply_automaton(plan.automaton, xi, geom, automaton_seed);
    if (!res.stabilized && geom.boundary() == Boundary::OpenBox) {
        char buf[160];
        std::snprintf(buf, sizeof buf,
                      "toppling cap exhausted on an open window (reproducer seed %llu)",
                      static_cast<unsigned long long>(uniform_seed));
        throw std::runtime_error(buf);
    }

    TrialStats stats;
    stats.stab_failed = res.stabilized ? 0 : 1;
    stats.center_odometer = static_cast<double>(
        res.odometer.topples.empty()
            ? 0
            : res.odometer.topples[static_cast<std::size_t>(geom.center())]);
    stats.density = static_cast<double>(res.omega.open_count()) /
                    static_cast<double>(geom.site_count());

    const ClusterLabels labels = label_clusters(res.omega, geom);
    const ClusterStats cs = cluster_stats(labels);
    stats.ratio = cs.ratio;
    stats.crossing = cs.crossing_axis.empty() ? 0 : cs.crossing_axis[0];
    const double cut = plan.delta * static_cast<double>(geom.site_count());
    for (const ClusterInfo& c : labels.clusters)
        if (static_cast<double>(c.size) >= cut) stats.macroscopic += 1;

    if (opts.count_trifurcations)
        stats.trifurcations =
            count_coarse_trifurcations(res.omega, geom, opts.block_radius, opts.window_radius,
                                       plan.surrogate, plan.delta);
    return stats;
}

SweepRow reduce_point(const ExperimentPlan& plan, const LatticeGeometry& geom, double p,
                      std::uint64_t point_seed, const std::vector<TrialStats>& stats) {
    SweepRow row;
    row.automaton = plan.automaton.name();
    row.family = plan.family.name();
    row.d = geom.dimension();
    row.L = geom.side();
    row.boundary = geom.boundary();
    row.p = p;
    row.trials = static_cast<int>(stats.size());
    row.seed = point_seed;
    std::int64_t crossings = 0;
    std::int64_t failures = 0;
    for (const TrialStats& s : stats) {
        crossings += s.crossing;
        failures += s.stab_failed;
        row.s2_over_s1_mean += s.ratio;
        row.macroscopic_count_mean += static_cast<double>(s.macroscopic);
        row.open_density_mean += s.density;
        row.mean_center_odometer += s.center_odometer;
        row.trifurcations_mean += static_cast<double>(s.trifurcations);
    }
    const double n = std::max<double>(1.0, static_cast<double>(stats.size()));
    row.s2_over_s1_mean /= n;
    row.macroscopic_count_mean /= n;
    row.open_density_mean /= n;
    row.mean_center_odometer /= n;
    row.trifurcations_mean /= n;
    const WilsonInterval wi = wilson_interval(crossings, static_cast<std::int64_t>(stats.size()));
    row.crossing_prob = wi.estimate;
    row.ci_lo = wi.lo;
    row.ci_hi = wi.hi;
    row.stab_fail_freq = static_cast<double>(failures) / n;
    row.trifurcations_per_boundary =
        row.trifurcations_mean / std::pow(static_cast<double>(geom.side()), geom.dimension() - 1);
    return row;
}

// Grid-point evaluation: trial seeds derive from the point seed, so adding
// grid points never perturbs existing ones.
SweepRow run_point(const ExperimentPlan& plan, const LatticeGeometry& geom, double p,
                   std::uint64_t point_seed, const PointOptions& opts = {}) {
    std::vector<TrialStats> stats(static_cast<std::size_t>(plan.trials));
    parallel_for(plan.trials, plan.workers, [&](std::int64_t t) {
        const std::uint64_t trial_seed = mix(point_seed, static_cast<std::uint64_t>(t));
        stats[static_cast<std::size_t>(t)] =
            run_trial(plan, geom, p, trial_seed, mix(trial_seed, 0xA), opts);
    });
    return reduce_point(plan, geom, p, point_seed, stats);
}

// Coupled evaluation: per-trial uniforms and automaton randomness depend only
// on (side seed, trial), not on p, so one trial's crossing indicator is a
// monotone step function of p.
SweepRow run_point_coupled(const ExperimentPlan& plan, const LatticeGeometry& geom, double p,
                           std::uint64_t side_seed, std::vector<std::uint8_t>* indicators) {
    std::vector<TrialStats> stats(static_cast<std::size_t>(plan.trials));
    parallel_for(plan.trials, plan.workers, [&](std::int64_t t) {
        const std::uint64_t trial_seed = mix(side_seed, static_cast<std::uint64_t>(t));
        stats[static_cast<std::size_t>(t)] =
            run_trial(plan, geom, p, trial_seed, mix(trial_seed, 0xA), {});
    });
    if (indicators) {
        indicators->resize(stats.size());
        for (std::size_t i = 0; i < stats.size(); ++i) (*indicators)[i] = stats[i].crossing;
    }
    return reduce_point(plan, geom, p, side_seed, stats);
}

int inscribed_radius(const LatticeGeometry& geom) {
    const Site c = geom.site_at(geom.center());
    int r = geom.side();
    for (int a = 0; a < geom.dimension(); ++a)
        r = std::min(r, std::min(c.coords[a], geom.side() - 1 - c.coords[a]));
    return r;
}

} // namespace

void write_sweep_csv(const SweepResult& result, std::ostream& os) {
    os << "automaton,family,d,L,boundary,p,trials,crossing_prob,ci_lo,ci_hi,"
          "s2_over_s1_mean,macroscopic_count_mean,trifurcations_mean,stab_fail_freq,seed\n";
    for (const SweepRow& r : result.rows) {
        os << r.automaton << ',' << r.family << ',' << r.d << ',' << r.L << ','
           << boundary_name(r.boundary) << ',' << format_value(r.p) << ',' << r.trials << ','
           << format_value(r.crossing_prob) << ',' << format_value(r.ci_lo) << ','
           << format_value(r.ci_hi) << ',' << format_value(r.s2_over_s1_mean) << ','
           << format_value(r.macroscopic_count_mean) << ',' << format_value(r.trifurcations_mean)
           << ',' << format_value(r.stab_fail_freq) << ',' << r.seed << '\n';
    }
}

WilsonInterval wilson_interval(std::int64_t successes, std::int64_t trials) {
    WilsonInterval wi;
    if (trials <= 0) return wi;
    const double z = 1.959963984540054; // 95%
    const double n = static_cast<double>(trials);
    const double phat = static_cast<double>(successes) / n;
    const double z2 = z * z;
    const double denom = 1.0 + z2 / n;
    const double center = (phat + z2 / (2.0 * n)) / denom;
    const double half = z * std::sqrt(phat * (1.0 - phat) / n + z2 / (4.0 * n * n)) / denom;
    wi.estimate = phat;
    wi.lo = successes == 0 ? 0.0 : std::max(0.0, center - half);
    wi.hi = successes == trials ? 1.0 : std::min(1.0, center + half);
    return wi;
}

PcToppleResult estimate_pc_topple(const ExperimentPlan& plan) {
    PcToppleResult out;
    const double resolution = 1.0 / 256.0;
    for (int side : plan.sides) {
        const LatticeGeometry geom(plan.dimension, side, plan.boundary);
        const std::uint64_t side_seed = mix(plan.master_seed, static_cast<std::uint64_t>(side));
        PcEstimate est;
        est.L = side;

        // Per-trial indicator traces across every evaluated p; monotone by
        // the shared-uniform coupling.
        std::vector<std::vector<std::pair<double, std::uint8_t>>> traces(
            static_cast<std::size_t>(plan.trials));
        const auto eval = [&](double p) {
            std::vector<std::uint8_t> ind;
            const SweepRow row = run_point_coupled(plan, geom, p, side_seed, &ind);
            out.sweep.rows.push_back(row);
            for (std::size_t t = 0; t < ind.size(); ++t)
                traces[t].emplace_back(p, ind[t]);
            return row;
        };

        double lo = plan.bracket_lo;
        double hi = plan.bracket_hi;
        bool bracketed = false;
        if (!plan.p_grid.empty()) {
            std::vector<double> grid = plan.p_grid;
            std::sort(grid.begin(), grid.end());
            double prev_p = grid.front();
            double prev_f = eval(prev_p).crossing_prob;
            bracketed = false;
            for (std::size_t i = 1; i < grid.size(); ++i) {
                const double f = eval(grid[i]).crossing_prob;
                if (!bracketed && prev_f < 0.5 && f >= 0.5) {
                    lo = prev_p;
                    hi = grid[i];
                    bracketed = true;
                }
                prev_p = grid[i];
                prev_f = f;
            }
        } else {
            const double flo = eval(lo).crossing_prob;
            const double fhi = eval(hi).crossing_prob;
            bracketed = flo < 0.5 && fhi >= 0.5;
        }

        est.bracket_ok = bracketed;
        if (bracketed) {
            while (hi - lo > resolution) {
                const double mid = 0.5 * (lo + hi);
                const SweepRow row = eval(mid);
                if (row.ci_lo < 0.5 && row.ci_hi > 0.5) {
                    // Cannot statistically resolve the side at this budget.
                    lo = hi = mid;
                    break;
                }
                if (row.crossing_prob < 0.5) lo = mid;
                else hi = mid;
            }
            est.pc_hat = 0.5 * (lo + hi);
        } else {
            est.pc_hat = std::numeric_limits<double>::quiet_NaN();
        }
        out.estimates.push_back(est);

        for (auto& trace : traces) {
            std::sort(trace.begin(), trace.end());
            for (std::size_t i = 1; i < trace.size(); ++i)
                if (trace[i - 1].second > trace[i].second) ++out.order_violations;
        }
    }
    return out;
}

PcStabResult estimate_pc_stab(const ExperimentPlan& plan) {
    if (!plan.automaton.toppling())
        throw std::invalid_argument("stabilization failure scan needs a toppling automaton");
    PcStabResult out;
    std::vector<double> grid = plan.p_grid;
    if (grid.empty()) throw std::invalid_argument("stabilization scan needs a parameter grid");
    std::sort(grid.begin(), grid.end());
    for (int side : plan.sides) {
        const LatticeGeometry geom(plan.dimension, side, plan.boundary);
        std::vector<double> freqs;
        for (std::size_t pi = 0; pi < grid.size(); ++pi) {
            const std::uint64_t point_seed =
                mix(plan.master_seed, static_cast<std::uint64_t>(side), pi);
            const SweepRow row = run_point(plan, geom, grid[pi], point_seed);
            freqs.push_back(row.stab_fail_freq);
            out.sweep.rows.push_back(row);
        }
        double hat = std::numeric_limits<double>::quiet_NaN();
        for (std::size_t i = 0; i < freqs.size(); ++i) {
            if (freqs[i] >= 0.5) {
                if (i == 0) {
                    hat = grid[0];
                } else {
                    const double f0 = freqs[i - 1];
                    const double f1 = freqs[i];
                    hat = grid[i - 1] + (0.5 - f0) / (f1 - f0) * (grid[i] - grid[i - 1]);
                }
                break;
            }
        }
        out.pc_stab_hat.push_back(hat);
    }
    return out;
}

SweepResult uniqueness_scan(const ExperimentPlan& plan, double p) {
    SweepResult out;
    for (int side : plan.sides) {
        const LatticeGeometry geom(plan.dimension, side, plan.boundary);
        const std::uint64_t point_seed = mix(plan.master_seed, static_cast<std::uint64_t>(side), 0);
        out.rows.push_back(run_point(plan, geom, p, point_seed));
    }
    return out;
}

SweepResult trifurcation_scan(const ExperimentPlan& plan, double p, int block_radius) {
    SweepResult out;
    for (int side : plan.sides) {
        const LatticeGeometry geom(plan.dimension, side, plan.boundary);
        PointOptions opts;
        opts.count_trifurcations = true;
        opts.block_radius = block_radius;
        opts.window_radius = inscribed_radius(geom);
        const std::uint64_t point_seed = mix(plan.master_seed, static_cast<std::uint64_t>(side), 0);
        out.rows.push_back(run_point(plan, geom, p, point_seed, opts));
    }
    return out;
}

std::int64_t AxiomReport::total_violations() const {
    std::int64_t n = 0;
    for (const auto& e : entries) n += e.violations;
    return n;
}

namespace {

struct AxiomCounters {
    std::int64_t d1 = 0, d2 = 0, d3 = 0, ad4 = 0, abelian = 0;
    std::uint64_t first_d1 = 0, first_d2 = 0, first_d3 = 0, first_ad4 = 0, first_abelian = 0;
    std::int64_t capped = 0; // trial hit the toppling cap and was skipped
    // ARW translation question: empirical open frequency at two fixed sites.
    std::int64_t arw_open_center = 0, arw_open_shift = 0, arw_trials = 0;

    void merge(const AxiomCounters& o) {
        const auto take = [](std::int64_t& n, std::uint64_t& seed, std::int64_t on,
                             std::uint64_t oseed) {
            if (n == 0 && on > 0) seed = oseed;
            n += on;
        };
        take(d1, first_d1, o.d1, o.first_d1);
        take(d2, first_d2, o.d2, o.first_d2);
        take(d3, first_d3, o.d3, o.first_d3);
        take(ad4, first_ad4, o.ad4, o.first_ad4);
        take(abelian, first_abelian, o.abelian, o.first_abelian);
        capped += o.capped;
        arw_open_center += o.arw_open_center;
        arw_open_shift += o.arw_open_shift;
        arw_trials += o.arw_trials;
    }
};

void require_stabilized(const StabilizationResult& res, const LatticeGeometry& geom,
                        std::uint64_t seed) {
    if (res.stabilized || geom.boundary() != Boundary::OpenBox) return;
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "toppling cap exhausted on an open window (reproducer seed %llu)",
                  static_cast<unsigned long long>(seed));
    throw std::runtime_error(buf);
}

// One seeded axiom trial. `fn` is the automaton under test; `spec` supplies
// thresholds and, for the built-in kinds, the order-independence checks.
AxiomCounters axiom_trial(const AutomatonFn& fn, const AutomatonSpec* spec,
                          const ExperimentPlan& plan, std::uint64_t base) {
    AxiomCounters c;
    const LatticeGeometry geom(plan.dimension, plan.sides.front(), plan.boundary);
    const double t = plan.automaton.threshold_for(geom);
    KeyedRng rng(mix(base, 7));

    CouplingSampler sampler{plan.family, plan.p1, plan.p2, plan.p3, mix(base, 1)};
    const CoupledTriple triple = sample_coupled(geom, sampler);
    const std::uint64_t aseed = mix(base, 2);
    const StabilizationResult rx = fn(triple.x, geom, aseed);
    const StabilizationResult ry = fn(triple.y, geom, aseed);
    const StabilizationResult rz = fn(triple.z, geom, aseed);
    for (const auto* r : {&rx, &ry, &rz}) require_stabilized(*r, geom, base);
    if (!rx.stabilized || !ry.stabilized || !rz.stabilized) {
        // Conservative window hit the cap: the truncated toppled set is
        // order-dependent, so fixed-point properties are not checkable.
        c.capped = 1;
        return c;
    }
    const SiteConfig& wx = rx.omega;
    const SiteConfig& wy = ry.omega;
    const SiteConfig& wz = rz.omega;

    for (std::size_t i = 0; i < wx.bits.size(); ++i) {
        if (wx.bits[i] > wy.bits[i] || wy.bits[i] > wz.bits[i]) {
            if (c.d2 == 0) c.first_d2 = base;
            ++c.d2;
        }
    }
    const auto check_d3 = [&](const ParticleConfig& xi, const SiteConfig& w) {
        for (std::size_t i = 0; i < w.bits.size(); ++i)
            if (xi.values[i] >= t && !w.bits[i]) {
                if (c.d3 == 0) c.first_d3 = base;
                ++c.d3;
            }
    };
    check_d3(triple.x, wx);
    check_d3(triple.y, wy);
    check_d3(triple.z, wz);

    // Avalanche connectivity: a perturbation may open only sites that end up
    // in the perturbed site's open cluster.
    {
        const std::int64_t x = static_cast<std::int64_t>(rng.below(
            static_cast<std::uint64_t>(geom.site_count())));
        // Integer-valued r keeps integer masses integral for the toppling kinds.
        const double r = rng.uniform() < 0.25 ? std::floor(t * rng.uniform())
                                              : t + std::floor(t * rng.uniform());
        const SiteConfig& before = ry.omega;
        const StabilizationResult rafter = fn(raise_site(triple.y, x, r), geom, aseed);
        require_stabilized(rafter, geom, base);
        const SiteConfig& after = rafter.omega;
        if (rafter.stabilized) {
            std::vector<std::int64_t> diff;
            for (std::size_t i = 0; i < after.bits.size(); ++i)
                if (after.bits[i] && !before.bits[i]) diff.push_back(static_cast<std::int64_t>(i));
            bool monotone = true;
            for (std::size_t i = 0; i < after.bits.size(); ++i)
                if (before.bits[i] && !after.bits[i]) monotone = false;
            if (!monotone) {
                if (c.d2 == 0) c.first_d2 = base;
                ++c.d2;
            }
            if (!diff.empty()) {
                bool ok = after.bits[static_cast<std::size_t>(x)] != 0;
                if (ok) {
                    const ClusterLabels labels = label_clusters(after, geom);
                    const std::int64_t own = labels.label[static_cast<std::size_t>(x)];
                    for (std::int64_t s : diff)
                        if (labels.label[static_cast<std::size_t>(s)] != own) ok = false;
                }
                if (!ok) {
                    if (c.ad4 == 0) c.first_ad4 = base;
                    ++c.ad4;
                }
            }
        }
    }

    // Translation invariance on a torus window of the same side.
    const LatticeGeometry torus(plan.dimension, std::max(3, plan.sides.front()), Boundary::Torus);
    if (!spec || spec->deterministic()) {
        const ParticleConfig xi = sample_config(torus, plan.family, plan.p2, mix(base, 3));
        Site z;
        z.coords.resize(static_cast<std::size_t>(plan.dimension));
        for (int a = 0; a < plan.dimension; ++a)
            z.coords[static_cast<std::size_t>(a)] =
                static_cast<int>(rng.below(static_cast<std::uint64_t>(torus.side())));
        const StabilizationResult ra = fn(translate_config(xi, z, torus), torus, aseed);
        const StabilizationResult rb = fn(xi, torus, aseed);
        if (ra.stabilized && rb.stabilized &&
            !(ra.omega == translate_bits(rb.omega, z, torus))) {
            if (c.d1 == 0) c.first_d1 = base;
            ++c.d1;
        }
    } else {
        // Random maps are translation-invariant in law only; tally open
        // frequencies at two fixed sites for an aggregate comparison.
        const ParticleConfig xi = sample_config(torus, plan.family, plan.p2, mix(base, 3));
        const StabilizationResult rw = fn(xi, torus, aseed);
        if (rw.stabilized) {
            c.arw_trials = 1;
            c.arw_open_center = rw.omega.bits[static_cast<std::size_t>(torus.center())];
            c.arw_open_shift = rw.omega.bits[0];
        }
    }

    // Order independence of the toppling dynamics.
    if (spec && spec->kind == AutomatonKind::Sandpile) {
        if (!abelian_check(triple.y, geom, static_cast<std::int64_t>(t), 3, mix(base, 4))) {
            if (c.abelian == 0) c.first_abelian = base;
            ++c.abelian;
        }
    } else if (spec && spec->kind == AutomatonKind::Arw) {
        const std::int64_t cap = spec->cap_for(geom);
        const StabilizationResult fifo =
            arw_stabilize(triple.y, geom, spec->lambda, aseed, cap);
        const StabilizationResult shuffled =
            arw_stabilize(triple.y, geom, spec->lambda, aseed, cap, TopplingOrder::Random,
                          mix(base, 5));
        if (fifo.odometer != shuffled.odometer || fifo.final_config != shuffled.final_config) {
            if (c.abelian == 0) c.first_abelian = base;
            ++c.abelian;
        }
    } else {
        // Deterministic single-pass maps: re-application must agree.
        const StabilizationResult again = fn(triple.y, geom, aseed);
        if (!(again.omega == wy)) {
            if (c.abelian == 0) c.first_abelian = base;
            ++c.abelian;
        }
    }
    return c;
}

AxiomReport run_axiom_sweep(const AutomatonFn& fn, const AutomatonSpec* spec,
                            const ExperimentPlan& plan, int trials) {
    std::vector<AxiomCounters> per_trial(static_cast<std::size_t>(trials));
    parallel_for(trials, plan.workers, [&](std::int64_t i) {
        const std::uint64_t base = mix(plan.master_seed, 0xAC5, static_cast<std::uint64_t>(i));
        per_trial[static_cast<std::size_t>(i)] = axiom_trial(fn, spec, plan, base);
    });
    AxiomCounters total;
    for (const auto& c : per_trial) total.merge(c);

    AxiomReport report;
    const auto push = [&](const char* name, std::int64_t checks, std::int64_t violations,
                          std::uint64_t seed) {
        report.entries.push_back({name, checks, violations, seed});
    };
    const std::int64_t n = trials - total.capped;
    push("D1", n, total.d1, total.first_d1);
    push("D2+R2", n, total.d2, total.first_d2);
    push("D3", n, total.d3, total.first_d3);
    push("AD4", n, total.ad4, total.first_ad4);
    push("Abelian", n, total.abelian, total.first_abelian);

    // Insertion positivity of the family at the working parameters.
    std::int64_t eps_violations = 0;
    if (!(plan.family.insertion_epsilon(plan.p2) > 0.0)) ++eps_violations;
    if (!(plan.family.insertion_epsilon(plan.p3) > 0.0)) ++eps_violations;
    push("R3-epsilon", 2, eps_violations, plan.master_seed);

    if (total.arw_trials > 0) {
        // Distributional translation check: two binomial frequencies from the
        // same law should agree within five standard errors.
        const double n1 = static_cast<double>(total.arw_trials);
        const double pa = static_cast<double>(total.arw_open_center) / n1;
        const double pb = static_cast<double>(total.arw_open_shift) / n1;
        const double pooled = 0.5 * (pa + pb);
        const double se = std::sqrt(std::max(1e-12, 2.0 * pooled * (1.0 - pooled) / n1));
        const bool bad = std::abs(pa - pb) > 5.0 * se;
        push("D1-distributional", total.arw_trials, bad ? 1 : 0, plan.master_seed);
    }
    return report;
}

} // namespace

AxiomReport verify_axioms(const ExperimentPlan& plan, int trials) {
    const AutomatonSpec spec = plan.automaton;
    const AutomatonFn fn = [&spec](const ParticleConfig& xi, const LatticeGeometry& geom,
                                   std::uint64_t seed) {
        return apply_automaton(spec, xi, geom, seed);
    };
    return run_axiom_sweep(fn, &spec, plan, trials);
}

AxiomReport verify_axioms_with(const AutomatonFn& fn, const ExperimentPlan& plan, int trials) {
    return run_axiom_sweep(fn, nullptr, plan, trials);
}

std::int64_t MergeReport::found_count() const {
    std::int64_t n = 0;
    for (const auto& t : trials) n += t.found_pair ? 1 : 0;
    return n;
}

bool MergeReport::all_found_merged() const {
    for (const auto& t : trials)
        if (t.found_pair && !t.merged) return false;
    return true;
}

MergeReport geodesic_merge_experiment(const ExperimentPlan& plan, int max_attempts, int min_found) {
    MergeReport report;
    const LatticeGeometry geom(plan.dimension, plan.sides.front(), plan.boundary);
    const double t = plan.automaton.threshold_for(geom);

    for (int attempt = 0; attempt < max_attempts; ++attempt) {
        if (min_found > 0 && report.found_count() >= min_found) break;
        MergeTrialReport trial;
        trial.seed = mix(plan.master_seed, 0x6E0, static_cast<std::uint64_t>(attempt));

        CouplingSampler sampler{plan.family, plan.p1, plan.p2, plan.p3, mix(trial.seed, 1)};
        const CoupledTriple triple = sample_coupled(geom, sampler);
        const std::uint64_t aseed = mix(trial.seed, 2);

        const StabilizationResult r1 = apply_automaton(plan.automaton, triple.x, geom, aseed);
        const StabilizationResult r3 = apply_automaton(plan.automaton, triple.z, geom, aseed);
        require_stabilized(r1, geom, trial.seed);
        require_stabilized(r3, geom, trial.seed);
        if (!r1.stabilized || !r3.stabilized) {
            // Capped conservative runs have order-dependent toppled sets; the
            // merge claim is only meaningful for the stabilized map.
            report.trials.push_back(trial);
            continue;
        }
        const SiteConfig w12 = interpolate_config(r1.omega, triple.y, t);
        const SiteConfig& w3 = r3.omega;

        const ClusterLabels l12 = label_clusters(w12, geom);
        const ClusterLabels l3 = label_clusters(w3, geom);
        if (l12.clusters.empty() || l3.clusters.empty()) {
            report.trials.push_back(trial);
            continue;
        }
        const ClusterInfo* giant = &l12.clusters.front();
        for (const ClusterInfo& c : l12.clusters)
            if (c.size > giant->size) giant = &c;
        const auto giant_sites = l12.sites_of(giant->label);

        // The interpolated configuration is dominated by the p3 one, so the
        // giant lies inside a single omega-p3 cluster.
        std::int64_t containing = -1;
        bool covered = true;
        for (std::int64_t s : giant_sites)
            if (!w3.bits[static_cast<std::size_t>(s)]) {
                covered = false;
                break;
            }
        if (covered) containing = l3.label[static_cast<std::size_t>(giant_sites.front())];

        const ClusterInfo* target = nullptr;
        for (const ClusterInfo& c : l3.clusters) {
            if (c.label == containing) continue;
            if (!surrogate_infinite(c, geom, plan.surrogate, plan.delta)) continue;
            if (!target || c.size > target->size) target = &c;
        }
        if (!target) {
            report.trials.push_back(trial);
            continue;
        }

        trial.found_pair = true;
        const auto target_sites = l3.sites_of(target->label);
        const DistanceReport dist = site_set_distance(geom, giant_sites, target_sites);
        trial.distance = dist.distance;

        const auto [px, py] = dist.attaining_pairs.front();
        ParticleConfig raised = triple.z;
        for (std::int64_t v : geodesic_indices(geom, px, py)) {
            if (v == px || v == py) continue;
            auto& mass = raised.values[static_cast<std::size_t>(v)];
            mass = std::max(mass, t);
        }
        const StabilizationResult r3_after = apply_automaton(plan.automaton, raised, geom, aseed);
        require_stabilized(r3_after, geom, trial.seed);
        const ClusterLabels l3_after = label_clusters(r3_after.omega, geom);
        const std::int64_t lx = l3_after.label[static_cast<std::size_t>(px)];
        const std::int64_t ly = l3_after.label[static_cast<std::size_t>(py)];
        trial.merged = lx >= 0 && lx == ly;
        report.trials.push_back(trial);
    }
    return report;
}

} // namespace perclab
