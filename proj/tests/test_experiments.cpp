#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <sstream>

#include "perclab/experiments.hpp"
#include "perclab/rng.hpp"

using namespace perclab;

namespace {

ExperimentPlan identity_plan() {
    ExperimentPlan plan;
    plan.automaton.kind = AutomatonKind::Identity;
    plan.automaton.threshold = 1.0;
    plan.family = MeasureFamily::scaled_bernoulli(1.0);
    plan.dimension = 2;
    plan.boundary = Boundary::OpenBox;
    return plan;
}

} // namespace

TEST_CASE("Wilson intervals") {
    const WilsonInterval all = wilson_interval(10, 10);
    CHECK(all.estimate == 1.0);
    CHECK(all.hi == 1.0);
    CHECK(all.lo > 0.6);

    const WilsonInterval none = wilson_interval(0, 10);
    CHECK(none.estimate == 0.0);
    CHECK(none.lo == 0.0);
    CHECK(none.hi < 0.4);

    // Known value: 8/10 successes -> [0.490, 0.943] at 95%.
    const WilsonInterval w = wilson_interval(8, 10);
    CHECK(w.lo == doctest::Approx(0.4902).epsilon(1e-3));
    CHECK(w.hi == doctest::Approx(0.9433).epsilon(1e-3));
    CHECK(w.lo <= w.estimate);
    CHECK(w.estimate <= w.hi);
}

TEST_CASE("threshold estimate lands near the known window") {
    ExperimentPlan plan = identity_plan();
    plan.sides = {64};
    plan.trials = 400;
    plan.bracket_lo = 0.40;
    plan.bracket_hi = 0.80;
    plan.master_seed = 99;
    const PcToppleResult res = estimate_pc_topple(plan);
    REQUIRE(res.estimates.size() == 1);
    CHECK(res.estimates[0].bracket_ok);
    CHECK(res.estimates[0].pc_hat > 0.55);
    CHECK(res.estimates[0].pc_hat < 0.65);
    CHECK(res.order_violations == 0);

    // Same threshold point regardless of the mass scale t.
    ExperimentPlan scaled = plan;
    scaled.automaton.threshold = 7.0;
    scaled.family = MeasureFamily::scaled_bernoulli(7.0);
    const PcToppleResult res2 = estimate_pc_topple(scaled);
    CHECK(res2.estimates[0].pc_hat == res.estimates[0].pc_hat);
}

TEST_CASE("subcritical grid reports a bracket failure") {
    ExperimentPlan plan = identity_plan();
    plan.sides = {16};
    plan.trials = 200;
    plan.p_grid = {0.05, 0.1, 0.15, 0.2};
    plan.master_seed = 7;
    const PcToppleResult res = estimate_pc_topple(plan);
    REQUIRE(res.estimates.size() == 1);
    CHECK(!res.estimates[0].bracket_ok);
    CHECK(std::isnan(res.estimates[0].pc_hat));
    for (const SweepRow& row : res.sweep.rows) CHECK(row.crossing_prob < 0.1);
}

TEST_CASE("single-trial smoke run") {
    ExperimentPlan plan = identity_plan();
    plan.sides = {8};
    plan.trials = 1;
    plan.bracket_lo = 0.1;
    plan.bracket_hi = 0.9;
    const PcToppleResult res = estimate_pc_topple(plan);
    REQUIRE(!res.sweep.rows.empty());
    for (const SweepRow& row : res.sweep.rows) {
        CHECK(row.trials == 1);
        CHECK(row.ci_lo <= row.crossing_prob);
        CHECK(row.crossing_prob <= row.ci_hi);
    }
}

TEST_CASE("sandpile dominates the bare threshold map") {
    ExperimentPlan ident = identity_plan();
    ident.family = MeasureFamily::scaled_bernoulli(4.0);
    ident.automaton.threshold = 4.0;
    ident.sides = {16};
    ident.trials = 150;
    ident.bracket_lo = 0.30;
    ident.bracket_hi = 0.95;
    ident.master_seed = 1234;

    ExperimentPlan sand = ident;
    sand.automaton.kind = AutomatonKind::Sandpile;

    const PcToppleResult ri = estimate_pc_topple(ident);
    const PcToppleResult rs = estimate_pc_topple(sand);
    REQUIRE(ri.estimates[0].bracket_ok);
    REQUIRE(rs.estimates[0].bracket_ok);
    // Toppled sets contain the threshold sets, so crossing happens no later.
    CHECK(rs.estimates[0].pc_hat <= ri.estimates[0].pc_hat);
}

TEST_CASE("stabilization failure frequencies across the density range") {
    ExperimentPlan plan;
    plan.automaton.kind = AutomatonKind::Sandpile;
    plan.family = MeasureFamily::poisson(8.0, 4.0);
    plan.dimension = 2;
    plan.boundary = Boundary::Torus;
    plan.sides = {16};
    plan.trials = 50;
    plan.p_grid = {0.0, 0.1125, 0.75};
    plan.master_seed = 5;
    // Means per site: 0 (empty), 0.9 (stabilizes), 6 (pigeonhole failure).
    const PcStabResult res = estimate_pc_stab(plan);
    REQUIRE(res.sweep.rows.size() == 3);
    CHECK(res.sweep.rows[0].stab_fail_freq == 0.0);
    CHECK(res.sweep.rows[1].stab_fail_freq == 0.0);
    CHECK(res.sweep.rows[2].stab_fail_freq == 1.0);
    REQUIRE(res.pc_stab_hat.size() == 1);
    CHECK(res.pc_stab_hat[0] > 0.1125);
    CHECK(res.pc_stab_hat[0] <= 0.75);

    ExperimentPlan bad = plan;
    bad.automaton.kind = AutomatonKind::Identity;
    CHECK_THROWS_AS(estimate_pc_stab(bad), std::invalid_argument);
    bad = plan;
    bad.p_grid.clear();
    CHECK_THROWS_AS(estimate_pc_stab(bad), std::invalid_argument);
}

TEST_CASE("uniqueness diagnostics shrink with the window") {
    ExperimentPlan plan = identity_plan();
    plan.sides = {32, 64};
    plan.trials = 30;
    plan.master_seed = 42;
    const SweepResult res = uniqueness_scan(plan, 0.7);
    REQUIRE(res.rows.size() == 2);
    CHECK(res.rows[0].s2_over_s1_mean > res.rows[1].s2_over_s1_mean);
    CHECK(res.rows[1].macroscopic_count_mean >= 0.9);
    CHECK(res.rows[1].macroscopic_count_mean <= 1.3);

    // Saturated window: one cluster, ratio zero.
    const SweepResult full = uniqueness_scan(plan, 1.0);
    CHECK(full.rows[0].s2_over_s1_mean == 0.0);
    CHECK(full.rows[0].macroscopic_count_mean == 1.0);

    // Subcritical: nothing macroscopic at delta = 0.01 on a large window.
    ExperimentPlan sub = identity_plan();
    sub.sides = {128};
    sub.trials = 10;
    const SweepResult low = uniqueness_scan(sub, 0.3);
    CHECK(low.rows[0].macroscopic_count_mean == 0.0);
}

TEST_CASE("axiom sweep is clean for the shipped dynamics") {
    ExperimentPlan plan;
    plan.family = MeasureFamily::poisson(8.0, 4.0);
    plan.dimension = 2;
    plan.sides = {16};
    plan.boundary = Boundary::OpenBox;
    plan.p1 = 0.25;
    plan.p2 = 0.3;
    plan.p3 = 0.35;

    SUBCASE("sandpile") {
        plan.automaton.kind = AutomatonKind::Sandpile;
        const AxiomReport rep = verify_axioms(plan, 100);
        CHECK(rep.total_violations() == 0);
    }
    SUBCASE("bootstrap") {
        plan.automaton.kind = AutomatonKind::Bootstrap;
        plan.automaton.theta = 2;
        plan.family = MeasureFamily::poisson(2.0, 1.0);
        plan.automaton.threshold = 1.0;
        const AxiomReport rep = verify_axioms(plan, 100);
        CHECK(rep.total_violations() == 0);
    }
    SUBCASE("walkers") {
        plan.automaton.kind = AutomatonKind::Arw;
        plan.automaton.lambda = 1.0;
        plan.automaton.threshold = 2.0;
        plan.family = MeasureFamily::poisson(2.0, 2.0);
        const AxiomReport rep = verify_axioms(plan, 60);
        CHECK(rep.total_violations() == 0);
        bool has_distributional = false;
        for (const auto& e : rep.entries)
            if (e.axiom == "D1-distributional") has_distributional = true;
        CHECK(has_distributional);
    }
}

TEST_CASE("capped conservative trials are skipped, not misreported") {
    // Supercritical density on a torus never stabilizes; the sweep must not
    // turn truncated runs into fake violations.
    ExperimentPlan plan;
    plan.automaton.kind = AutomatonKind::Sandpile;
    plan.automaton.cap_factor = 50;
    plan.family = MeasureFamily::poisson(16.0, 4.0);
    plan.dimension = 2;
    plan.sides = {8};
    plan.boundary = Boundary::Torus;
    plan.p1 = 0.35;
    plan.p2 = 0.40;
    plan.p3 = 0.45; // mean 7.2 particles per site at p3
    const AxiomReport rep = verify_axioms(plan, 10);
    CHECK(rep.total_violations() == 0);
    for (const auto& e : rep.entries)
        if (e.axiom == "D2+R2") CHECK(e.checks == 0); // every trial capped
}

TEST_CASE("an anti-monotone map is caught with a reproducer seed") {
    ExperimentPlan plan;
    plan.automaton.kind = AutomatonKind::Identity;
    plan.automaton.threshold = 1.0;
    plan.family = MeasureFamily::scaled_bernoulli(1.0);
    plan.dimension = 2;
    plan.sides = {8};
    plan.p1 = 0.3;
    plan.p2 = 0.5;
    plan.p3 = 0.7;
    const AutomatonFn anti = [](const ParticleConfig& xi, const LatticeGeometry& geom,
                                std::uint64_t) {
        StabilizationResult res;
        res.omega = SiteConfig(geom.site_count());
        for (std::size_t i = 0; i < res.omega.bits.size(); ++i)
            res.omega.bits[i] = xi.values[i] >= 1.0 ? 0 : 1;
        res.odometer = Odometer(geom.site_count());
        res.final_config = xi;
        return res;
    };
    const AxiomReport rep = verify_axioms_with(anti, plan, 20);
    std::int64_t d2 = 0;
    std::uint64_t seed = 0;
    for (const auto& e : rep.entries)
        if (e.axiom == "D2+R2") {
            d2 = e.violations;
            seed = e.reproducer_seed;
        }
    CHECK(d2 > 0);
    CHECK(seed != 0);
}

TEST_CASE("trifurcation scan on saturated and subcritical windows") {
    ExperimentPlan plan = identity_plan();
    plan.sides = {32};
    plan.trials = 10;
    const SweepResult full = trifurcation_scan(plan, 1.0, 1);
    CHECK(full.rows[0].trifurcations_mean == 0.0);
    const SweepResult sub = trifurcation_scan(plan, 0.2, 1);
    CHECK(sub.rows[0].trifurcations_mean == 0.0);
}

TEST_CASE("geodesic merge: staged coupled trials always reconnect") {
    ExperimentPlan plan = identity_plan();
    plan.sides = {48};
    plan.surrogate = InfiniteSurrogate::MacroscopicDelta;
    plan.delta = 0.01;
    plan.p1 = 0.58;
    plan.p2 = 0.60;
    plan.p3 = 0.62;
    plan.master_seed = 2718;
    const MergeReport rep = geodesic_merge_experiment(plan, 120, 30);
    CHECK(rep.found_count() >= 30);
    CHECK(rep.all_found_merged());
    for (const auto& t : rep.trials)
        if (t.found_pair) CHECK(t.distance >= 2);
}

TEST_CASE("geodesic merge mechanics: two rows at distance two need one insertion") {
    const LatticeGeometry g(2, 7, Boundary::OpenBox);
    AutomatonSpec identity;
    identity.kind = AutomatonKind::Identity;
    identity.threshold = 1.0;

    ParticleConfig xi(g.site_count());
    for (int j = 0; j < 7; ++j) {
        xi.values[static_cast<std::size_t>(g.index_of(Site{0, j}))] = 1.0;
        xi.values[static_cast<std::size_t>(g.index_of(Site{2, j}))] = 1.0;
    }
    const SiteConfig before = apply_automaton(identity, xi, g, 0).omega;
    const ClusterLabels labels = label_clusters(before, g);
    REQUIRE(labels.cluster_count() == 2);

    const auto a = labels.sites_of(labels.clusters[0].label);
    const auto b = labels.sites_of(labels.clusters[1].label);
    const DistanceReport rep = site_set_distance(g, a, b);
    CHECK(rep.distance == 2);

    const auto [x, y] = rep.attaining_pairs.front();
    ParticleConfig raised = xi;
    const auto path = geodesic_indices(g, x, y);
    REQUIRE(path.size() == 3); // one interior site
    raised.values[static_cast<std::size_t>(path[1])] = 1.0;

    const SiteConfig after = apply_automaton(identity, raised, g, 0).omega;
    const ClusterLabels merged = label_clusters(after, g);
    CHECK(merged.label[static_cast<std::size_t>(x)] == merged.label[static_cast<std::size_t>(y)]);
    CHECK(merged.cluster_count() == 1);
}

TEST_CASE("geodesic merge: subcritical p3 never finds a distinct target") {
    ExperimentPlan plan = identity_plan();
    plan.sides = {48};
    plan.surrogate = InfiniteSurrogate::MacroscopicDelta;
    plan.delta = 0.01;
    plan.p1 = 0.20;
    plan.p2 = 0.25;
    plan.p3 = 0.30;
    const MergeReport rep = geodesic_merge_experiment(plan, 30, 0);
    CHECK(rep.found_count() == 0);
}

TEST_CASE("sweep output is stable and parallelism-independent") {
    ExperimentPlan plan = identity_plan();
    plan.sides = {24, 32};
    plan.trials = 20;
    plan.master_seed = 31415;

    plan.workers = 1;
    const SweepResult serial = uniqueness_scan(plan, 0.65);
    plan.workers = 4;
    const SweepResult parallel = uniqueness_scan(plan, 0.65);

    std::ostringstream a, b;
    write_sweep_csv(serial, a);
    write_sweep_csv(parallel, b);
    CHECK(a.str() == b.str());

    // Re-running with the same seed is byte-identical.
    const SweepResult again = uniqueness_scan(plan, 0.65);
    std::ostringstream c;
    write_sweep_csv(again, c);
    CHECK(b.str() == c.str());

    // Rows echo per-point seeds derived from (master, L).
    for (const SweepRow& row : serial.rows)
        CHECK(row.seed == mix(plan.master_seed, static_cast<std::uint64_t>(row.L), 0));

    const std::string csv = a.str();
    CHECK(csv.find("automaton,family,d,L,boundary,p,trials,crossing_prob,ci_lo,ci_hi,"
                   "s2_over_s1_mean,macroscopic_count_mean,trifurcations_mean,stab_fail_freq,"
                   "seed\n") == 0);
}
