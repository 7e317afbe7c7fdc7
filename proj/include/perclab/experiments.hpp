#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "perclab/automata.hpp"
#include "perclab/clusters.hpp"
#include "perclab/measures.hpp"

// Monte Carlo orchestration. Every run is a pure function of the plan and the
// master seed: per-point seeds are derived as mix(master, L, p-index) for grid
// sweeps, and mix(master, L) for bisections and axiom sweeps, whose trials
// share per-site uniforms across parameter values so that coupled
// monotonicity holds pathwise.

namespace perclab {

constexpr std::uint64_t kDefaultSeed = 0x5EED;

struct ExperimentPlan {
    AutomatonSpec automaton;
    MeasureFamily family = MeasureFamily::scaled_bernoulli(1.0);
    int dimension = 2;
    std::vector<int> sides{32};
    Boundary boundary = Boundary::OpenBox;
    std::vector<double> p_grid;
    double bracket_lo = 0.0;
    double bracket_hi = 1.0;
    int trials = 50;
    std::uint64_t master_seed = kDefaultSeed;
    InfiniteSurrogate surrogate = InfiniteSurrogate::BoundaryContact;
    double delta = 0.01;
    int block_radius = 1;
    double p = 0.7;                      // single-parameter experiments
    double p1 = 0.58, p2 = 0.60, p3 = 0.62; // coupled experiments
    int workers = 0;
};

struct SweepRow {
    std::string automaton;
    std::string family;
    int d = 0;
    int L = 0;
    Boundary boundary = Boundary::OpenBox;
    double p = 0.0;
    int trials = 0;
    double crossing_prob = 0.0;
    double ci_lo = 0.0;
    double ci_hi = 0.0;
    double s2_over_s1_mean = 0.0;
    double macroscopic_count_mean = 0.0;
    double trifurcations_mean = 0.0;
    double stab_fail_freq = 0.0;
    std::uint64_t seed = 0;
    // Summary-only diagnostics, not part of the CSV schema.
    double open_density_mean = 0.0;
    double mean_center_odometer = 0.0;
    double trifurcations_per_boundary = 0.0; // T / L^(d-1)
};

struct SweepResult {
    std::vector<SweepRow> rows;
};

/// CSV with the fixed column set; one row per (L, p).
void write_sweep_csv(const SweepResult& result, std::ostream& os);

struct WilsonInterval {
    double estimate = 0.0;
    double lo = 0.0;
    double hi = 1.0;
};
WilsonInterval wilson_interval(std::int64_t successes, std::int64_t trials);

struct PcEstimate {
    int L = 0;
    bool bracket_ok = false;
    double pc_hat = 0.0; // meaningful only when bracket_ok
};

struct PcToppleResult {
    std::vector<PcEstimate> estimates;
    SweepResult sweep;
    std::int64_t order_violations = 0; // per-trial crossing indicators that failed to be monotone in p
};

/// Bisection on p to the crossing-probability-1/2 point, to p-resolution
/// 1/256, per window side. Trials share uniforms across p, so each trial's
/// crossing indicator is a monotone step in p.
PcToppleResult estimate_pc_topple(const ExperimentPlan& plan);

struct PcStabResult {
    SweepResult sweep;
    std::vector<double> pc_stab_hat; // per side; NaN when the grid never crosses 1/2
};

/// Cap-exhaustion frequency over the p grid (conservative windows), plus the
/// mean odometer at the center site as a divergence diagnostic.
PcStabResult estimate_pc_stab(const ExperimentPlan& plan);

/// Second-largest/largest ratio and macroscopic-cluster counts per side at a
/// fixed supercritical p.
SweepResult uniqueness_scan(const ExperimentPlan& plan, double p);

struct AxiomCheckEntry {
    std::string axiom;
    std::int64_t checks = 0;
    std::int64_t violations = 0;
    std::uint64_t reproducer_seed = 0; // seed of the first violating trial
};

struct AxiomReport {
    std::vector<AxiomCheckEntry> entries;
    std::int64_t total_violations() const;
};

/// Per-axiom violation counts over seeded trials: monotonicity of the coupled
/// triple under the automaton, occupation threshold, translation invariance,
/// avalanche connectivity, insertion positivity, toppling-order independence.
/// Conservative-window trials that hit the toppling cap are not checkable
/// (the truncated toppled set is order-dependent) and reduce the per-axiom
/// check counts instead.
AxiomReport verify_axioms(const ExperimentPlan& plan, int trials);

/// Same sweep against a caller-supplied map (used for broken-automaton
/// controls in tests).
using AutomatonFn = std::function<StabilizationResult(const ParticleConfig&,
                                                      const LatticeGeometry&, std::uint64_t)>;
AxiomReport verify_axioms_with(const AutomatonFn& fn, const ExperimentPlan& plan, int trials);

/// Coarse-trifurcation counts per side at fixed p; the analysis radius is the
/// largest graph ball inside the window.
SweepResult trifurcation_scan(const ExperimentPlan& plan, double p, int block_radius);

struct MergeTrialReport {
    std::uint64_t seed = 0;
    bool found_pair = false;
    std::int64_t distance = -1;
    bool merged = false;
};

struct MergeReport {
    std::vector<MergeTrialReport> trials;
    std::int64_t found_count() const;
    bool all_found_merged() const;
};

/// Coupled sample, interpolated configuration, largest-cluster distance, and
/// geodesic insertion: raises the p3 configuration to t along the geodesic
/// interior between an attaining pair and re-applies the automaton, then
/// checks the two clusters merged. Runs up to max_attempts trials, stopping
/// early once min_found trials with a distinct target cluster are collected
/// (min_found == 0 runs every attempt).
MergeReport geodesic_merge_experiment(const ExperimentPlan& plan, int max_attempts, int min_found);

} // namespace perclab
