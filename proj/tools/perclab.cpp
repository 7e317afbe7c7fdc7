// Command-line front end: experiment dispatch from a flat key=value config,
// CSV and binary outputs, deterministic seeding.
//
// Exit status: 0 success, 1 configuration or usage error, 2 internal
// invariant violation (a reproducer seed is printed).

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "perclab/experiments.hpp"
#include "perclab/rng.hpp"
#include "perclab/serialize.hpp"

using namespace perclab;

namespace {

class Settings {
public:
    void set(const std::string& key, const std::string& value) { values_[key] = value; }

    bool load_file(const std::string& path, std::string& error) {
        std::ifstream is(path);
        if (!is) {
            error = "cannot open config file: " + path;
            return false;
        }
        std::string line;
        int lineno = 0;
        while (std::getline(is, line)) {
            ++lineno;
            const auto hash = line.find('#');
            if (hash != std::string::npos) line.erase(hash);
            const auto trim = [](std::string s) {
                const auto a = s.find_first_not_of(" \t\r");
                const auto b = s.find_last_not_of(" \t\r");
                return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
            };
            const std::string t = trim(line);
            if (t.empty()) continue;
            const auto eq = t.find('=');
            if (eq == std::string::npos) {
                error = path + ":" + std::to_string(lineno) + ": expected key=value";
                return false;
            }
            values_[trim(t.substr(0, eq))] = trim(t.substr(eq + 1));
        }
        return true;
    }

    std::string get(const std::string& key, const std::string& fallback) const {
        const auto it = values_.find(key);
        return it == values_.end() ? fallback : it->second;
    }

    double get_double(const std::string& key, double fallback) const {
        const auto it = values_.find(key);
        if (it == values_.end()) return fallback;
        try {
            std::size_t pos = 0;
            const double v = std::stod(it->second, &pos);
            if (pos != it->second.size()) throw std::invalid_argument(key);
            return v;
        } catch (...) {
            throw std::invalid_argument("config key '" + key + "' is not a number: " + it->second);
        }
    }

    std::int64_t get_int(const std::string& key, std::int64_t fallback) const {
        const auto it = values_.find(key);
        if (it == values_.end()) return fallback;
        try {
            std::size_t pos = 0;
            const std::int64_t v = std::stoll(it->second, &pos);
            if (pos != it->second.size()) throw std::invalid_argument(key);
            return v;
        } catch (...) {
            throw std::invalid_argument("config key '" + key + "' is not an integer: " + it->second);
        }
    }

    std::vector<double> get_doubles(const std::string& key, std::vector<double> fallback) const {
        const auto it = values_.find(key);
        if (it == values_.end()) return fallback;
        std::vector<double> out;
        std::stringstream ss(it->second);
        std::string item;
        while (std::getline(ss, item, ',')) {
            try {
                out.push_back(std::stod(item));
            } catch (...) {
                throw std::invalid_argument("config key '" + key + "' has a bad entry: " + item);
            }
        }
        return out;
    }

    std::vector<int> get_ints(const std::string& key, std::vector<int> fallback) const {
        const auto ds = get_doubles(key, {});
        if (ds.empty()) return fallback;
        std::vector<int> out;
        for (double d : ds) out.push_back(static_cast<int>(d));
        return out;
    }

private:
    std::map<std::string, std::string> values_;
};

ExperimentPlan build_plan(const Settings& s) {
    ExperimentPlan plan;

    const std::string akind = s.get("automaton.kind", "sandpile");
    if (akind == "identity") plan.automaton.kind = AutomatonKind::Identity;
    else if (akind == "sandpile") plan.automaton.kind = AutomatonKind::Sandpile;
    else if (akind == "bootstrap") plan.automaton.kind = AutomatonKind::Bootstrap;
    else if (akind == "arw") plan.automaton.kind = AutomatonKind::Arw;
    else throw std::invalid_argument("unknown automaton.kind: " + akind);
    plan.automaton.threshold = s.get_double("automaton.t", 0.0);
    plan.automaton.theta = static_cast<int>(s.get_int("automaton.theta", 2));
    plan.automaton.lambda = s.get_double("automaton.lambda", 1.0);
    plan.automaton.cap_factor = s.get_int("automaton.cap_factor", 10000);

    plan.dimension = static_cast<int>(s.get_int("geometry.d", 2));
    plan.sides = s.get_ints("geometry.L", {16});
    const std::string b = s.get("geometry.boundary", "open");
    if (b == "open") plan.boundary = Boundary::OpenBox;
    else if (b == "torus") plan.boundary = Boundary::Torus;
    else throw std::invalid_argument("unknown geometry.boundary: " + b);

    const LatticeGeometry probe(plan.dimension, plan.sides.empty() ? 3 : plan.sides.front(),
                                Boundary::OpenBox);
    const double family_t = s.get_double("family.t", plan.automaton.threshold_for(probe));
    const std::string fkind = s.get("family.kind", "poisson");
    if (fkind == "poisson") {
        plan.family = MeasureFamily::poisson(s.get_double("family.rho_max", 2.0 * family_t), family_t);
    } else if (fkind == "scaled_bernoulli") {
        plan.family = MeasureFamily::scaled_bernoulli(family_t);
    } else if (fkind == "table") {
        // family.table.ps = p values; per p: family.table.<index>.cdf / .mass
        const std::vector<double> ps = s.get_doubles("family.table.ps", {});
        if (ps.empty()) throw std::invalid_argument("table family needs family.table.ps");
        std::vector<QuantileTable> tables;
        for (std::size_t i = 0; i < ps.size(); ++i) {
            QuantileTable t;
            t.p = ps[i];
            t.cdf = s.get_doubles("family.table." + std::to_string(i) + ".cdf", {});
            t.mass = s.get_doubles("family.table." + std::to_string(i) + ".mass", {});
            tables.push_back(std::move(t));
        }
        plan.family = MeasureFamily::table(std::move(tables), family_t);
    } else {
        throw std::invalid_argument("unknown family.kind: " + fkind);
    }

    plan.trials = static_cast<int>(s.get_int("experiment.trials", 50));
    if (plan.trials < 1) throw std::invalid_argument("experiment.trials must be >= 1");
    plan.p_grid = s.get_doubles("experiment.p_grid", {});
    plan.bracket_lo = s.get_double("experiment.bracket_lo", 0.0);
    plan.bracket_hi = s.get_double("experiment.bracket_hi", 1.0);
    plan.p = s.get_double("experiment.p", 0.7);
    plan.p1 = s.get_double("experiment.p1", 0.58);
    plan.p2 = s.get_double("experiment.p2", 0.60);
    plan.p3 = s.get_double("experiment.p3", 0.62);
    plan.delta = s.get_double("experiment.delta", 0.01);
    plan.block_radius = static_cast<int>(s.get_int("experiment.n", 1));
    const std::string surrogate = s.get("experiment.surrogate", "boundary");
    if (surrogate == "boundary") plan.surrogate = InfiniteSurrogate::BoundaryContact;
    else if (surrogate == "macroscopic") plan.surrogate = InfiniteSurrogate::MacroscopicDelta;
    else throw std::invalid_argument("unknown experiment.surrogate: " + surrogate);

    plan.master_seed = static_cast<std::uint64_t>(s.get_int("seed", static_cast<std::int64_t>(kDefaultSeed)));
    plan.workers = static_cast<int>(s.get_int("workers", 0));
    return plan;
}

std::filesystem::path ensure_outdir(const Settings& s) {
    const std::filesystem::path dir = s.get("out", "out");
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec || !std::filesystem::is_directory(dir))
        throw std::invalid_argument("cannot create output directory: " + dir.string());
    return dir;
}

void write_csv_file(const SweepResult& result, const std::filesystem::path& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::invalid_argument("cannot write " + path.string());
    write_sweep_csv(result, os);
}

ParticleConfig initial_config(const Settings& s, const LatticeGeometry& geom,
                              const ExperimentPlan& plan) {
    const std::string kind = s.get("init.kind", "sample");
    if (kind == "zeros") return ParticleConfig(geom.site_count());
    if (kind == "delta-center") {
        ParticleConfig xi(geom.site_count());
        xi.values[static_cast<std::size_t>(geom.center())] = s.get_double("init.mass", 4.0);
        return xi;
    }
    if (kind == "sample")
        return sample_config(geom, plan.family, s.get_double("init.p", plan.p),
                             mix(plan.master_seed, 0x51));
    if (kind == "file") {
        const std::string path = s.get("init.path", "");
        if (path.empty()) throw std::invalid_argument("init.kind=file needs init.path");
        auto loaded = load_particle_config(path);
        if (loaded.geometry.dimension() != geom.dimension() ||
            loaded.geometry.side() != geom.side() ||
            loaded.geometry.boundary() != geom.boundary())
            throw std::invalid_argument("config file window does not match geometry.* keys");
        return loaded.config;
    }
    throw std::invalid_argument("unknown init.kind: " + kind);
}

int cmd_stabilize(const Settings& s, const ExperimentPlan& plan) {
    const LatticeGeometry geom(plan.dimension, plan.sides.front(), plan.boundary);
    const ParticleConfig xi = initial_config(s, geom, plan);
    const StabilizationResult res =
        apply_automaton(plan.automaton, xi, geom, mix(plan.master_seed, 0xA));
    const ClusterLabels labels = label_clusters(res.omega, geom);
    const ClusterStats st = cluster_stats(labels);

    const auto dir = ensure_outdir(s);
    save_particle_config((dir / "final_config.bin").string(), res.final_config, geom);
    save_site_config((dir / "omega.bin").string(), res.omega, geom);
    {
        std::ofstream os(dir / "labels.csv", std::ios::binary);
        write_labels_csv(labels, os);
    }

    std::cout << "automaton " << plan.automaton.name() << "\n"
              << "stabilized " << (res.stabilized ? 1 : 0) << "\n"
              << "odometer_total " << res.odometer.total << "\n"
              << "open_sites " << res.omega.open_count() << "\n"
              << "dissipated " << res.dissipated << "\n"
              << "clusters " << st.count << "\n"
              << "largest " << st.largest << "\n";
    if (!res.stabilized && geom.boundary() == Boundary::OpenBox) {
        std::cout << "error cap exhausted on an open window (reproducer seed "
                  << plan.master_seed << ")\n";
        return 2;
    }
    return 0;
}

int cmd_sample(const Settings& s, const ExperimentPlan& plan) {
    const LatticeGeometry geom(plan.dimension, plan.sides.front(), plan.boundary);
    const CouplingSampler sampler{plan.family, plan.p1, plan.p2, plan.p3,
                                  mix(plan.master_seed, 0x5A)};
    const CoupledTriple t = sample_coupled(geom, sampler);
    const auto dir = ensure_outdir(s);
    save_particle_config((dir / "x.bin").string(), t.x, geom);
    save_particle_config((dir / "y.bin").string(), t.y, geom);
    save_particle_config((dir / "z.bin").string(), t.z, geom);
    std::int64_t ordered = 0;
    for (std::size_t i = 0; i < t.x.values.size(); ++i)
        if (t.x.values[i] <= t.y.values[i] && t.y.values[i] <= t.z.values[i]) ++ordered;
    const double n = static_cast<double>(geom.site_count());
    std::cout << "sites " << geom.site_count() << "\n"
              << "mean_x " << t.x.total() / n << "\n"
              << "mean_y " << t.y.total() / n << "\n"
              << "mean_z " << t.z.total() / n << "\n"
              << "ordered_sites " << ordered << "\n"
              << "epsilon_p2 " << plan.family.insertion_epsilon(plan.p2) << "\n"
              << "epsilon_p3 " << plan.family.insertion_epsilon(plan.p3) << "\n";
    if (plan.family.insertion_epsilon(plan.p2) == 0.0 ||
        plan.family.insertion_epsilon(plan.p3) == 0.0)
        std::cout << "warning insertion probability is zero at a working parameter\n";
    return ordered == geom.site_count() ? 0 : 2;
}

int cmd_verify(const Settings& s, const ExperimentPlan& plan) {
    const AxiomReport rep = verify_axioms(plan, plan.trials);
    (void)s;
    for (const auto& e : rep.entries) {
        std::cout << "axiom " << e.axiom << " checks " << e.checks << " violations "
                  << e.violations;
        if (e.violations > 0) std::cout << " reproducer_seed " << e.reproducer_seed;
        std::cout << "\n";
    }
    std::cout << "total_violations " << rep.total_violations() << "\n";
    return rep.total_violations() == 0 ? 0 : 2;
}

int cmd_pc(const Settings& s, const ExperimentPlan& plan) {
    const PcToppleResult res = estimate_pc_topple(plan);
    write_csv_file(res.sweep, ensure_outdir(s) / "pc_sweep.csv");
    for (const PcEstimate& e : res.estimates) {
        std::cout << "L " << e.L << " bracket_ok " << (e.bracket_ok ? 1 : 0);
        if (e.bracket_ok) std::cout << " pc_hat " << e.pc_hat;
        std::cout << "\n";
    }
    std::cout << "order_violations " << res.order_violations << "\n";
    return res.order_violations == 0 ? 0 : 2;
}

int cmd_stab(const Settings& s, const ExperimentPlan& plan) {
    ExperimentPlan p = plan;
    if (p.p_grid.empty()) p.p_grid = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
    const PcStabResult res = estimate_pc_stab(p);
    write_csv_file(res.sweep, ensure_outdir(s) / "stab_sweep.csv");
    for (std::size_t i = 0; i < p.sides.size(); ++i) {
        std::cout << "L " << p.sides[i] << " pc_stab_hat ";
        if (std::isnan(res.pc_stab_hat[i])) std::cout << "none";
        else std::cout << res.pc_stab_hat[i];
        std::cout << "\n";
    }
    for (const SweepRow& row : res.sweep.rows)
        std::cout << "L " << row.L << " p " << row.p << " fail_freq " << row.stab_fail_freq
                  << " center_odometer_mean " << row.mean_center_odometer << "\n";
    return 0;
}

int cmd_uniqueness(const Settings& s, const ExperimentPlan& plan) {
    const SweepResult res = uniqueness_scan(plan, plan.p);
    write_csv_file(res, ensure_outdir(s) / "uniqueness.csv");
    for (const SweepRow& row : res.rows)
        std::cout << "L " << row.L << " s2_over_s1_mean " << row.s2_over_s1_mean
                  << " macroscopic_mean " << row.macroscopic_count_mean << " open_density "
                  << row.open_density_mean << "\n";
    return 0;
}

int cmd_trifurcations(const Settings& s, const ExperimentPlan& plan) {
    const SweepResult res = trifurcation_scan(plan, plan.p, plan.block_radius);
    write_csv_file(res, ensure_outdir(s) / "trifurcations.csv");
    for (const SweepRow& row : res.rows)
        std::cout << "L " << row.L << " mean_T " << row.trifurcations_mean << " T_per_boundary "
                  << row.trifurcations_per_boundary << "\n";
    return 0;
}

int cmd_merge_demo(const Settings& s, const ExperimentPlan& plan) {
    const int attempts = static_cast<int>(s.get_int("experiment.attempts", 200));
    const MergeReport rep = geodesic_merge_experiment(plan, attempts, plan.trials);
    const auto dir = ensure_outdir(s);
    std::ofstream os(dir / "merge.csv", std::ios::binary);
    os << "trial,seed,found_pair,distance,merged\n";
    for (std::size_t i = 0; i < rep.trials.size(); ++i) {
        const auto& t = rep.trials[i];
        os << i << ',' << t.seed << ',' << (t.found_pair ? 1 : 0) << ',' << t.distance << ','
           << (t.merged ? 1 : 0) << '\n';
    }
    std::cout << "attempts " << rep.trials.size() << "\n"
              << "found_pairs " << rep.found_count() << "\n"
              << "all_found_merged " << (rep.all_found_merged() ? 1 : 0) << "\n";
    if (!rep.all_found_merged()) {
        for (const auto& t : rep.trials)
            if (t.found_pair && !t.merged) {
                std::cout << "error merge failed (reproducer seed " << t.seed << ")\n";
                break;
            }
        return 2;
    }
    return 0;
}

int cmd_mtp(const Settings& s, const ExperimentPlan& plan) {
    (void)s;
    if (plan.boundary != Boundary::Torus)
        throw std::invalid_argument("the mass-transport check needs geometry.boundary=torus");
    const LatticeGeometry geom(plan.dimension, plan.sides.front(), plan.boundary);
    const double t = plan.automaton.threshold_for(geom);
    double worst = 0.0;
    for (int rep = 0; rep < plan.trials; ++rep) {
        const CouplingSampler sampler{plan.family, plan.p1, plan.p2, plan.p3,
                                      mix(plan.master_seed, 0x317, rep)};
        const CoupledTriple triple = sample_coupled(geom, sampler);
        const std::uint64_t aseed = mix(plan.master_seed, 0x318, rep);
        const SiteConfig w1 = apply_automaton(plan.automaton, triple.x, geom, aseed).omega;
        const SiteConfig w12 = interpolate_config(w1, triple.y, t);
        const SiteConfig w3 = apply_automaton(plan.automaton, triple.z, geom, aseed).omega;
        const MtpReport unit = mtp_check(geom, MtpKernel::UnitOpenNeighbor, w12, w3);
        const MtpReport step2 = mtp_check(geom, MtpKernel::Step2Distance, w12, w3);
        worst = std::max({worst, unit.max_discrepancy, step2.max_discrepancy});
    }
    std::cout << "trials " << plan.trials << "\n"
              << "max_discrepancy " << worst << "\n"
              << "pass " << (worst <= 1e-12 ? 1 : 0) << "\n";
    return worst <= 1e-12 ? 0 : 2;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"dependent site-percolation laboratory"};
    app.require_subcommand(1);

    std::string config_path;
    std::optional<std::int64_t> seed;
    std::optional<std::string> outdir;
    std::optional<int> workers;
    std::vector<std::string> overrides;
    app.add_option("--config", config_path, "key=value config file");
    app.add_option("--seed", seed, "master seed (default 0x5EED)");
    app.add_option("--out", outdir, "output directory (default ./out)");
    app.add_option("--workers", workers, "worker threads, 0 = hardware");
    app.add_option("--set", overrides, "override a config key, key=value")->allow_extra_args(false);

    const std::vector<std::pair<std::string, std::string>> commands{
        {"stabilize", "run the automaton once and report the result"},
        {"sample", "draw a coupled triple and write it out"},
        {"verify", "run the axiom sweep"},
        {"pc", "bisect the crossing threshold"},
        {"stab", "scan stabilization failures over p"},
        {"uniqueness", "cluster-uniqueness diagnostics over window sizes"},
        {"trifurcations", "coarse-trifurcation density scan"},
        {"merge-demo", "distance attainment and geodesic merge demonstration"},
        {"mtp", "mass-transport identity check on the torus"}};
    for (const auto& [name, help] : commands) app.add_subcommand(name, help)->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    try {
        Settings settings;
        if (!config_path.empty()) {
            std::string error;
            if (!settings.load_file(config_path, error)) {
                std::cerr << "error: " << error << "\n";
                return 1;
            }
        }
        for (const std::string& kv : overrides) {
            const auto eq = kv.find('=');
            if (eq == std::string::npos) {
                std::cerr << "error: --set expects key=value, got: " << kv << "\n";
                return 1;
            }
            settings.set(kv.substr(0, eq), kv.substr(eq + 1));
        }
        if (seed) settings.set("seed", std::to_string(*seed));
        if (outdir) settings.set("out", *outdir);
        if (workers) settings.set("workers", std::to_string(*workers));

        const ExperimentPlan plan = build_plan(settings);
        const std::string sub = app.get_subcommands().front()->get_name();
        if (sub == "stabilize") return cmd_stabilize(settings, plan);
        if (sub == "sample") return cmd_sample(settings, plan);
        if (sub == "verify") return cmd_verify(settings, plan);
        if (sub == "pc") return cmd_pc(settings, plan);
        if (sub == "stab") return cmd_stab(settings, plan);
        if (sub == "uniqueness") return cmd_uniqueness(settings, plan);
        if (sub == "trifurcations") return cmd_trifurcations(settings, plan);
        if (sub == "merge-demo") return cmd_merge_demo(settings, plan);
        if (sub == "mtp") return cmd_mtp(settings, plan);
        std::cerr << "error: unknown subcommand\n";
        return 1;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 2;
    }
}
