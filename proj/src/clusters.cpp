#include "perclab/clusters.hpp"

#include <algorithm>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <unordered_map>

namespace perclab {

namespace {

class UnionFind {
public:
    explicit UnionFind(std::int64_t n) : parent_(static_cast<std::size_t>(n)) {
        for (std::int64_t i = 0; i < n; ++i) parent_[static_cast<std::size_t>(i)] = i;
    }

    std::int64_t find(std::int64_t x) {
        while (parent_[static_cast<std::size_t>(x)] != x) {
            parent_[static_cast<std::size_t>(x)] = parent_[static_cast<std::size_t>(parent_[static_cast<std::size_t>(x)])];
            x = parent_[static_cast<std::size_t>(x)];
        }
        return x;
    }

    void unite(std::int64_t a, std::int64_t b) {
        a = find(a);
        b = find(b);
        if (a == b) return;
        if (a < b) parent_[static_cast<std::size_t>(b)] = a; // keep smallest index as root
        else parent_[static_cast<std::size_t>(a)] = b;
    }

private:
    std::vector<std::int64_t> parent_;
};

void check_sized(const SiteConfig& omega, const LatticeGeometry& geom) {
    if (omega.bits.size() != static_cast<std::size_t>(geom.site_count()))
        throw std::invalid_argument("configuration size does not match the window");
}

} // namespace

const ClusterInfo* ClusterLabels::find(std::int64_t lbl) const {
    const auto it = std::lower_bound(clusters.begin(), clusters.end(), lbl,
                                     [](const ClusterInfo& c, std::int64_t v) { return c.label < v; });
    if (it == clusters.end() || it->label != lbl) return nullptr;
    return &*it;
}

std::vector<std::int64_t> ClusterLabels::sites_of(std::int64_t lbl) const {
    std::vector<std::int64_t> out;
    for (std::size_t i = 0; i < label.size(); ++i)
        if (label[i] == lbl) out.push_back(static_cast<std::int64_t>(i));
    return out;
}

ClusterLabels label_clusters(const SiteConfig& omega, const LatticeGeometry& geom) {
    check_sized(omega, geom);
    const std::int64_t n = geom.site_count();
    UnionFind uf(n);
    for (std::int64_t i = 0; i < n; ++i) {
        if (!omega.bits[static_cast<std::size_t>(i)]) continue;
        for (std::int64_t nb : geom.neighbors(i))
            if (nb > i && omega.bits[static_cast<std::size_t>(nb)]) uf.unite(i, nb);
    }

    ClusterLabels out;
    out.label.assign(static_cast<std::size_t>(n), -1);
    out.dimension = geom.dimension();
    std::unordered_map<std::int64_t, std::size_t> slot; // root -> cluster position
    const int d = geom.dimension();
    const int L = geom.side();
    const bool torus = geom.boundary() == Boundary::Torus;
    for (std::int64_t i = 0; i < n; ++i) {
        if (!omega.bits[static_cast<std::size_t>(i)]) continue;
        const std::int64_t root = uf.find(i); // smallest index in the component
        out.label[static_cast<std::size_t>(i)] = root;
        auto [it, fresh] = slot.try_emplace(root, out.clusters.size());
        if (fresh) {
            ClusterInfo info;
            info.label = root;
            info.crossing.assign(static_cast<std::size_t>(2 * d), 0); // lo/hi face marks per axis
            out.clusters.push_back(std::move(info));
        }
        ClusterInfo& c = out.clusters[it->second];
        c.size += 1;
        const Site s = geom.site_at(i);
        for (int a = 0; a < d; ++a) {
            const int v = s.coords[a];
            if (torus) {
                if (v == 0) c.crossing[static_cast<std::size_t>(2 * a)] = 1;
                if (v == L / 2) c.crossing[static_cast<std::size_t>(2 * a + 1)] = 1;
            } else {
                if (v == 0) {
                    c.crossing[static_cast<std::size_t>(2 * a)] = 1;
                    c.touches_boundary = true;
                }
                if (v == L - 1) {
                    c.crossing[static_cast<std::size_t>(2 * a + 1)] = 1;
                    c.touches_boundary = true;
                }
            }
        }
    }
    // Collapse the per-face marks into one crossing flag per axis.
    for (ClusterInfo& c : out.clusters) {
        std::vector<std::uint8_t> per_axis(static_cast<std::size_t>(d), 0);
        for (int a = 0; a < d; ++a)
            per_axis[static_cast<std::size_t>(a)] =
                c.crossing[static_cast<std::size_t>(2 * a)] && c.crossing[static_cast<std::size_t>(2 * a + 1)];
        c.crossing = std::move(per_axis);
    }
    std::sort(out.clusters.begin(), out.clusters.end(),
              [](const ClusterInfo& a, const ClusterInfo& b) { return a.label < b.label; });
    return out;
}

ClusterStats cluster_stats(const ClusterLabels& labels) {
    ClusterStats st;
    st.count = labels.cluster_count();
    st.crossing_axis.assign(static_cast<std::size_t>(std::max(labels.dimension, 1)), 0);
    for (const ClusterInfo& c : labels.clusters) {
        if (c.size >= st.largest) {
            st.second = st.largest;
            st.largest = c.size;
        } else if (c.size > st.second) {
            st.second = c.size;
        }
        for (std::size_t a = 0; a < c.crossing.size(); ++a)
            if (c.crossing[a]) st.crossing_axis[a] = 1;
    }
    st.ratio = (st.count >= 2 && st.largest > 0)
                   ? static_cast<double>(st.second) / static_cast<double>(st.largest)
                   : 0.0;
    return st;
}

bool surrogate_infinite(const ClusterInfo& c, const LatticeGeometry& geom,
                        InfiniteSurrogate surrogate, double delta) {
    if (surrogate == InfiniteSurrogate::BoundaryContact) {
        if (geom.boundary() == Boundary::OpenBox) return c.touches_boundary;
        // No faces on the torus; fall back to the size proxy.
        return static_cast<double>(c.size) >= delta * static_cast<double>(geom.site_count());
    }
    return static_cast<double>(c.size) >= delta * static_cast<double>(geom.site_count());
}

DistanceReport site_set_distance(const LatticeGeometry& geom, std::span<const std::int64_t> a,
                                 std::span<const std::int64_t> b) {
    if (a.empty() || b.empty()) throw std::invalid_argument("distance requires nonempty site sets");
    const std::int64_t n = geom.site_count();
    std::vector<std::int64_t> dist(static_cast<std::size_t>(n), -1);
    std::vector<std::uint8_t> in_b(static_cast<std::size_t>(n), 0);
    for (std::int64_t s : b) in_b[static_cast<std::size_t>(s)] = 1;

    std::vector<std::int64_t> frontier(a.begin(), a.end());
    for (std::int64_t s : a) dist[static_cast<std::size_t>(s)] = 0;

    DistanceReport report;
    std::int64_t depth = 0;
    std::vector<std::int64_t> b_hits;
    for (std::int64_t s : a)
        if (in_b[static_cast<std::size_t>(s)]) b_hits.push_back(s);
    // Level-by-level BFS through the full window; stop at the first level
    // containing b-sites, after finishing that whole level.
    while (b_hits.empty() && !frontier.empty()) {
        std::vector<std::int64_t> next;
        ++depth;
        for (std::int64_t s : frontier) {
            for (std::int64_t nb : geom.neighbors(s)) {
                if (dist[static_cast<std::size_t>(nb)] >= 0) continue;
                dist[static_cast<std::size_t>(nb)] = depth;
                next.push_back(nb);
                if (in_b[static_cast<std::size_t>(nb)]) b_hits.push_back(nb);
            }
        }
        frontier = std::move(next);
    }
    if (b_hits.empty()) throw std::logic_error("site sets are not co-reachable");
    report.distance = depth;

    // Enumerate every attaining pair via the closed-form window distance.
    std::sort(b_hits.begin(), b_hits.end());
    for (std::int64_t y : b_hits)
        for (std::int64_t x : a)
            if (geom.distance(x, y) == depth) report.attaining_pairs.emplace_back(x, y);
    std::sort(report.attaining_pairs.begin(), report.attaining_pairs.end());
    return report;
}

DistanceReport cluster_distance(const ClusterLabels& labels, std::int64_t label_a,
                                std::int64_t label_b, const LatticeGeometry& geom) {
    if (label_a == label_b) throw std::invalid_argument("cluster distance needs two distinct labels");
    if (!labels.find(label_a) || !labels.find(label_b))
        throw std::invalid_argument("no such cluster label");
    const auto a = labels.sites_of(label_a);
    const auto b = labels.sites_of(label_b);
    return site_set_distance(geom, a, b);
}

std::int64_t count_coarse_trifurcations(const SiteConfig& omega, const LatticeGeometry& geom,
                                        int block_radius, int window_radius,
                                        InfiniteSurrogate surrogate, double delta) {
    check_sized(omega, geom);
    if (block_radius < 1) throw std::invalid_argument("block radius must be >= 1");
    if (window_radius < 2 * block_radius) return 0;
    const std::int64_t n = geom.site_count();
    const int d = geom.dimension();
    const int spacing = 4 * block_radius;
    const std::int64_t o = geom.center();
    const Site oc = geom.site_at(o);

    const ClusterLabels labels = label_clusters(omega, geom);

    // Candidate centers on the 4n-grid with B_{2n}(y) inside B_R(o).
    std::vector<std::int64_t> candidates;
    const int kmax = window_radius / spacing;
    std::vector<int> k(static_cast<std::size_t>(d), -kmax);
    for (;;) {
        Site y = oc;
        bool in_window = true;
        for (int a = 0; a < d; ++a) {
            int v = oc.coords[a] + spacing * k[static_cast<std::size_t>(a)];
            if (geom.boundary() == Boundary::Torus) {
                v %= geom.side();
                if (v < 0) v += geom.side();
            } else if (v < 0 || v >= geom.side()) {
                in_window = false;
                break;
            }
            y.coords[a] = v;
        }
        if (in_window) {
            const std::int64_t yi = geom.index_of(y);
            if (geom.distance(o, yi) + 2 * block_radius <= window_radius) candidates.push_back(yi);
        }
        int a = d - 1;
        for (; a >= 0; --a) {
            if (++k[static_cast<std::size_t>(a)] <= kmax) break;
            k[static_cast<std::size_t>(a)] = -kmax;
        }
        if (a < 0) break;
    }
    std::sort(candidates.begin(), candidates.end());
    candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());

    std::vector<std::uint8_t> in_ball(static_cast<std::size_t>(n), 0);
    std::int64_t count = 0;
    for (std::int64_t y : candidates) {
        const auto ball = ball_indices(geom, y, block_radius);
        bool ball_open = true;
        for (std::int64_t s : ball)
            if (!omega.bits[static_cast<std::size_t>(s)]) {
                ball_open = false;
                break;
            }
        if (!ball_open) continue;
        const ClusterInfo* own = labels.find(labels.label[static_cast<std::size_t>(y)]);
        if (!own || !surrogate_infinite(*own, geom, surrogate, delta)) continue;

        for (std::int64_t s : ball) in_ball[static_cast<std::size_t>(s)] = 1;

        // Relabel with the ball deleted and collect component facts.
        UnionFind uf(n);
        for (std::int64_t i = 0; i < n; ++i) {
            if (!omega.bits[static_cast<std::size_t>(i)] || in_ball[static_cast<std::size_t>(i)]) continue;
            for (std::int64_t nb : geom.neighbors(i))
                if (nb > i && omega.bits[static_cast<std::size_t>(nb)] && !in_ball[static_cast<std::size_t>(nb)])
                    uf.unite(i, nb);
        }
        std::unordered_map<std::int64_t, std::int64_t> size_of;
        std::unordered_map<std::int64_t, bool> boundary_of;
        for (std::int64_t i = 0; i < n; ++i) {
            if (!omega.bits[static_cast<std::size_t>(i)] || in_ball[static_cast<std::size_t>(i)]) continue;
            const std::int64_t r = uf.find(i);
            size_of[r] += 1;
            if (geom.boundary() == Boundary::OpenBox) {
                const Site s = geom.site_at(i);
                for (int a = 0; a < d; ++a)
                    if (s.coords[a] == 0 || s.coords[a] == geom.side() - 1) {
                        boundary_of[r] = true;
                        break;
                    }
            }
        }
        std::vector<std::int64_t> adjacent_roots;
        for (std::int64_t s : ball)
            for (std::int64_t nb : geom.neighbors(s))
                if (!in_ball[static_cast<std::size_t>(nb)] && omega.bits[static_cast<std::size_t>(nb)])
                    adjacent_roots.push_back(uf.find(nb));
        std::sort(adjacent_roots.begin(), adjacent_roots.end());
        adjacent_roots.erase(std::unique(adjacent_roots.begin(), adjacent_roots.end()),
                             adjacent_roots.end());
        int branches = 0;
        for (std::int64_t r : adjacent_roots) {
            const bool inf_piece =
                surrogate == InfiniteSurrogate::BoundaryContact && geom.boundary() == Boundary::OpenBox
                    ? boundary_of[r]
                    : static_cast<double>(size_of[r]) >= delta * static_cast<double>(n);
            if (inf_piece) ++branches;
        }
        if (branches >= 3) ++count;

        for (std::int64_t s : ball) in_ball[static_cast<std::size_t>(s)] = 0;
    }
    return count;
}

namespace {

// Per-site sent and received mass for a kernel on a fixed configuration pair.
struct KernelSums {
    std::vector<double> out;
    std::vector<double> in;
};

KernelSums kernel_sums(const LatticeGeometry& geom, MtpKernel kernel, const SiteConfig& omega_a,
                       const SiteConfig& omega_b) {
    const std::int64_t n = geom.site_count();
    KernelSums sums;
    sums.out.assign(static_cast<std::size_t>(n), 0.0);
    sums.in.assign(static_cast<std::size_t>(n), 0.0);

    if (kernel == MtpKernel::UnitOpenNeighbor) {
        for (std::int64_t x = 0; x < n; ++x)
            for (std::int64_t nb : geom.neighbors(x))
                if (omega_a.bits[static_cast<std::size_t>(nb)]) {
                    sums.out[static_cast<std::size_t>(x)] += 1.0;
                    sums.in[static_cast<std::size_t>(nb)] += 1.0;
                }
        return sums;
    }

    // Distance-attainment kernel: each site of a b-cluster sends total mass 1,
    // split evenly over the sites of its own cluster attaining the distance to
    // the largest a-cluster. The b-cluster containing that a-cluster sends
    // nothing.
    const ClusterLabels la = label_clusters(omega_a, geom);
    if (la.clusters.empty()) return sums;
    const ClusterInfo* giant = &la.clusters.front();
    for (const ClusterInfo& c : la.clusters)
        if (c.size > giant->size) giant = &c;
    const auto giant_sites = la.sites_of(giant->label);

    const ClusterLabels lb = label_clusters(omega_b, geom);
    if (lb.clusters.empty()) return sums;

    // One BFS from the giant gives distances for every cluster at once.
    std::vector<std::int64_t> dist(static_cast<std::size_t>(n), -1);
    std::vector<std::int64_t> frontier = giant_sites;
    for (std::int64_t s : frontier) dist[static_cast<std::size_t>(s)] = 0;
    std::int64_t depth = 0;
    while (!frontier.empty()) {
        std::vector<std::int64_t> next;
        ++depth;
        for (std::int64_t s : frontier)
            for (std::int64_t nb : geom.neighbors(s))
                if (dist[static_cast<std::size_t>(nb)] < 0) {
                    dist[static_cast<std::size_t>(nb)] = depth;
                    next.push_back(nb);
                }
        frontier = std::move(next);
    }

    bool giant_all_open_in_b = true;
    for (std::int64_t s : giant_sites)
        if (!omega_b.bits[static_cast<std::size_t>(s)]) {
            giant_all_open_in_b = false;
            break;
        }
    const std::int64_t containing =
        giant_all_open_in_b ? lb.label[static_cast<std::size_t>(giant_sites.front())] : -1;

    for (const ClusterInfo& c : lb.clusters) {
        if (c.label == containing) continue;
        const auto sites = lb.sites_of(c.label);
        std::int64_t dmin = std::numeric_limits<std::int64_t>::max();
        for (std::int64_t s : sites) dmin = std::min(dmin, dist[static_cast<std::size_t>(s)]);
        std::vector<std::int64_t> attain;
        for (std::int64_t s : sites)
            if (dist[static_cast<std::size_t>(s)] == dmin) attain.push_back(s);
        const double w = 1.0 / static_cast<double>(attain.size());
        for (std::int64_t x : sites)
            for (std::int64_t y : attain) {
                sums.out[static_cast<std::size_t>(x)] += w;
                sums.in[static_cast<std::size_t>(y)] += w;
            }
    }
    return sums;
}

} // namespace

MtpReport mtp_check(const LatticeGeometry& geom, MtpKernel kernel, const SiteConfig& omega_a,
                    const SiteConfig& omega_b, double tolerance) {
    if (geom.boundary() != Boundary::Torus)
        throw std::invalid_argument("mass-transport check requires a torus window");
    check_sized(omega_a, geom);
    check_sized(omega_b, geom);
    const std::int64_t n = geom.site_count();
    const KernelSums sums = kernel_sums(geom, kernel, omega_a, omega_b);

    // Averaging over every torus translation makes the kernel exactly
    // diagonally invariant, so sent and received totals must agree at each
    // site up to float roundoff.
    MtpReport report;
    report.max_discrepancy = 0.0;
    const double inv = 1.0 / static_cast<double>(n);
    std::vector<Site> shifts;
    shifts.reserve(static_cast<std::size_t>(n));
    for (std::int64_t z = 0; z < n; ++z) shifts.push_back(geom.site_at(z));
    for (std::int64_t x = 0; x < n; ++x) {
        double sent = 0.0;
        double received = 0.0;
        for (std::int64_t z = 0; z < n; ++z) {
            const std::int64_t xz = geom.translated(x, shifts[static_cast<std::size_t>(z)]);
            sent += sums.out[static_cast<std::size_t>(xz)];
            received += sums.in[static_cast<std::size_t>(xz)];
        }
        const double diff = std::abs(sent * inv - received * inv);
        report.max_discrepancy = std::max(report.max_discrepancy, diff);
    }
    report.pass = report.max_discrepancy <= tolerance;
    return report;
}

void write_labels_csv(const ClusterLabels& labels, std::ostream& os) {
    os << "site,label\n";
    for (std::size_t i = 0; i < labels.label.size(); ++i)
        os << i << ',' << labels.label[i] << '\n';
}

} // namespace perclab
