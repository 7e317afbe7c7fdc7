#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <utility>
#include <vector>

#include "perclab/configs.hpp"
#include "perclab/geometry.hpp"

namespace perclab {

/// Finite stand-ins for "connected to infinity": contact with the open-box
/// window boundary, or cluster size >= delta * L^d.
enum class InfiniteSurrogate { BoundaryContact, MacroscopicDelta };

struct ClusterInfo {
    std::int64_t label = -1; // smallest site index in the component
    std::int64_t size = 0;
    bool touches_boundary = false;       // any site on a window face (open box)
    std::vector<std::uint8_t> crossing;  // per axis: spans opposite faces
                                         // (torus: meets both slabs x_a = 0 and x_a = L/2)
};

struct ClusterLabels {
    std::vector<std::int64_t> label;   // -1 on closed sites
    std::vector<ClusterInfo> clusters; // ascending by label
    int dimension = 0;

    std::int64_t cluster_count() const { return static_cast<std::int64_t>(clusters.size()); }
    const ClusterInfo* find(std::int64_t lbl) const;
    std::vector<std::int64_t> sites_of(std::int64_t lbl) const;
};

/// Union-find labeling of open adjacent pairs; canonical label = smallest
/// member index.
ClusterLabels label_clusters(const SiteConfig& omega, const LatticeGeometry& geom);

struct ClusterStats {
    std::int64_t count = 0;
    std::int64_t largest = 0;
    std::int64_t second = 0;
    double ratio = 0.0; // second / largest, 0 when fewer than two clusters
    std::vector<std::uint8_t> crossing_axis;
};
ClusterStats cluster_stats(const ClusterLabels& labels);

bool surrogate_infinite(const ClusterInfo& c, const LatticeGeometry& geom,
                        InfiniteSurrogate surrogate, double delta);

struct DistanceReport {
    std::int64_t distance = -1;
    std::vector<std::pair<std::int64_t, std::int64_t>> attaining_pairs; // (a-site, b-site)
};

/// Graph distance between two disjoint site sets through the full window,
/// with every attaining pair. Distances ignore open/closed status.
DistanceReport site_set_distance(const LatticeGeometry& geom, std::span<const std::int64_t> a,
                                 std::span<const std::int64_t> b);

DistanceReport cluster_distance(const ClusterLabels& labels, std::int64_t label_a,
                                std::int64_t label_b, const LatticeGeometry& geom);

/// Counts candidate centers y on the 4n-grid around the window center, with
/// B_{2n}(y) inside B_R(center), such that B_n(y) is fully open, y's cluster
/// is surrogate-infinite, and deleting B_n(y) leaves >= 3 components that are
/// adjacent to the ball and surrogate-infinite.
std::int64_t count_coarse_trifurcations(const SiteConfig& omega, const LatticeGeometry& geom,
                                        int block_radius, int window_radius,
                                        InfiniteSurrogate surrogate = InfiniteSurrogate::BoundaryContact,
                                        double delta = 0.01);

enum class MtpKernel {
    UnitOpenNeighbor, // mass 1 from every site to each open neighbor (first config)
    Step2Distance     // 1/N to each site of the own cluster attaining the
                      // distance to the largest cluster of the first config,
                      // evaluated on the second config
};

struct MtpReport {
    double max_discrepancy = 0.0;
    bool pass = false;
};

/// Averages the kernel over all torus translations and compares sent vs
/// received mass at every site. Torus windows only.
MtpReport mtp_check(const LatticeGeometry& geom, MtpKernel kernel, const SiteConfig& omega_a,
                    const SiteConfig& omega_b, double tolerance = 1e-12);

void write_labels_csv(const ClusterLabels& labels, std::ostream& os);

} // namespace perclab
