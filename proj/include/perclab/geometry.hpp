#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace perclab {

enum class Boundary { OpenBox, Torus };

const char* boundary_name(Boundary b);

/// A vertex of the finite window, as a d-tuple of coordinates in [0, L).
struct Site {
    std::vector<int> coords;

    Site() = default;
    explicit Site(std::vector<int> c) : coords(std::move(c)) {}
    Site(std::initializer_list<int> c) : coords(c) {}

    auto operator<=>(const Site&) const = default;
};

/// Finite window of Z^d with side L: either a box with dissipative (sink)
/// boundary or a torus. Sites are addressed by row-major linear index
/// (axis 0 slowest). Immutable after construction; safe to share across
/// threads.
class LatticeGeometry {
public:
    LatticeGeometry(int dimension, int side, Boundary boundary);

    int dimension() const noexcept { return dim_; }
    int side() const noexcept { return side_; }
    Boundary boundary() const noexcept { return boundary_; }
    std::int64_t site_count() const noexcept { return count_; }
    int degree() const noexcept { return 2 * dim_; }

    bool contains(const Site& s) const;
    std::int64_t index_of(const Site& s) const; // throws on out-of-window coords
    Site site_at(std::int64_t index) const;
    std::int64_t center() const;

    /// In-window neighbors of a site (2d on the torus, fewer at open faces).
    std::span<const std::int64_t> neighbors(std::int64_t site) const {
        return {table_.data() + static_cast<std::size_t>(site) * degree(),
                static_cast<std::size_t>(in_window_[static_cast<std::size_t>(site)])};
    }

    int sink_count(std::int64_t site) const {
        return degree() - in_window_[static_cast<std::size_t>(site)];
    }

    /// Directional neighbor: direction j in [0, 2d), axis j/2, sign -/+ for
    /// even/odd j. Returns -1 for a sink (OpenBox only).
    std::int64_t neighbor_toward(std::int64_t site, int direction) const {
        return dir_table_[static_cast<std::size_t>(site) * degree() + direction];
    }

    /// Graph distance through the full window (closed sites traversable).
    std::int64_t distance(std::int64_t a, std::int64_t b) const;

    /// Index of the translate site + shift (torus only).
    std::int64_t translated(std::int64_t site, const Site& shift) const;

private:
    int dim_;
    int side_;
    Boundary boundary_;
    std::int64_t count_;
    std::vector<std::int64_t> strides_;
    std::vector<std::int64_t> table_;      // in-window neighbors, packed per site
    std::vector<std::int64_t> dir_table_;  // 2d directional entries per site, -1 = sink
    std::vector<std::uint8_t> in_window_;  // number of in-window neighbors
};

/// In-window neighbors plus the number of sink (out-of-window) neighbors.
std::pair<std::vector<Site>, int> site_neighbors(const LatticeGeometry& geom, const Site& x);

/// All sites at graph distance <= radius from center, ascending by index.
std::vector<std::int64_t> ball_indices(const LatticeGeometry& geom, std::int64_t center, int radius);
std::vector<Site> ball(const LatticeGeometry& geom, const Site& center, int radius);

/// Deterministic shortest path from u to v, both endpoints included. At each
/// step the lowest-indexed axis along which the distance to v strictly
/// decreases is advanced; on the torus the positive direction is preferred
/// when both wrap directions shorten the path.
std::vector<std::int64_t> geodesic_indices(const LatticeGeometry& geom, std::int64_t u, std::int64_t v);
std::vector<Site> geodesic(const LatticeGeometry& geom, const Site& u, const Site& v);

} // namespace perclab
