#include "perclab/geometry.hpp"

#include <algorithm>
#include <cstdlib>
#include <stdexcept>
#include <string>

namespace perclab {

const char* boundary_name(Boundary b) {
    return b == Boundary::OpenBox ? "open" : "torus";
}

LatticeGeometry::LatticeGeometry(int dimension, int side, Boundary boundary)
    : dim_(dimension), side_(side), boundary_(boundary) {
    if (dim_ < 1) throw std::invalid_argument("lattice dimension must be >= 1");
    if (side_ < 1) throw std::invalid_argument("lattice side must be >= 1");
    if (boundary_ == Boundary::Torus && side_ < 3)
        throw std::invalid_argument("torus side must be >= 3 (smaller sides are multigraphs)");

    count_ = 1;
    for (int a = 0; a < dim_; ++a) {
        if (count_ > (std::int64_t{1} << 40) / side_)
            throw std::invalid_argument("lattice window too large");
        count_ *= side_;
    }

    // Row-major strides, axis 0 slowest.
    strides_.assign(dim_, 1);
    for (int a = dim_ - 2; a >= 0; --a) strides_[a] = strides_[a + 1] * side_;

    const int deg = degree();
    table_.assign(static_cast<std::size_t>(count_) * deg, -1);
    dir_table_.assign(static_cast<std::size_t>(count_) * deg, -1);
    in_window_.assign(static_cast<std::size_t>(count_), 0);

    std::vector<int> c(dim_, 0);
    for (std::int64_t i = 0; i < count_; ++i) {
        auto* packed = table_.data() + static_cast<std::size_t>(i) * deg;
        auto* dirs = dir_table_.data() + static_cast<std::size_t>(i) * deg;
        int k = 0;
        for (int a = 0; a < dim_; ++a) {
            for (int step : {-1, +1}) {
                const int dir = 2 * a + (step > 0 ? 1 : 0);
                const int nc = c[a] + step;
                std::int64_t nb = -1;
                if (nc >= 0 && nc < side_) {
                    nb = i + step * strides_[a];
                } else if (boundary_ == Boundary::Torus) {
                    nb = i + (nc < 0 ? (side_ - 1) : -(side_ - 1)) * strides_[a];
                }
                dirs[dir] = nb;
                if (nb >= 0) packed[k++] = nb;
            }
        }
        in_window_[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(k);

        for (int a = dim_ - 1; a >= 0; --a) {
            if (++c[a] < side_) break;
            c[a] = 0;
        }
    }
}

bool LatticeGeometry::contains(const Site& s) const {
    if (static_cast<int>(s.coords.size()) != dim_) return false;
    for (int v : s.coords)
        if (v < 0 || v >= side_) return false;
    return true;
}

std::int64_t LatticeGeometry::index_of(const Site& s) const {
    if (!contains(s)) throw std::invalid_argument("site outside the lattice window");
    std::int64_t idx = 0;
    for (int a = 0; a < dim_; ++a) idx += strides_[a] * s.coords[a];
    return idx;
}

Site LatticeGeometry::site_at(std::int64_t index) const {
    Site s;
    s.coords.resize(dim_);
    for (int a = 0; a < dim_; ++a) {
        s.coords[a] = static_cast<int>(index / strides_[a]);
        index %= strides_[a];
    }
    return s;
}

std::int64_t LatticeGeometry::center() const {
    Site c;
    c.coords.assign(dim_, side_ / 2);
    return index_of(c);
}

std::int64_t LatticeGeometry::distance(std::int64_t a, std::int64_t b) const {
    std::int64_t d = 0;
    for (int ax = 0; ax < dim_; ++ax) {
        const int ca = static_cast<int>((a / strides_[ax]) % side_);
        const int cb = static_cast<int>((b / strides_[ax]) % side_);
        int delta = std::abs(ca - cb);
        if (boundary_ == Boundary::Torus) delta = std::min(delta, side_ - delta);
        d += delta;
    }
    return d;
}

std::int64_t LatticeGeometry::translated(std::int64_t site, const Site& shift) const {
    if (boundary_ != Boundary::Torus)
        throw std::invalid_argument("translation requires a torus window");
    if (static_cast<int>(shift.coords.size()) != dim_)
        throw std::invalid_argument("shift dimension mismatch");
    std::int64_t idx = 0;
    for (int a = 0; a < dim_; ++a) {
        const int c = static_cast<int>((site / strides_[a]) % side_);
        int nc = (c + shift.coords[a]) % side_;
        if (nc < 0) nc += side_;
        idx += strides_[a] * nc;
    }
    return idx;
}

std::pair<std::vector<Site>, int> site_neighbors(const LatticeGeometry& geom, const Site& x) {
    const std::int64_t i = geom.index_of(x);
    std::vector<Site> out;
    for (std::int64_t nb : geom.neighbors(i)) out.push_back(geom.site_at(nb));
    return {std::move(out), geom.sink_count(i)};
}

std::vector<std::int64_t> ball_indices(const LatticeGeometry& geom, std::int64_t center, int radius) {
    if (radius < 0) throw std::invalid_argument("ball radius must be >= 0");
    const int d = geom.dimension();
    const int L = geom.side();
    const std::vector<int> cc = geom.site_at(center).coords;
    std::vector<std::int64_t> out;
    // Scan the offset cube; on the torus offsets can alias, so dedupe.
    std::vector<int> off(d, -radius);
    const bool torus = geom.boundary() == Boundary::Torus;
    for (;;) {
        std::int64_t l1 = 0;
        for (int a = 0; a < d; ++a) l1 += std::abs(off[a]);
        if (l1 <= radius) {
            Site s;
            s.coords.resize(d);
            bool ok = true;
            for (int a = 0; a < d; ++a) {
                int v = cc[a] + off[a];
                if (torus) {
                    v %= L;
                    if (v < 0) v += L;
                } else if (v < 0 || v >= L) {
                    ok = false;
                    break;
                }
                s.coords[a] = v;
            }
            if (ok) out.push_back(geom.index_of(s));
        }
        int a = d - 1;
        for (; a >= 0; --a) {
            if (++off[a] <= radius) break;
            off[a] = -radius;
        }
        if (a < 0) break;
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

std::vector<Site> ball(const LatticeGeometry& geom, const Site& center, int radius) {
    std::vector<Site> out;
    for (std::int64_t i : ball_indices(geom, geom.index_of(center), radius))
        out.push_back(geom.site_at(i));
    return out;
}

std::vector<std::int64_t> geodesic_indices(const LatticeGeometry& geom, std::int64_t u, std::int64_t v) {
    std::vector<std::int64_t> path{u};
    std::int64_t cur = u;
    while (cur != v) {
        const std::int64_t dist = geom.distance(cur, v);
        std::int64_t next = -1;
        for (int a = 0; a < geom.dimension() && next < 0; ++a) {
            for (int sign : {+1, -1}) { // positive direction preferred
                const std::int64_t cand = geom.neighbor_toward(cur, 2 * a + (sign > 0 ? 1 : 0));
                if (cand >= 0 && geom.distance(cand, v) < dist) {
                    next = cand;
                    break;
                }
            }
        }
        if (next < 0) throw std::logic_error("geodesic step failed to decrease distance");
        path.push_back(next);
        cur = next;
    }
    return path;
}

std::vector<Site> geodesic(const LatticeGeometry& geom, const Site& u, const Site& v) {
    std::vector<Site> out;
    for (std::int64_t i : geodesic_indices(geom, geom.index_of(u), geom.index_of(v)))
        out.push_back(geom.site_at(i));
    return out;
}

} // namespace perclab
