#pragma once

// Test-only reference implementations, written independently of the library
// code paths they check: plain BFS over hand-rolled neighbor enumeration, a
// one-toppling-at-a-time stabilizer, full-sweep bootstrap closure, flood-fill
// labeling, and exhaustive small-window enumeration.

#include <algorithm>
#include <cstdint>
#include <map>
#include <queue>
#include <set>
#include <vector>

namespace oracle {

struct Window {
    int d;
    int L;
    bool torus;

    std::int64_t count() const {
        std::int64_t n = 1;
        for (int a = 0; a < d; ++a) n *= L;
        return n;
    }

    std::vector<int> coords(std::int64_t idx) const {
        std::vector<int> c(static_cast<std::size_t>(d));
        for (int a = d - 1; a >= 0; --a) {
            c[static_cast<std::size_t>(a)] = static_cast<int>(idx % L);
            idx /= L;
        }
        return c;
    }

    std::int64_t index(const std::vector<int>& c) const {
        std::int64_t idx = 0;
        for (int a = 0; a < d; ++a) idx = idx * L + c[static_cast<std::size_t>(a)];
        return idx;
    }

    // In-window neighbors plus the number of dropped (sink) directions.
    std::pair<std::vector<std::int64_t>, int> neighbors(std::int64_t idx) const {
        std::vector<std::int64_t> out;
        int sinks = 0;
        const std::vector<int> c = coords(idx);
        for (int a = 0; a < d; ++a) {
            for (int step : {-1, +1}) {
                std::vector<int> n = c;
                n[static_cast<std::size_t>(a)] += step;
                if (torus) {
                    n[static_cast<std::size_t>(a)] = ((n[static_cast<std::size_t>(a)] % L) + L) % L;
                    out.push_back(index(n));
                } else if (n[static_cast<std::size_t>(a)] >= 0 && n[static_cast<std::size_t>(a)] < L) {
                    out.push_back(index(n));
                } else {
                    ++sinks;
                }
            }
        }
        return {out, sinks};
    }
};

inline std::vector<std::int64_t> bfs_distances(const Window& w, std::int64_t from) {
    std::vector<std::int64_t> dist(static_cast<std::size_t>(w.count()), -1);
    std::queue<std::int64_t> q;
    dist[static_cast<std::size_t>(from)] = 0;
    q.push(from);
    while (!q.empty()) {
        const std::int64_t s = q.front();
        q.pop();
        for (std::int64_t nb : w.neighbors(s).first) {
            if (dist[static_cast<std::size_t>(nb)] >= 0) continue;
            dist[static_cast<std::size_t>(nb)] = dist[static_cast<std::size_t>(s)] + 1;
            q.push(nb);
        }
    }
    return dist;
}

struct StabilizationTrace {
    std::vector<std::int64_t> final_mass;
    std::vector<std::int64_t> odometer;
    std::int64_t dissipated = 0;
    bool stabilized = true;
};

// Topples one unstable site at a time. pick = 0 chooses the smallest-index
// unstable site, pick = 1 the largest.
inline StabilizationTrace stabilize_stepwise(const Window& w, std::vector<std::int64_t> mass,
                                             std::int64_t threshold, int pick = 0,
                                             std::int64_t max_topplings = 1 << 22) {
    StabilizationTrace tr;
    tr.odometer.assign(mass.size(), 0);
    std::int64_t done = 0;
    for (;;) {
        std::int64_t site = -1;
        if (pick == 0) {
            for (std::size_t i = 0; i < mass.size(); ++i)
                if (mass[i] >= threshold) {
                    site = static_cast<std::int64_t>(i);
                    break;
                }
        } else {
            for (std::size_t i = mass.size(); i-- > 0;)
                if (mass[i] >= threshold) {
                    site = static_cast<std::int64_t>(i);
                    break;
                }
        }
        if (site < 0) break;
        if (++done > max_topplings) {
            tr.stabilized = false;
            break;
        }
        const auto [nbs, sinks] = w.neighbors(site);
        mass[static_cast<std::size_t>(site)] -= 2 * w.d;
        tr.odometer[static_cast<std::size_t>(site)] += 1;
        tr.dissipated += sinks;
        for (std::int64_t nb : nbs) mass[static_cast<std::size_t>(nb)] += 1;
    }
    tr.final_mass = std::move(mass);
    return tr;
}

// Bootstrap closure by repeated full sweeps until nothing changes.
inline std::vector<std::uint8_t> bootstrap_sweep(const Window& w, const std::vector<std::uint8_t>& seed,
                                                 int theta) {
    std::vector<std::uint8_t> occ = seed;
    for (;;) {
        bool changed = false;
        for (std::size_t i = 0; i < occ.size(); ++i) {
            if (occ[i]) continue;
            int n = 0;
            for (std::int64_t nb : w.neighbors(static_cast<std::int64_t>(i)).first)
                n += occ[static_cast<std::size_t>(nb)];
            if (n >= theta) {
                occ[i] = 1;
                changed = true;
            }
        }
        if (!changed) return occ;
    }
}

// Flood-fill labeling of open components; labels are smallest member indices.
inline std::vector<std::int64_t> flood_labels(const Window& w, const std::vector<std::uint8_t>& open) {
    std::vector<std::int64_t> label(open.size(), -1);
    for (std::size_t i = 0; i < open.size(); ++i) {
        if (!open[i] || label[i] >= 0) continue;
        std::queue<std::int64_t> q;
        q.push(static_cast<std::int64_t>(i));
        label[i] = static_cast<std::int64_t>(i);
        while (!q.empty()) {
            const std::int64_t s = q.front();
            q.pop();
            for (std::int64_t nb : w.neighbors(s).first) {
                if (!open[static_cast<std::size_t>(nb)] || label[static_cast<std::size_t>(nb)] >= 0)
                    continue;
                label[static_cast<std::size_t>(nb)] = static_cast<std::int64_t>(i);
                q.push(nb);
            }
        }
    }
    return label;
}

} // namespace oracle
