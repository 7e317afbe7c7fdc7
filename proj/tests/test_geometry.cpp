#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <set>

#include "perclab/configs.hpp"
#include "perclab/geometry.hpp"
#include "perclab/rng.hpp"
#include "oracles.hpp"

using namespace perclab;

namespace {

oracle::Window mirror(const LatticeGeometry& g) {
    return {g.dimension(), g.side(), g.boundary() == Boundary::Torus};
}

} // namespace

TEST_CASE("torus neighbors wrap") {
    const LatticeGeometry g(2, 4, Boundary::Torus);
    const auto [nbs, sinks] = site_neighbors(g, Site{0, 0});
    CHECK(sinks == 0);
    CHECK(nbs.size() == 4);
    const std::set<Site> got(nbs.begin(), nbs.end());
    const std::set<Site> want{Site{1, 0}, Site{3, 0}, Site{0, 1}, Site{0, 3}};
    CHECK(got == want);
}

TEST_CASE("open box corner has two sinks") {
    const LatticeGeometry g(2, 4, Boundary::OpenBox);
    const auto [nbs, sinks] = site_neighbors(g, Site{0, 0});
    CHECK(nbs.size() == 2);
    CHECK(sinks == 2);
}

TEST_CASE("interior line site") {
    const LatticeGeometry g(1, 3, Boundary::OpenBox);
    const auto [nbs, sinks] = site_neighbors(g, Site{1});
    CHECK(sinks == 0);
    REQUIRE(nbs.size() == 2);
    CHECK(((nbs[0] == Site{0} && nbs[1] == Site{2}) || (nbs[0] == Site{2} && nbs[1] == Site{0})));
}

TEST_CASE("out-of-window site rejected") {
    const LatticeGeometry g(2, 4, Boundary::OpenBox);
    CHECK_THROWS_AS(site_neighbors(g, Site{4, 0}), std::invalid_argument);
    CHECK_THROWS_AS(site_neighbors(g, Site{-1, 0}), std::invalid_argument);
}

TEST_CASE("degree accounting at every site") {
    for (Boundary b : {Boundary::OpenBox, Boundary::Torus}) {
        for (int d : {1, 2, 3}) {
            const LatticeGeometry g(d, 4, b);
            for (std::int64_t i = 0; i < g.site_count(); ++i) {
                CHECK(static_cast<int>(g.neighbors(i).size()) + g.sink_count(i) == 2 * d);
                if (b == Boundary::Torus) CHECK(g.sink_count(i) == 0);
            }
        }
    }
}

TEST_CASE("neighbor symmetry") {
    KeyedRng rng(11);
    for (Boundary b : {Boundary::OpenBox, Boundary::Torus}) {
        const LatticeGeometry g(2, 6, b);
        for (int rep = 0; rep < 50; ++rep) {
            const auto x = static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(g.site_count())));
            for (std::int64_t y : g.neighbors(x)) {
                const auto back = g.neighbors(y);
                CHECK(std::count(back.begin(), back.end(), x) == 1);
            }
        }
    }
}

TEST_CASE("unit ball is a cross") {
    const LatticeGeometry g(2, 9, Boundary::Torus);
    CHECK(ball(g, Site{4, 4}, 1).size() == 5);
}

TEST_CASE("zero-radius ball") {
    const LatticeGeometry g(2, 9, Boundary::Torus);
    const auto b = ball(g, Site{4, 4}, 0);
    REQUIRE(b.size() == 1);
    CHECK(b[0] == Site{4, 4});
}

TEST_CASE("radius-2 ball matches breadth-first oracle") {
    const LatticeGeometry g(2, 9, Boundary::Torus);
    const auto got = ball_indices(g, g.index_of(Site{4, 4}), 2);
    CHECK(got.size() == 13);

    const auto dist = oracle::bfs_distances(mirror(g), g.index_of(Site{4, 4}));
    std::vector<std::int64_t> want;
    for (std::size_t i = 0; i < dist.size(); ++i)
        if (dist[i] >= 0 && dist[i] <= 2) want.push_back(static_cast<std::int64_t>(i));
    CHECK(got == want);
}

TEST_CASE("balls agree with the oracle at random centers and radii") {
    KeyedRng rng(23);
    for (Boundary b : {Boundary::OpenBox, Boundary::Torus}) {
        for (int d : {1, 2, 3}) {
            const LatticeGeometry g(d, 5, b);
            const oracle::Window w = mirror(g);
            for (int rep = 0; rep < 10; ++rep) {
                const auto c = static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(g.site_count())));
                const int r = static_cast<int>(rng.below(7));
                const auto got = ball_indices(g, c, r);
                const auto dist = oracle::bfs_distances(w, c);
                std::vector<std::int64_t> want;
                for (std::size_t i = 0; i < dist.size(); ++i)
                    if (dist[i] >= 0 && dist[i] <= r) want.push_back(static_cast<std::int64_t>(i));
                CHECK(got == want);
            }
        }
    }
}

TEST_CASE("geodesic endpoints and axis order") {
    const LatticeGeometry g(2, 4, Boundary::OpenBox);
    CHECK(geodesic(g, Site{2, 2}, Site{2, 2}) == std::vector<Site>{Site{2, 2}});
    CHECK(geodesic(g, Site{0, 0}, Site{2, 0}) ==
          std::vector<Site>{Site{0, 0}, Site{1, 0}, Site{2, 0}});
    // Two geodesics exist between (0,0) and (1,1); the axis-order rule must
    // pick the one through (1,0).
    CHECK(geodesic(g, Site{0, 0}, Site{1, 1}) ==
          std::vector<Site>{Site{0, 0}, Site{1, 0}, Site{1, 1}});
}

TEST_CASE("geodesic length equals graph distance on the torus") {
    const LatticeGeometry g(2, 8, Boundary::Torus);
    const oracle::Window w = mirror(g);
    KeyedRng rng(31);
    for (int rep = 0; rep < 40; ++rep) {
        const auto u = static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(g.site_count())));
        const auto v = static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(g.site_count())));
        const auto path = geodesic_indices(g, u, v);
        const auto dist = oracle::bfs_distances(w, u);
        CHECK(static_cast<std::int64_t>(path.size()) - 1 == dist[static_cast<std::size_t>(v)]);
        for (std::size_t i = 1; i < path.size(); ++i) {
            const auto nbs = g.neighbors(path[i - 1]);
            CHECK(std::count(nbs.begin(), nbs.end(), path[i]) == 1);
        }
        // Repeated calls agree.
        CHECK(path == geodesic_indices(g, u, v));
    }
}

TEST_CASE("translation by zero and by the inverse") {
    const LatticeGeometry g(2, 5, Boundary::Torus);
    KeyedRng rng(47);
    ParticleConfig cfg(g.site_count());
    for (auto& v : cfg.values) v = static_cast<double>(rng.below(5));

    CHECK(translate_config(cfg, Site{0, 0}, g) == cfg);
    const ParticleConfig shifted = translate_config(cfg, Site{2, 3}, g);
    CHECK(translate_config(shifted, Site{-2, -3}, g) == cfg);

    auto sorted = [](ParticleConfig c) {
        std::sort(c.values.begin(), c.values.end());
        return c.values;
    };
    CHECK(sorted(shifted) == sorted(cfg));
}

TEST_CASE("single-site shift on a line") {
    const LatticeGeometry g(1, 3, Boundary::Torus);
    ParticleConfig cfg(3);
    cfg.values = {5, 0, 0};
    CHECK(translate_config(cfg, Site{1}, g).values == std::vector<double>{0, 5, 0});
}

TEST_CASE("translation rejected on the open box") {
    const LatticeGeometry g(1, 3, Boundary::OpenBox);
    ParticleConfig cfg(3);
    CHECK_THROWS_AS(translate_config(cfg, Site{1}, g), std::invalid_argument);
}

TEST_CASE("row-major index round trip") {
    const LatticeGeometry g(3, 4, Boundary::OpenBox);
    for (std::int64_t i = 0; i < g.site_count(); ++i) CHECK(g.index_of(g.site_at(i)) == i);
    CHECK(g.index_of(Site{1, 2, 3}) == 1 * 16 + 2 * 4 + 3);
}
