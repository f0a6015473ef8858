#include <doctest.h>

#include <map>

#include "oracle.hpp"
#include "slasim/routing.hpp"

using namespace slasim;

namespace {

Topology cycle4() {
    Topology t(4);
    t.add_bidirectional(0, 1);
    t.add_bidirectional(1, 2);
    t.add_bidirectional(2, 3);
    t.add_bidirectional(3, 0);
    return t;
}

// Hop distance on a w x h torus.
std::uint32_t torus_distance(std::uint32_t w, std::uint32_t h, NodeId a, NodeId b) {
    const auto dx = std::abs(static_cast<int>(a % w) - static_cast<int>(b % w));
    const auto dy = std::abs(static_cast<int>(a / w) - static_cast<int>(b / w));
    return std::min<std::uint32_t>(dx, w - dx) + std::min<std::uint32_t>(dy, h - dy);
}

}  // namespace

TEST_CASE("shortest path on a single link") {
    Topology t(2);
    t.add_link(0, 1);
    CHECK(shortest_path(t, 0, 1, CostMetric::hop_count) == Route{0, 1});
    CHECK_THROWS_AS(shortest_path(t, 1, 0, CostMetric::hop_count), RoutingError);
    CHECK_THROWS_AS(shortest_path(t, 0, 0, CostMetric::hop_count), RoutingError);
}

TEST_CASE("shortest path ties break lexicographically") {
    auto t = cycle4();
    CHECK(shortest_path(t, 0, 2, CostMetric::hop_count) == Route{0, 1, 2});
    CHECK(shortest_path(t, 2, 0, CostMetric::hop_count) == Route{2, 1, 0});
}

TEST_CASE("static latency metric prefers the faster detour") {
    Topology t(3);
    t.add_link(0, 2, from_ms(10));
    t.add_link(0, 1, from_ms(1));
    t.add_link(1, 2, from_ms(1));
    CHECK(shortest_path(t, 0, 2, CostMetric::hop_count) == Route{0, 2});
    CHECK(shortest_path(t, 0, 2, CostMetric::static_latency) == Route{0, 1, 2});
}

TEST_CASE("torus shortest paths match manhattan torus distance") {
    auto t = generate_swdc({32, 32, 0, 1});
    RouteCache cache(t, CostMetric::hop_count);
    const NodeId corner = 0;
    const NodeId opposite = 32 * 32 - 1;
    CHECK(cache.shortest_path(corner, opposite).size() - 1 == torus_distance(32, 32, corner, opposite));
    for (NodeId b : {NodeId{17}, NodeId{500}, NodeId{528}, NodeId{1000}}) {
        const auto r = shortest_path(t, 3, b, CostMetric::hop_count);
        CHECK(r.size() - 1 == torus_distance(32, 32, 3, b));
        CHECK(cache.shortest_path(3, b) == r);
    }
}

TEST_CASE("routing ignores congestion") {
    auto plain = generate_swdc({6, 6, 1, 9});
    auto congested = generate_swdc({6, 6, 1, 9});
    const auto r = shortest_path(plain, 0, 20, CostMetric::static_latency);
    congested.inject_congestion({route_links(r), 50.0, 0, kNever});
    CHECK(shortest_path(congested, 0, 20, CostMetric::static_latency) == r);
}

TEST_CASE("ecmp paths") {
    SUBCASE("single link") {
        Topology t(2);
        t.add_link(0, 1);
        CHECK(ecmp_paths(t, 0, 1, CostMetric::hop_count).size() == 1);
    }
    SUBCASE("4-cycle has two equal paths") {
        auto t = cycle4();
        auto paths = ecmp_paths(t, 0, 2, CostMetric::hop_count);
        REQUIRE(paths.size() == 2);
        CHECK(paths[0] == Route{0, 1, 2});
        CHECK(paths[1] == Route{0, 3, 2});
    }
    SUBCASE("torus paths share the minimum cost") {
        auto t = generate_swdc({8, 8, 0, 1});
        auto paths = ecmp_paths(t, 0, 27, CostMetric::hop_count);
        const auto best = route_cost(t, shortest_path(t, 0, 27, CostMetric::hop_count), CostMetric::hop_count);
        CHECK(paths.size() > 1);
        CHECK(paths.size() <= kDefaultEcmpMaxPaths);
        for (const auto& p : paths) {
            CHECK(is_valid_route(t, p));
            CHECK(route_cost(t, p, CostMetric::hop_count) == best);
        }
        CHECK(std::is_sorted(paths.begin(), paths.end()));
    }
    SUBCASE("cap") {
        auto t = generate_swdc({8, 8, 0, 1});
        CHECK(ecmp_paths(t, 0, 36, CostMetric::hop_count, 3).size() == 3);
    }
}

TEST_CASE("ecmp_select is a deterministic hash of the flow id") {
    std::vector<Route> one{{0, 1}};
    CHECK(ecmp_select(FlowId{5}, one) == Route{0, 1});
    std::vector<Route> four{{0, 1, 9}, {0, 2, 9}, {0, 3, 9}, {0, 4, 9}};
    std::map<std::size_t, int> counts;
    for (std::uint64_t id = 0; id < 10000; ++id) {
        const auto i = ecmp_index(FlowId{id}, 4);
        CHECK(i == ecmp_index(FlowId{id}, 4));
        ++counts[i];
    }
    for (const auto& [path, n] : counts) {
        CHECK(n >= 2000);
        CHECK(n <= 3000);
    }
}

TEST_CASE("alternative routes") {
    SUBCASE("no alternative on a single link") {
        Topology t(2);
        t.add_link(0, 1);
        std::vector<LinkKey> ex{{0, 1}};
        CHECK(alternative_routes(t, 0, 1, ex, 1, CostMetric::hop_count).empty());
    }
    SUBCASE("4-cycle forced alternative") {
        auto t = cycle4();
        std::vector<LinkKey> ex{{0, 1}};
        auto alts = alternative_routes(t, 0, 2, ex, 3, CostMetric::hop_count);
        REQUIRE(alts.size() == 1);
        CHECK(alts[0] == Route{0, 3, 2});
    }
    SUBCASE("k must be positive") {
        auto t = cycle4();
        CHECK_THROWS_AS(alternative_routes(t, 0, 2, {}, 0, CostMetric::hop_count), RoutingError);
    }
    SUBCASE("torus k=3 matches enumeration") {
        auto t = generate_swdc({4, 4, 0, 1});
        const auto base = shortest_path(t, 0, 10, CostMetric::hop_count);
        std::vector<LinkKey> ex{{base[0], base[1]}};
        auto alts = alternative_routes(t, 0, 10, ex, 3, CostMetric::hop_count);
        auto all = oracle::all_simple_paths(t, 0, 10, ex, CostMetric::hop_count);
        REQUIRE(alts.size() == 3);
        for (std::size_t i = 0; i < 3; ++i) {
            CHECK(alts[i] == all[i].route);
            const auto links = route_links(alts[i]);
            CHECK(std::find(links.begin(), links.end(), ex[0]) == links.end());
        }
    }
}

TEST_CASE("routing agrees with exhaustive enumeration on random small graphs") {
    std::mt19937_64 rng(2024);
    for (int g = 0; g < 300; ++g) {
        const auto n = static_cast<NodeId>(std::uniform_int_distribution<int>(2, 7)(rng));
        auto t = oracle::random_graph(rng, n);
        const auto metric = g % 2 ? CostMetric::hop_count : CostMetric::static_latency;
        const NodeId a = rng() % n;
        NodeId b = rng() % n;
        if (a == b) b = (b + 1) % n;
        const auto all = oracle::all_simple_paths(t, a, b, {}, metric);
        REQUIRE(!all.empty());
        CHECK(shortest_path(t, a, b, metric) == all[0].route);
        std::vector<LinkKey> ex;
        if (all[0].route.size() > 2) ex.push_back({all[0].route[1], all[0].route[2]});
        const auto filtered = oracle::all_simple_paths(t, a, b, ex, metric);
        const auto alts = alternative_routes(t, a, b, ex, 4, metric);
        REQUIRE(alts.size() == std::min<std::size_t>(4, filtered.size()));
        for (std::size_t i = 0; i < alts.size(); ++i) CHECK(alts[i] == filtered[i].route);
    }
}
