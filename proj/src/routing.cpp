#include "slasim/routing.hpp"

#include <algorithm>
#include <functional>
#include <limits>
#include <queue>
#include <set>

namespace slasim {

namespace {

constexpr std::int64_t kUnreachable = std::numeric_limits<std::int64_t>::max();

struct Restrictions {
    std::vector<char> banned_links;  // by link index; empty means none
    std::vector<char> banned_nodes;  // by node id; empty means none

    bool link_banned(std::size_t l) const { return !banned_links.empty() && banned_links[l]; }
    bool node_banned(NodeId n) const { return !banned_nodes.empty() && banned_nodes[n]; }
};

void check_endpoints(const Topology& topology, NodeId origin, NodeId destination) {
    if (origin >= topology.node_count() || destination >= topology.node_count()) {
        throw RoutingError("route endpoint out of range");
    }
    if (origin == destination) throw RoutingError("origin equals destination");
}

// Reverse Dijkstra: cost of the cheapest path from every node to `destination`.
std::vector<std::int64_t> distances_to(const Topology& topology, NodeId destination, CostMetric metric,
                                       const Restrictions& r) {
    std::vector<std::int64_t> dist(topology.node_count(), kUnreachable);
    using Item = std::pair<std::int64_t, NodeId>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
    dist[destination] = 0;
    heap.emplace(0, destination);
    while (!heap.empty()) {
        auto [d, v] = heap.top();
        heap.pop();
        if (d != dist[v]) continue;
        for (auto l : topology.in_links(v)) {
            if (r.link_banned(l)) continue;
            const NodeId u = topology.link(l).src;
            if (r.node_banned(u)) continue;
            const std::int64_t nd = d + link_cost(topology, l, metric);
            if (nd < dist[u]) {
                dist[u] = nd;
                heap.emplace(nd, u);
            }
        }
    }
    return dist;
}

bool tight(const Topology& topology, std::size_t l, CostMetric metric, const std::vector<std::int64_t>& dist,
           const Restrictions& r) {
    const auto& link = topology.link(l);
    if (r.link_banned(l) || r.node_banned(link.dst) || dist[link.dst] == kUnreachable) return false;
    return link_cost(topology, l, metric) + dist[link.dst] == dist[link.src];
}

// Greedy walk over tight edges, smallest next node first: yields the
// lexicographically smallest minimum-cost route.
std::optional<Route> lexmin_route(const Topology& topology, NodeId origin, NodeId destination, CostMetric metric,
                                  const std::vector<std::int64_t>& dist, const Restrictions& r) {
    if (dist[origin] == kUnreachable) return std::nullopt;
    Route route{origin};
    NodeId u = origin;
    while (u != destination) {
        bool stepped = false;
        for (auto l : topology.out_links(u)) {
            if (tight(topology, l, metric, dist, r)) {
                u = topology.link(l).dst;
                route.push_back(u);
                stepped = true;
                break;
            }
        }
        if (!stepped) return std::nullopt;  // unreachable under restrictions
    }
    return route;
}

void collect_tight_paths(const Topology& topology, NodeId destination, CostMetric metric,
                         const std::vector<std::int64_t>& dist, std::size_t cap, Route& prefix,
                         std::vector<Route>& out) {
    const NodeId u = prefix.back();
    if (u == destination) {
        out.push_back(prefix);
        return;
    }
    static const Restrictions kNone{};
    for (auto l : topology.out_links(u)) {
        if (out.size() >= cap) return;
        if (!tight(topology, l, metric, dist, kNone)) continue;
        prefix.push_back(topology.link(l).dst);
        collect_tight_paths(topology, destination, metric, dist, cap, prefix, out);
        prefix.pop_back();
    }
}

std::vector<Route> ecmp_from_table(const Topology& topology, NodeId origin, NodeId destination, CostMetric metric,
                                   const std::vector<std::int64_t>& dist, std::size_t cap) {
    if (dist[origin] == kUnreachable) {
        throw RoutingError("destination " + std::to_string(destination) + " unreachable from " +
                           std::to_string(origin));
    }
    std::vector<Route> out;
    Route prefix{origin};
    collect_tight_paths(topology, destination, metric, dist, std::max<std::size_t>(cap, 1), prefix, out);
    return out;
}

}  // namespace

std::int64_t link_cost(const Topology& topology, std::size_t link, CostMetric metric) {
    return metric == CostMetric::hop_count ? 1 : topology.link(link).base_latency;
}

std::int64_t route_cost(const Topology& topology, const Route& route, CostMetric metric) {
    std::int64_t total = 0;
    for (std::size_t i = 0; i + 1 < route.size(); ++i) {
        auto l = topology.find_link(route[i], route[i + 1]);
        if (!l) throw RoutingError("route uses missing link " + to_string(LinkKey{route[i], route[i + 1]}));
        total += link_cost(topology, *l, metric);
    }
    return total;
}

bool is_valid_route(const Topology& topology, const Route& route) {
    if (route.size() < 2) return false;
    std::vector<char> seen(topology.node_count(), 0);
    for (std::size_t i = 0; i < route.size(); ++i) {
        if (route[i] >= topology.node_count() || seen[route[i]]) return false;
        seen[route[i]] = 1;
        if (i + 1 < route.size() && !topology.has_link(route[i], route[i + 1])) return false;
    }
    return true;
}

std::vector<LinkKey> route_links(const Route& route) {
    std::vector<LinkKey> out;
    for (std::size_t i = 0; i + 1 < route.size(); ++i) out.push_back({route[i], route[i + 1]});
    return out;
}

Route shortest_path(const Topology& topology, NodeId origin, NodeId destination, CostMetric metric) {
    check_endpoints(topology, origin, destination);
    const Restrictions none{};
    auto dist = distances_to(topology, destination, metric, none);
    auto route = lexmin_route(topology, origin, destination, metric, dist, none);
    if (!route) {
        throw RoutingError("destination " + std::to_string(destination) + " unreachable from " +
                           std::to_string(origin));
    }
    return *route;
}

std::vector<Route> ecmp_paths(const Topology& topology, NodeId origin, NodeId destination, CostMetric metric,
                              std::size_t max_paths) {
    check_endpoints(topology, origin, destination);
    auto dist = distances_to(topology, destination, metric, Restrictions{});
    return ecmp_from_table(topology, origin, destination, metric, dist, max_paths);
}

std::size_t ecmp_index(FlowId flow, std::size_t path_count) {
    // splitmix64 finalizer
    std::uint64_t z = flow.value + 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    z ^= z >> 31;
    return static_cast<std::size_t>(z % path_count);
}

const Route& ecmp_select(FlowId flow, std::span<const Route> paths) {
    if (paths.empty()) throw RoutingError("ecmp_select needs at least one path");
    return paths[ecmp_index(flow, paths.size())];
}

std::vector<Route> alternative_routes(const Topology& topology, NodeId origin, NodeId destination,
                                      std::span<const LinkKey> excluded, std::size_t k, CostMetric metric) {
    check_endpoints(topology, origin, destination);
    if (k == 0) throw RoutingError("alternative_routes needs k >= 1");

    Restrictions base;
    base.banned_links.assign(topology.link_count(), 0);
    for (const auto& key : excluded) {
        if (auto l = topology.find_link(key.src, key.dst)) base.banned_links[*l] = 1;
    }

    std::vector<Route> accepted;
    {
        auto dist = distances_to(topology, destination, metric, base);
        auto first = lexmin_route(topology, origin, destination, metric, dist, base);
        if (!first) return accepted;
        accepted.push_back(std::move(*first));
    }

    // Yen: candidates ordered by (cost, node sequence).
    std::set<std::pair<std::int64_t, Route>> candidates;
    while (accepted.size() < k) {
        const Route& last = accepted.back();
        for (std::size_t i = 0; i + 1 < last.size(); ++i) {
            const NodeId spur = last[i];
            Restrictions r = base;
            r.banned_nodes.assign(topology.node_count(), 0);
            for (std::size_t j = 0; j < i; ++j) r.banned_nodes[last[j]] = 1;
            for (const auto& p : accepted) {
                if (p.size() > i + 1 && std::equal(p.begin(), p.begin() + static_cast<std::ptrdiff_t>(i) + 1,
                                                   last.begin())) {
                    r.banned_links[*topology.find_link(p[i], p[i + 1])] = 1;
                }
            }
            auto dist = distances_to(topology, destination, metric, r);
            auto tail = lexmin_route(topology, spur, destination, metric, dist, r);
            if (!tail) continue;
            Route candidate(last.begin(), last.begin() + static_cast<std::ptrdiff_t>(i));
            candidate.insert(candidate.end(), tail->begin(), tail->end());
            const auto cost = route_cost(topology, candidate, metric);
            if (std::find(accepted.begin(), accepted.end(), candidate) == accepted.end()) {
                candidates.emplace(cost, std::move(candidate));
            }
        }
        if (candidates.empty()) break;
        accepted.push_back(candidates.begin()->second);
        candidates.erase(candidates.begin());
    }
    return accepted;
}

RouteCache::RouteCache(const Topology& topology, CostMetric metric, std::size_t ecmp_max_paths)
    : topology_(topology), metric_(metric), ecmp_max_paths_(ecmp_max_paths), tables_(topology.node_count()) {}

const std::vector<std::int64_t>& RouteCache::distances_to(NodeId destination) {
    auto& table = tables_.at(destination);
    if (table.empty()) table = slasim::distances_to(topology_, destination, metric_, Restrictions{});
    return table;
}

Route RouteCache::shortest_path(NodeId origin, NodeId destination) {
    check_endpoints(topology_, origin, destination);
    auto route = lexmin_route(topology_, origin, destination, metric_, distances_to(destination), Restrictions{});
    if (!route) {
        throw RoutingError("destination " + std::to_string(destination) + " unreachable from " +
                           std::to_string(origin));
    }
    return *route;
}

std::vector<Route> RouteCache::ecmp_paths(NodeId origin, NodeId destination) {
    check_endpoints(topology_, origin, destination);
    return ecmp_from_table(topology_, origin, destination, metric_, distances_to(destination), ecmp_max_paths_);
}

}  // namespace slasim
