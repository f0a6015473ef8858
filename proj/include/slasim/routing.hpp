#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "slasim/topology.hpp"
#include "slasim/types.hpp"

namespace slasim {

enum class CostMetric { hop_count, static_latency };

inline constexpr std::size_t kDefaultEcmpMaxPaths = 16;

/// Cost of one link under the metric; uses base latency only, so routing
/// never sees congestion.
std::int64_t link_cost(const Topology& topology, std::size_t link, CostMetric metric);

/// Throws RoutingError when two consecutive nodes are not linked.
std::int64_t route_cost(const Topology& topology, const Route& route, CostMetric metric);

/// Adjacent hops, no repeated node, at least one edge.
bool is_valid_route(const Topology& topology, const Route& route);

/// Links traversed by a route, in order.
std::vector<LinkKey> route_links(const Route& route);

/// Minimum-cost route; ties resolve to the lexicographically smallest node
/// sequence. Throws RoutingError when the destination is unreachable.
Route shortest_path(const Topology& topology, NodeId origin, NodeId destination, CostMetric metric);

/// All minimum-cost routes in lexicographic order, at most `max_paths`.
std::vector<Route> ecmp_paths(const Topology& topology, NodeId origin, NodeId destination,
                              CostMetric metric, std::size_t max_paths = kDefaultEcmpMaxPaths);

/// Deterministic flow-to-path hash.
std::size_t ecmp_index(FlowId flow, std::size_t path_count);
const Route& ecmp_select(FlowId flow, std::span<const Route> paths);

/// Up to k loop-free routes that avoid every excluded link, ordered by
/// (cost, node sequence). Empty when none exist.
std::vector<Route> alternative_routes(const Topology& topology, NodeId origin, NodeId destination,
                                      std::span<const LinkKey> excluded, std::size_t k, CostMetric metric);

/// Caches per-destination distance tables over the unrestricted graph so
/// that base routes for many flows are cheap. Not thread-safe; one per run.
class RouteCache {
public:
    RouteCache(const Topology& topology, CostMetric metric, std::size_t ecmp_max_paths = kDefaultEcmpMaxPaths);

    Route shortest_path(NodeId origin, NodeId destination);
    std::vector<Route> ecmp_paths(NodeId origin, NodeId destination);

    CostMetric metric() const noexcept { return metric_; }

private:
    const std::vector<std::int64_t>& distances_to(NodeId destination);

    const Topology& topology_;
    CostMetric metric_;
    std::size_t ecmp_max_paths_;
    std::vector<std::vector<std::int64_t>> tables_;
};

}  // namespace slasim
