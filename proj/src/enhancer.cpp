#include "slasim/enhancer.hpp"

#include <algorithm>

namespace slasim {

namespace {

std::optional<std::size_t> link_position(const Route& route, LinkKey link) {
    for (std::size_t i = 0; i + 1 < route.size(); ++i) {
        if (route[i] == link.src && route[i + 1] == link.dst) return i;
    }
    return std::nullopt;
}

std::optional<std::size_t> node_position(const Route& route, NodeId node) {
    auto it = std::find(route.begin(), route.end(), node);
    if (it == route.end()) return std::nullopt;
    return static_cast<std::size_t>(it - route.begin());
}

void add_unique(std::vector<LinkKey>& out, LinkKey link) {
    if (std::find(out.begin(), out.end(), link) == out.end()) out.push_back(link);
}

bool routes_valid(const std::vector<Route>& routes, NodeId from, NodeId to) {
    return std::all_of(routes.begin(), routes.end(),
                       [&](const Route& r) { return r.size() >= 2 && r.front() == from && r.back() == to; });
}

BreakPoint at_index(const Route& route, const RouteProgress& progress, std::size_t index) {
    return {route[index], progress.first_not_past(index), index};
}

}  // namespace

std::uint32_t RouteProgress::first_not_past(std::size_t index, std::uint32_t from) const {
    for (std::uint32_t seq = from; seq < length(); ++seq) {
        if (!passed(seq, index)) return seq;
    }
    return length();
}

std::uint32_t EnhancementAction::extra_copies_per_seq() const {
    const auto n = fanout();
    switch (mode) {
        case Mode::divert: return n - 1;
        case Mode::clone: return n;
        case Mode::replicate: return drop_original ? n - 1 : n;
    }
    return 0;
}

OverheadRecord overhead_record(std::uint64_t duplicates, std::uint32_t length, std::optional<SimTime> completion,
                               std::optional<SimTime> base_completion) {
    OverheadRecord rec;
    rec.duplicate_packet_fraction = length ? static_cast<double>(duplicates) / length : 0.0;
    if (completion && base_completion) rec.time_overhead = *completion - *base_completion;
    return rec;
}

std::vector<LinkKey> blamed_links(const Route& route, const FlowStatus& status, const Policy& policy) {
    std::vector<LinkKey> out;
    for (const auto& link : route_links(route)) {
        if (!status.is_blamed(link) && link_breaches_threshold(status, policy, link)) out.push_back(link);
    }
    return out;
}

BreakPoint mark_break_point(const Flow& flow, const FlowStatus& status, const Policy& policy,
                            const RouteProgress& progress, const TriggerDecision& decision) {
    const Route& route = flow.route;
    const std::size_t last_hop = route.size() - 2;

    // Pass 1: a clearly malfunctioning link on the route.
    for (std::size_t i = 0; i <= last_hop; ++i) {
        const LinkKey link{route[i], route[i + 1]};
        if (status.is_blamed(link) || !link_breaches_threshold(status, policy, link)) continue;
        if (policy.break_point_at == BreakPointAt::trigger_location && decision.fire) {
            if (auto at = node_position(route, decision.at_node); at && *at <= last_hop) {
                return at_index(route, progress, *at);
            }
        }
        return at_index(route, progress, i);
    }

    // Pass 2: statistical estimate.
    if (policy.break_policy == BreakPolicy::worst_link) {
        std::optional<std::size_t> worst;
        SimTime worst_transit = -1;
        for (std::size_t i = 0; i <= last_hop; ++i) {
            const auto* obs = status.observation({route[i], route[i + 1]});
            if (obs && obs->max > worst_transit) {
                worst_transit = obs->max;
                worst = i;
            }
        }
        return at_index(route, progress, worst.value_or(0));
    }

    std::vector<std::uint32_t> undelivered;
    for (std::uint32_t seq = 0; seq < progress.length(); ++seq) {
        if (!status.delivered().has(seq)) undelivered.push_back(seq);
    }
    if (undelivered.empty()) return at_index(route, progress, 0);
    const std::uint32_t median = undelivered[(undelivered.size() - 1) / 2];
    return at_index(route, progress, std::min(progress.next_index(median), last_hop));
}

NodeId find_clone_destination(const Flow& flow, std::span<const LinkKey> blamed) {
    if (blamed.empty()) return flow.destination;
    std::vector<std::size_t> positions;
    for (const auto& link : blamed) {
        auto pos = link_position(flow.route, link);
        if (!pos) throw SimError("blamed link " + to_string(link) + " is not on the route of flow " +
                                 std::to_string(flow.id.value));
        positions.push_back(*pos);
    }
    std::sort(positions.begin(), positions.end());
    positions.erase(std::unique(positions.begin(), positions.end()), positions.end());
    for (std::size_t i = 1; i < positions.size(); ++i) {
        if (positions[i] != positions[i - 1] + 1) return flow.destination;
    }
    return flow.route[positions.back() + 1];
}

std::optional<EnhancementAction> apply_divert(const Flow& flow, const BreakPoint& bp, std::vector<Route> routes,
                                              NodeId clone_destination) {
    if (routes.empty()) return std::nullopt;
    if (!routes_valid(routes, bp.node, clone_destination)) {
        throw SimError("divert routes of flow " + std::to_string(flow.id.value) + " must run break point -> clone destination");
    }
    EnhancementAction a;
    a.mode = Mode::divert;
    a.break_point = bp;
    a.routes = std::move(routes);
    a.clone_destination = clone_destination;
    return a;
}

std::optional<EnhancementAction> apply_clone(const Flow& flow, const BreakPoint& bp, std::vector<Route> routes,
                                             NodeId clone_destination) {
    auto a = apply_divert(flow, bp, std::move(routes), clone_destination);
    if (a) a->mode = Mode::clone;
    return a;
}

std::optional<EnhancementAction> apply_replicate(const Flow& flow, std::vector<Route> routes, bool drop_original) {
    if (routes.empty()) return std::nullopt;
    if (!routes_valid(routes, flow.origin, flow.destination)) {
        throw SimError("replicate routes of flow " + std::to_string(flow.id.value) + " must run origin -> destination");
    }
    EnhancementAction a;
    a.mode = Mode::replicate;
    a.routes = std::move(routes);
    a.clone_destination = flow.destination;
    a.drop_original = drop_original;
    if (drop_original) a.break_point = BreakPoint{flow.origin, 0, 0};
    return a;
}

EnhancementPlan plan_enhancement(const Flow& flow, const FlowStatus& status, const Policy& policy,
                                 const Topology& topology, const RouteProgress& progress,
                                 const TriggerDecision& decision, CostMetric metric,
                                 std::span<const LinkKey> known_slow) {
    EnhancementPlan plan;
    plan.newly_blamed = blamed_links(flow.route, status, policy);

    std::vector<LinkKey> avoid = status.blamed;
    for (const auto& l : plan.newly_blamed) add_unique(avoid, l);
    if (decision.link) add_unique(avoid, *decision.link);
    const bool own_evidence = !avoid.empty();
    for (const auto& l : known_slow) add_unique(avoid, l);

    if (policy.mode == Mode::replicate) {
        plan.clone_destination = flow.destination;
        plan.excluded = avoid;
        if (!own_evidence) {
            for (const auto& l : route_links(flow.route)) add_unique(plan.excluded, l);
        }
        auto routes = alternative_routes(topology, flow.origin, flow.destination, plan.excluded, policy.fanout, metric);
        plan.action = apply_replicate(flow, std::move(routes), policy.replicate_drop_original);
        return plan;
    }

    const BreakPoint bp = mark_break_point(flow, status, policy, progress, decision);
    plan.break_point = bp;
    if (bp.packet_seq >= progress.length()) return plan;  // every packet is already past the break node
    plan.clone_destination = find_clone_destination(flow, plan.newly_blamed);
    if (auto cd = node_position(flow.route, plan.clone_destination); !cd || *cd <= bp.route_index) {
        plan.clone_destination = flow.destination;
    }
    plan.excluded = avoid;
    add_unique(plan.excluded, LinkKey{flow.route[bp.route_index], flow.route[bp.route_index + 1]});

    auto routes = alternative_routes(topology, bp.node, plan.clone_destination, plan.excluded, policy.fanout, metric);
    plan.action = policy.mode == Mode::divert ? apply_divert(flow, bp, std::move(routes), plan.clone_destination)
                                              : apply_clone(flow, bp, std::move(routes), plan.clone_destination);
    if (plan.action) plan.action->excluded = plan.excluded;
    return plan;
}

DispatchDecision adaptive_dispatch(const Flow& next_flow, const PathViolationRegistry& registry, const Policy& policy,
                                   const Topology& topology, CostMetric metric, SimTime now) {
    DispatchDecision d;
    if (!policy.adaptive_replicate_following || !policy.is_priority()) return d;
    const auto* entry = registry.match(next_flow.origin, next_flow.destination, next_flow.route, now);
    if (!entry) return d;
    auto routes =
        alternative_routes(topology, next_flow.origin, next_flow.destination, entry->avoid, policy.fanout, metric);
    d.action = apply_replicate(next_flow, std::move(routes), policy.replicate_drop_original);
    if (d.action) {
        d.action->excluded = entry->avoid;
        d.replicate_at_origin = true;
    }
    return d;
}

SimTime controller_latency_model(const EnhancementAction&, const ControllerModel& model) { return model.rule_latency; }

}  // namespace slasim
