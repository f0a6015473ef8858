#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "slasim/flow.hpp"
#include "slasim/policy.hpp"
#include "slasim/routing.hpp"
#include "slasim/topology.hpp"

namespace slasim {

/// Node and first packet from which a subflow is split. Transient: it only
/// lives while the enhancement action is being built.
struct BreakPoint {
    NodeId node = 0;
    std::uint32_t packet_seq = 0;
    std::size_t route_index = 0;  // position of `node` on the flow's route
    friend bool operator==(const BreakPoint&, const BreakPoint&) = default;
};

/// Progress of each original packet along the base route, encoded as
/// 2*i while the packet sits at node i and 2*i+1 once it has left node i.
class RouteProgress {
public:
    RouteProgress(const Route& route, std::span<const std::uint32_t> position) : route_(route), position_(position) {}

    const Route& route() const noexcept { return route_; }
    std::uint32_t length() const noexcept { return static_cast<std::uint32_t>(position_.size()); }
    bool passed(std::uint32_t seq, std::size_t index) const { return position_[seq] > 2 * index; }
    /// Route index of the node the packet is at or will reach next.
    std::size_t next_index(std::uint32_t seq) const { return (position_[seq] + 1) / 2; }
    /// First seq >= from that has not left route node `index`; length() if none.
    std::uint32_t first_not_past(std::size_t index, std::uint32_t from = 0) const;

    static std::uint32_t at_node(std::size_t index) { return static_cast<std::uint32_t>(2 * index); }
    static std::uint32_t left_node(std::size_t index) { return static_cast<std::uint32_t>(2 * index + 1); }

private:
    const Route& route_;
    std::span<const std::uint32_t> position_;
};

struct EnhancementAction {
    Mode mode = Mode::clone;
    std::optional<BreakPoint> break_point;  // absent for replicate
    std::vector<Route> routes;              // the n alternatives
    NodeId clone_destination = 0;
    bool drop_original = false;  // replicate variant that stops the original
    std::vector<LinkKey> excluded;

    std::uint32_t fanout() const { return static_cast<std::uint32_t>(routes.size()); }
    /// Redundant copies created per affected seq.
    std::uint32_t extra_copies_per_seq() const;
    /// Duplicate count when `affected_seqs` sequence numbers received the rule.
    std::uint64_t expected_duplicates(std::uint64_t affected_seqs) const {
        return static_cast<std::uint64_t>(extra_copies_per_seq()) * affected_seqs;
    }
};

struct OverheadRecord {
    double duplicate_packet_fraction = 0.0;
    std::optional<SimTime> time_overhead;  // vs the paired base run, when known
};

OverheadRecord overhead_record(std::uint64_t duplicates, std::uint32_t length, std::optional<SimTime> completion,
                               std::optional<SimTime> base_completion);

/// Route links that breach the per-link threshold and were not blamed in an
/// earlier round, in route order.
std::vector<LinkKey> blamed_links(const Route& route, const FlowStatus& status, const Policy& policy);

/// Pass 1: upstream node of the first newly breaching route link. Pass 2:
/// statistical estimate chosen by the policy's break policy.
BreakPoint mark_break_point(const Flow& flow, const FlowStatus& status, const Policy& policy,
                            const RouteProgress& progress, const TriggerDecision& decision);

/// Node right after the last blamed link when the blamed links form one
/// contiguous stretch of the route; otherwise the flow's destination.
NodeId find_clone_destination(const Flow& flow, std::span<const LinkKey> blamed);

std::optional<EnhancementAction> apply_divert(const Flow& flow, const BreakPoint& bp, std::vector<Route> routes,
                                              NodeId clone_destination);
std::optional<EnhancementAction> apply_clone(const Flow& flow, const BreakPoint& bp, std::vector<Route> routes,
                                             NodeId clone_destination);
std::optional<EnhancementAction> apply_replicate(const Flow& flow, std::vector<Route> routes,
                                                 bool drop_original = false);

/// Everything the controller decides when a trigger fires. Alternatives
/// avoid the flow's blamed links plus `known_slow`, the links the controller
/// has seen blamed by any flow.
struct EnhancementPlan {
    std::vector<LinkKey> newly_blamed;
    std::optional<BreakPoint> break_point;
    NodeId clone_destination = 0;
    std::vector<LinkKey> excluded;
    std::optional<EnhancementAction> action;  // nullopt: no alternative route
};

EnhancementPlan plan_enhancement(const Flow& flow, const FlowStatus& status, const Policy& policy,
                                 const Topology& topology, const RouteProgress& progress,
                                 const TriggerDecision& decision, CostMetric metric,
                                 std::span<const LinkKey> known_slow = {});

struct DispatchDecision {
    bool replicate_at_origin = false;
    std::optional<EnhancementAction> action;
};

/// Replicates a flow at release when its base route already reported a
/// violation; otherwise releases it untouched.
DispatchDecision adaptive_dispatch(const Flow& next_flow, const PathViolationRegistry& registry, const Policy& policy,
                                   const Topology& topology, CostMetric metric, SimTime now);

struct ControllerModel {
    SimTime rule_latency = from_ms(100);
};

SimTime controller_latency_model(const EnhancementAction& action, const ControllerModel& model);

}  // namespace slasim
