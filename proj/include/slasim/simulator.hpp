#pragma once

#include <cstdint>
#include <deque>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "slasim/enhancer.hpp"
#include "slasim/flow.hpp"
#include "slasim/policy.hpp"
#include "slasim/routing.hpp"
#include "slasim/topology.hpp"

namespace slasim {

enum class BaseAlgorithm { shortest_path, ecmp };

struct EngineConfig {
    BaseAlgorithm base = BaseAlgorithm::shortest_path;
    CostMetric cost = CostMetric::hop_count;
    std::size_t ecmp_max_paths = kDefaultEcmpMaxPaths;
    bool enhance = true;
    SimTime controller_latency = from_ms(100);
    std::optional<SimTime> horizon;
    std::uint32_t max_rounds = 2;
    std::optional<SimTime> registry_ttl;
};

/// One root flow to inject.
struct FlowSpec {
    FlowId id;
    NodeId origin = 0;
    NodeId destination = 0;
    std::uint32_t length = 1;
    SimTime release = 0;
    SimTime send_interval = 0;  // gap between consecutive packet emissions
    std::size_t policy = 0;     // index into the policy list
};

/// Per-link, per-class FIFO. A packet starting transmission at `entry`
/// arrives at entry + effective latency (never before the previous packet
/// on the same channel) and frees the link after the service interval.
struct LinkChannel {
    SimTime next_free = 0;
    SimTime last_arrival = 0;
};

struct Transmission {
    SimTime entry = 0;
    SimTime arrival = 0;
};

Transmission transit_packet(const Topology& topology, std::size_t link, LinkChannel& channel, SimTime now);

/// What the controller did for one trigger or dispatch.
struct ActionSummary {
    Mode mode = Mode::clone;
    TriggerReason reason = TriggerReason::none;
    bool at_release = false;  // adaptive replication, no trigger involved
    bool drop_original = false;
    std::uint32_t fanout = 0;
    SimTime trigger_time = 0;
    SimTime activation_time = 0;
    std::optional<BreakPoint> break_point;
    NodeId clone_destination = 0;
    std::vector<Route> routes;
    std::vector<LinkKey> blamed;
    FlowId subflow;
    std::uint32_t first_affected_seq = 0;
    std::uint32_t affected_seqs = 0;  // seqs that received the rule
    std::uint64_t extra_copies = 0;   // redundant copies created
    std::optional<SimTime> merged_at; // all affected seqs seen at the clone destination
    bool activated = false;
};

struct MetricsRecord {
    FlowId flow_id;
    Priority priority = Priority::normal;
    std::string policy;
    Route base_route;
    std::uint32_t length = 0;
    SimTime released = 0;
    std::optional<SimTime> completed;
    bool sla_violated = false;
    std::uint32_t triggers = 0;
    std::optional<SimTime> first_trigger;  // registers the route when adaptive
    std::uint32_t unactionable_triggers = 0;
    std::uint64_t duplicates = 0;
    std::uint32_t controller_events = 0;
    std::vector<ActionSummary> actions;

    std::optional<SimTime> routing_time() const {
        if (!completed) return std::nullopt;
        return *completed - released;
    }
    double duplicate_fraction() const { return length ? static_cast<double>(duplicates) / length : 0.0; }
    /// "none", or the applied modes joined with '+'.
    std::string mode() const;
};

struct RunSummary {
    std::uint64_t flows_total = 0;
    std::uint64_t priority_flows = 0;
    std::uint64_t completed_flows = 0;
    std::uint64_t violations_priority = 0;
    std::uint64_t violations_normal = 0;
    double violation_rate = 0.0;  // over priority flows
    double routing_ms_mean = 0.0;
    double routing_ms_median = 0.0;
    double routing_ms_p99 = 0.0;
    double total_duplicate_fraction = 0.0;
    std::uint64_t triggers = 0;
    std::uint64_t unactionable_triggers = 0;
    std::uint64_t controller_events = 0;
    std::uint64_t enhanced_flows = 0;
};

struct SimStats {
    std::uint64_t events = 0;
    std::uint64_t packets_created = 0;
    std::uint64_t packets_delivered = 0;  // retained at the destination
    std::uint64_t packets_dropped = 0;    // dropped as duplicates anywhere
    std::uint64_t packets_in_flight = 0;  // left over at the horizon
    std::uint64_t break_point_lookups_after_merge = 0;
    SimTime end_time = 0;
    std::uint64_t trace_digest = 0;  // hash over the processed event sequence
};

struct RunResult {
    std::vector<MetricsRecord> records;
    RunSummary summary;
    SimStats stats;
};

/// Deterministic packet-level event loop. One instance runs once.
class Simulator {
public:
    Simulator(const Topology& topology, std::vector<Policy> policies, std::vector<FlowSpec> flows, EngineConfig engine);
    ~Simulator();
    Simulator(const Simulator&) = delete;
    Simulator& operator=(const Simulator&) = delete;

    RunResult run();

    /// Base route assignment under the engine's base algorithm (congestion
    /// oblivious). Exposed so scenario builders can place congestion.
    static Route base_route(RouteCache& cache, BaseAlgorithm base, const FlowSpec& flow);

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

RunSummary summarize(const std::vector<MetricsRecord>& records);

/// Per-flow CSV: flow_id,priority,mode,released_ms,completed_ms,routing_ms,
/// sla_violated,triggers,duplicates,duplicate_fraction
std::string records_to_csv(const std::vector<MetricsRecord>& records);

/// "key = value" lines.
std::string summary_to_text(const RunSummary& summary);

struct FlowOutcome {
    MetricsRecord record;
    OverheadRecord overhead;  // time overhead against the same flow without enhancement
};

/// One flow end to end under the base algorithm with the enhancer wrapped
/// around it, on an otherwise idle network.
FlowOutcome smart_route(const Topology& topology, const FlowSpec& flow, const Policy& policy,
                        const EngineConfig& engine);

}  // namespace slasim
