#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "slasim/types.hpp"

namespace slasim {

inline constexpr SimTime kDefaultLinkLatency = 1000;  // 1 ms
inline constexpr double kDefaultLinkCapacity = 1.0;   // packets per ms

struct Link {
    NodeId src = 0;
    NodeId dst = 0;
    SimTime base_latency = kDefaultLinkLatency;
    double capacity = kDefaultLinkCapacity;  // packets per millisecond

    LinkKey key() const { return {src, dst}; }
};

/// Slows a set of links by a constant factor during [start, end).
struct CongestionEvent {
    std::vector<LinkKey> links;
    double slowdown = 2.0;
    SimTime start = 0;
    SimTime end = kNever;
};

struct SwdcParams {
    std::uint32_t grid_width = 0;
    std::uint32_t grid_height = 0;
    std::uint32_t shortcuts_per_node = 0;
    std::uint64_t rng_seed = 0;
    SimTime base_latency = kDefaultLinkLatency;
    double capacity = kDefaultLinkCapacity;
};

/// Directed graph of capacitated links with time-varying slowdowns.
///
/// Structure is fixed once a run starts; congestion queries are pure
/// functions of time so concurrent readers are safe.
class Topology {
public:
    explicit Topology(std::size_t node_count);

    std::size_t node_count() const noexcept { return out_.size(); }
    std::size_t link_count() const noexcept { return links_.size(); }

    /// Adds one directed link and returns its index. Rejects self loops,
    /// duplicate (src, dst) pairs and non-positive latency or capacity.
    std::size_t add_link(NodeId src, NodeId dst, SimTime base_latency = kDefaultLinkLatency,
                         double capacity = kDefaultLinkCapacity);

    /// Adds both directions with shared parameters. An existing direction is
    /// left untouched.
    void add_bidirectional(NodeId a, NodeId b, SimTime base_latency = kDefaultLinkLatency,
                           double capacity = kDefaultLinkCapacity);

    std::optional<std::size_t> find_link(NodeId src, NodeId dst) const;
    bool has_link(NodeId src, NodeId dst) const { return find_link(src, dst).has_value(); }

    /// Throws ConfigError naming the link when it does not exist.
    std::size_t link_index(LinkKey key) const;

    const Link& link(std::size_t index) const { return links_.at(index); }
    std::span<const Link> links() const noexcept { return links_; }

    /// Outgoing link indices of a node, ordered by destination id.
    std::span<const std::size_t> out_links(NodeId node) const { return out_.at(node); }
    /// Incoming link indices of a node, ordered by source id.
    std::span<const std::size_t> in_links(NodeId node) const { return in_.at(node); }

    void inject_congestion(const CongestionEvent& event);
    const std::vector<CongestionEvent>& congestion_events() const noexcept { return events_; }
    void clear_congestion();

    /// Product of all slowdowns active at `at` on the link (1 when idle).
    double slowdown(std::size_t link, SimTime at) const;

    SimTime effective_latency(std::size_t link, SimTime at) const;
    SimTime effective_latency(LinkKey link, SimTime at) const {
        return effective_latency(link_index(link), at);
    }

    /// Gap between consecutive departures on the link for a packet that
    /// starts transmission at `at`.
    SimTime service_interval(std::size_t link, SimTime at) const;

    /// BFS from node 0 on the forward and reverse graph.
    bool strongly_connected() const;

private:
    struct Window {
        SimTime start;
        SimTime end;
        double slowdown;
    };

    void check_node(NodeId node) const;

    std::vector<Link> links_;
    std::vector<std::vector<std::size_t>> out_;
    std::vector<std::vector<std::size_t>> in_;
    std::vector<std::vector<Window>> windows_;
    std::vector<CongestionEvent> events_;
};

/// Small-world data-center topology: a 2D torus lattice plus
/// `shortcuts_per_node` random long-range bidirectional links per node.
Topology generate_swdc(const SwdcParams& params);

}  // namespace slasim
