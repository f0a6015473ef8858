#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "slasim/types.hpp"

namespace slasim {

struct Policy;

enum class Priority : std::uint8_t { normal, priority };

enum class LineageKind : std::uint8_t { original, clone, replica };

/// Where a packet copy came from. Copies carry copy_index >= 1.
struct Lineage {
    LineageKind kind = LineageKind::original;
    std::uint32_t copy_index = 0;

    static Lineage original() { return {}; }
    static Lineage clone(std::uint32_t i) { return {LineageKind::clone, i}; }
    static Lineage replica(std::uint32_t i) { return {LineageKind::replica, i}; }
    bool is_original() const { return kind == LineageKind::original; }
    friend bool operator==(const Lineage&, const Lineage&) = default;
};

/// SLA metadata attached at the origin node.
struct Tag {
    Priority priority = Priority::normal;
    SimTime hard_limit = 0;
    double soft_fraction = 0.5;
    SimTime origin_timestamp = 0;
    std::optional<FlowId> parent_flow;
    friend bool operator==(const Tag&, const Tag&) = default;
};

struct Packet {
    FlowId flow;
    std::uint32_t seq = 0;
    Lineage lineage;
    Tag tag;
    std::uint32_t size_bytes = 1500;
};

/// A flow, or a subflow covering seqs [first_seq, length).
struct Flow {
    FlowId id;
    NodeId origin = 0;
    NodeId destination = 0;
    std::uint32_t length = 1;
    std::uint32_t first_seq = 0;
    std::string policy;
    Route route;
    SimTime release_time = 0;
    Lineage lineage;
    std::optional<Tag> tag;
    bool released = false;
    std::uint32_t packet_size = 1500;

    std::uint32_t packet_count() const { return length - first_seq; }
};

/// Hands out fresh flow ids; subflow ids continue after the root ids.
class FlowIdAllocator {
public:
    explicit FlowIdAllocator(std::uint64_t next = 0) : next_(next) {}
    FlowId next() { return FlowId{next_++}; }

private:
    std::uint64_t next_;
};

/// Child-to-parent map used to resolve a packet's root flow.
class FlowLineage {
public:
    void record(FlowId child, FlowId parent) { parent_[child.value] = parent.value; }
    FlowId parent_of(FlowId id) const;
    FlowId root_of(FlowId id) const;

private:
    std::unordered_map<std::uint64_t, std::uint64_t> parent_;
};

/// Tags every packet of an unreleased flow from the policy. Idempotent.
void tag_flow(Flow& flow, const Policy& policy, SimTime now);

/// The tagged packets of a flow (or subflow) in sequence order.
std::vector<Packet> packets_of(const Flow& flow);

/// Subflow of `flow` starting at `from_seq`, with a fresh id and the parent
/// recorded in its tag. Sequence numbers are preserved.
Flow make_subflow(const Flow& flow, std::uint32_t from_seq, Lineage lineage, FlowIdAllocator& ids,
                  FlowLineage* lineage_map = nullptr);

enum class AcceptResult { stored, duplicate_dropped, completed };

/// Per-destination reassembly keyed by (root flow, seq). The first arrival
/// of each seq is retained; later arrivals are counted and dropped.
class ReassemblyBuffer {
public:
    ReassemblyBuffer(FlowId root, std::uint32_t expected_length);

    /// Throws ProtocolError when the packet's root is a different flow.
    AcceptResult accept(const Packet& packet, SimTime now, const FlowLineage& lineage);
    /// Fast path for callers that already resolved the root flow.
    AcceptResult accept(std::uint32_t seq, Lineage lineage, SimTime now);

    bool all_received() const noexcept { return received_ == expected_; }
    bool has(std::uint32_t seq) const { return seq < expected_ && arrival_[seq] != kNever; }
    std::optional<SimTime> arrival(std::uint32_t seq) const;
    Lineage lineage_of(std::uint32_t seq) const { return lineage_.at(seq); }

    FlowId root() const noexcept { return root_; }
    std::uint32_t expected_length() const noexcept { return expected_; }
    std::uint32_t received_count() const noexcept { return received_; }
    std::uint64_t duplicates() const noexcept { return duplicates_; }
    std::uint64_t arrivals() const noexcept { return received_ + duplicates_; }
    std::optional<SimTime> completion_time() const { return completion_; }
    /// Lowest seq without a stored record, or expected_length when complete.
    std::uint32_t first_missing() const;

private:
    FlowId root_;
    std::uint32_t expected_;
    std::uint32_t received_ = 0;
    std::uint64_t duplicates_ = 0;
    mutable std::uint32_t first_missing_hint_ = 0;
    std::vector<SimTime> arrival_;
    std::vector<Lineage> lineage_;
    std::optional<SimTime> completion_;
};

/// Packet-level progress of a flow as seen by the controller.
struct LinkObservation {
    LinkKey link;
    std::uint64_t count = 0;
    SimTime total = 0;
    SimTime max = 0;
    double mean() const { return count ? static_cast<double>(total) / static_cast<double>(count) : 0.0; }
};

class FlowStatus {
public:
    FlowStatus(FlowId root, std::uint32_t length, SimTime release_time);

    SimTime release_time() const noexcept { return release_; }
    SimTime elapsed(SimTime now) const { return now - release_; }

    ReassemblyBuffer& delivered() noexcept { return delivered_; }
    const ReassemblyBuffer& delivered() const noexcept { return delivered_; }
    bool complete() const noexcept { return delivered_.all_received(); }

    /// Records one link traversal and remembers it as the latest probe.
    void observe_transit(LinkKey link, SimTime transit, NodeId at_node, std::uint32_t seq);

    const std::vector<LinkObservation>& per_link() const noexcept { return per_link_; }
    const LinkObservation* observation(LinkKey link) const;
    std::uint64_t observation_count() const noexcept { return obs_count_; }
    double mean_transit() const;
    /// Mean over every observation not taken on `link`; nullopt if none.
    std::optional<double> mean_transit_excluding(LinkKey link) const;

    struct Probe {
        LinkKey link;
        SimTime transit = 0;
        NodeId at_node = 0;
        std::uint32_t seq = 0;
        double prior_mean = 0.0;
        std::uint64_t prior_count = 0;
    };
    const std::optional<Probe>& last_probe() const noexcept { return last_probe_; }
    void clear_probe() { last_probe_.reset(); }

    // Trigger bookkeeping; one trigger per round, soft limit fires once.
    std::uint32_t rounds_fired = 0;
    std::uint32_t round_cap = 2;
    bool soft_fired = false;
    std::vector<LinkKey> blamed;
    /// Location of the lowest undelivered packet, for soft-limit triggers.
    NodeId lead_node = 0;

    bool is_blamed(LinkKey link) const;

private:
    SimTime release_;
    ReassemblyBuffer delivered_;
    std::vector<LinkObservation> per_link_;
    std::uint64_t obs_count_ = 0;
    SimTime obs_total_ = 0;
    std::optional<Probe> last_probe_;
};

/// Reconstruction of a flow from its original arrivals and a clone buffer.
struct MergedFlow {
    std::vector<std::uint32_t> seqs;  // in order, each exactly once
    std::vector<Lineage> source;      // lineage of the retained copy per seq
    SimTime reconstruction_time = 0;  // arrival of the completing packet
    std::uint64_t duplicates = 0;
    bool identity = false;  // every retained packet is an original
};

/// Earliest arrival per seq wins. Throws IncompleteFlowError on gaps.
MergedFlow merge_flows(const FlowStatus& original_status, const ReassemblyBuffer& clone_buffer);

bool flow_all_received(const ReassemblyBuffer& buffer);

}  // namespace slasim
