#include "slasim/flow.hpp"

#include <algorithm>

#include "slasim/policy.hpp"

namespace slasim {

FlowId FlowLineage::parent_of(FlowId id) const {
    auto it = parent_.find(id.value);
    return it == parent_.end() ? id : FlowId{it->second};
}

FlowId FlowLineage::root_of(FlowId id) const {
    // Parent links always point to older ids, so the chain terminates.
    for (auto it = parent_.find(id.value); it != parent_.end(); it = parent_.find(id.value)) {
        id = FlowId{it->second};
    }
    return id;
}

void tag_flow(Flow& flow, const Policy& policy, SimTime now) {
    if (flow.released) throw SimError("tag_flow: flow " + std::to_string(flow.id.value) + " already released");
    Tag tag;
    tag.priority = policy.priority;
    tag.hard_limit = policy.hard_limit;
    tag.soft_fraction = policy.soft_fraction;
    tag.origin_timestamp = now;
    if (flow.tag) tag.parent_flow = flow.tag->parent_flow;
    flow.tag = tag;
}

std::vector<Packet> packets_of(const Flow& flow) {
    std::vector<Packet> out;
    out.reserve(flow.packet_count());
    for (std::uint32_t seq = flow.first_seq; seq < flow.length; ++seq) {
        Packet p;
        p.flow = flow.id;
        p.seq = seq;
        p.lineage = flow.lineage;
        p.tag = flow.tag.value_or(Tag{});
        p.size_bytes = flow.packet_size;
        out.push_back(p);
    }
    return out;
}

Flow make_subflow(const Flow& flow, std::uint32_t from_seq, Lineage lineage, FlowIdAllocator& ids,
                  FlowLineage* lineage_map) {
    if (from_seq >= flow.length || from_seq < flow.first_seq) {
        throw SimError("make_subflow: from_seq " + std::to_string(from_seq) + " outside [" +
                       std::to_string(flow.first_seq) + ", " + std::to_string(flow.length) + ")");
    }
    Flow sub = flow;
    sub.id = ids.next();
    sub.first_seq = from_seq;
    sub.lineage = lineage;
    Tag tag = flow.tag.value_or(Tag{});
    tag.parent_flow = flow.id;
    sub.tag = tag;
    if (lineage_map) lineage_map->record(sub.id, flow.id);
    return sub;
}

ReassemblyBuffer::ReassemblyBuffer(FlowId root, std::uint32_t expected_length)
    : root_(root), expected_(expected_length), arrival_(expected_length, kNever), lineage_(expected_length) {}

AcceptResult ReassemblyBuffer::accept(const Packet& packet, SimTime now, const FlowLineage& lineage) {
    if (lineage.root_of(packet.flow) != root_) {
        throw ProtocolError("packet of flow " + std::to_string(packet.flow.value) + " does not belong to flow " +
                            std::to_string(root_.value));
    }
    return accept(packet.seq, packet.lineage, now);
}

AcceptResult ReassemblyBuffer::accept(std::uint32_t seq, Lineage lineage, SimTime now) {
    if (seq >= expected_) {
        throw ProtocolError("seq " + std::to_string(seq) + " beyond flow length " + std::to_string(expected_));
    }
    if (arrival_[seq] != kNever) {
        ++duplicates_;
        return AcceptResult::duplicate_dropped;
    }
    arrival_[seq] = now;
    lineage_[seq] = lineage;
    ++received_;
    if (received_ == expected_) {
        completion_ = now;
        return AcceptResult::completed;
    }
    return AcceptResult::stored;
}

std::optional<SimTime> ReassemblyBuffer::arrival(std::uint32_t seq) const {
    if (!has(seq)) return std::nullopt;
    return arrival_[seq];
}

std::uint32_t ReassemblyBuffer::first_missing() const {
    while (first_missing_hint_ < expected_ && arrival_[first_missing_hint_] != kNever) ++first_missing_hint_;
    return first_missing_hint_;
}

FlowStatus::FlowStatus(FlowId root, std::uint32_t length, SimTime release_time)
    : release_(release_time), delivered_(root, length) {}

void FlowStatus::observe_transit(LinkKey link, SimTime transit, NodeId at_node, std::uint32_t seq) {
    Probe probe{link, transit, at_node, seq, mean_transit(), obs_count_};
    auto it = std::find_if(per_link_.begin(), per_link_.end(), [&](const auto& o) { return o.link == link; });
    if (it == per_link_.end()) {
        per_link_.push_back({link});
        it = std::prev(per_link_.end());
    }
    ++it->count;
    it->total += transit;
    it->max = std::max(it->max, transit);
    ++obs_count_;
    obs_total_ += transit;
    last_probe_ = probe;
}

const LinkObservation* FlowStatus::observation(LinkKey link) const {
    auto it = std::find_if(per_link_.begin(), per_link_.end(), [&](const auto& o) { return o.link == link; });
    return it == per_link_.end() ? nullptr : &*it;
}

double FlowStatus::mean_transit() const {
    return obs_count_ ? static_cast<double>(obs_total_) / static_cast<double>(obs_count_) : 0.0;
}

std::optional<double> FlowStatus::mean_transit_excluding(LinkKey link) const {
    std::uint64_t count = obs_count_;
    SimTime total = obs_total_;
    if (const auto* o = observation(link)) {
        count -= o->count;
        total -= o->total;
    }
    if (count == 0) return std::nullopt;
    return static_cast<double>(total) / static_cast<double>(count);
}

bool FlowStatus::is_blamed(LinkKey link) const {
    return std::find(blamed.begin(), blamed.end(), link) != blamed.end();
}

MergedFlow merge_flows(const FlowStatus& original_status, const ReassemblyBuffer& clone_buffer) {
    const auto& originals = original_status.delivered();
    if (clone_buffer.expected_length() != originals.expected_length() || clone_buffer.root() != originals.root()) {
        throw ProtocolError("merge_flows: clone buffer belongs to a different flow");
    }
    const std::uint32_t length = originals.expected_length();
    MergedFlow merged;
    merged.seqs.reserve(length);
    merged.source.reserve(length);
    merged.duplicates = originals.duplicates() + clone_buffer.duplicates();
    merged.identity = true;
    std::vector<std::uint32_t> missing;
    for (std::uint32_t seq = 0; seq < length; ++seq) {
        auto a = originals.arrival(seq);
        auto b = clone_buffer.arrival(seq);
        if (!a && !b) {
            missing.push_back(seq);
            continue;
        }
        if (a && b) ++merged.duplicates;
        const bool take_clone = b && (!a || *b < *a);
        const SimTime t = take_clone ? *b : *a;
        merged.seqs.push_back(seq);
        merged.source.push_back(take_clone ? clone_buffer.lineage_of(seq) : originals.lineage_of(seq));
        if (!merged.source.back().is_original()) merged.identity = false;
        merged.reconstruction_time = std::max(merged.reconstruction_time, t);
    }
    if (!missing.empty()) {
        throw IncompleteFlowError("merge_flows: " + std::to_string(missing.size()) + " seq(s) missing, first " +
                                  std::to_string(missing.front()));
    }
    return merged;
}

bool flow_all_received(const ReassemblyBuffer& buffer) { return buffer.all_received(); }

}  // namespace slasim
