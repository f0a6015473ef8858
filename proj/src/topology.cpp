#include "slasim/topology.hpp"

#include <algorithm>
#include <cstdio>
#include <deque>
#include <random>
#include <sstream>

namespace slasim {

std::string format_ms(SimTime t) {
    const bool negative = t < 0;
    const auto magnitude = static_cast<std::uint64_t>(negative ? -(t + 1) + 1 : t);
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%s%llu.%03llu", negative ? "-" : "",
                  static_cast<unsigned long long>(magnitude / 1000),
                  static_cast<unsigned long long>(magnitude % 1000));
    return buf;
}

std::string to_string(const LinkKey& link) {
    return "(" + std::to_string(link.src) + "," + std::to_string(link.dst) + ")";
}

std::string to_string(const Route& route) {
    std::string out;
    for (std::size_t i = 0; i < route.size(); ++i) {
        if (i) out += '-';
        out += std::to_string(route[i]);
    }
    return out;
}

namespace {
std::string join_errors(const std::vector<std::string>& errors) {
    std::ostringstream os;
    os << errors.size() << " validation error(s)";
    for (const auto& e : errors) os << "\n  " << e;
    return os.str();
}
}  // namespace

ValidationError::ValidationError(std::vector<std::string> errors)
    : ConfigError(join_errors(errors)), errors_(std::move(errors)) {}

Topology::Topology(std::size_t node_count) : out_(node_count), in_(node_count) {}

void Topology::check_node(NodeId node) const {
    if (node >= out_.size()) {
        throw ConfigError("node " + std::to_string(node) + " out of range (node_count " +
                          std::to_string(out_.size()) + ")");
    }
}

std::size_t Topology::add_link(NodeId src, NodeId dst, SimTime base_latency, double capacity) {
    check_node(src);
    check_node(dst);
    if (src == dst) throw ConfigError("self loop on node " + std::to_string(src));
    if (base_latency <= 0) throw ConfigError("link " + to_string(LinkKey{src, dst}) + ": base latency must be > 0");
    if (!(capacity > 0.0)) throw ConfigError("link " + to_string(LinkKey{src, dst}) + ": capacity must be > 0");
    if (has_link(src, dst)) throw ConfigError("duplicate link " + to_string(LinkKey{src, dst}));

    const std::size_t index = links_.size();
    links_.push_back({src, dst, base_latency, capacity});
    windows_.emplace_back();

    auto& out = out_[src];
    out.insert(std::upper_bound(out.begin(), out.end(), dst,
                                [this](NodeId d, std::size_t l) { return d < links_[l].dst; }),
               index);
    auto& in = in_[dst];
    in.insert(std::upper_bound(in.begin(), in.end(), src,
                               [this](NodeId s, std::size_t l) { return s < links_[l].src; }),
              index);
    return index;
}

void Topology::add_bidirectional(NodeId a, NodeId b, SimTime base_latency, double capacity) {
    if (!has_link(a, b)) add_link(a, b, base_latency, capacity);
    if (!has_link(b, a)) add_link(b, a, base_latency, capacity);
}

std::optional<std::size_t> Topology::find_link(NodeId src, NodeId dst) const {
    if (src >= out_.size()) return std::nullopt;
    const auto& out = out_[src];
    auto it = std::lower_bound(out.begin(), out.end(), dst,
                               [this](std::size_t l, NodeId d) { return links_[l].dst < d; });
    if (it != out.end() && links_[*it].dst == dst) return *it;
    return std::nullopt;
}

std::size_t Topology::link_index(LinkKey key) const {
    if (auto found = find_link(key.src, key.dst)) return *found;
    throw ConfigError("unknown link " + to_string(key));
}

void Topology::inject_congestion(const CongestionEvent& event) {
    if (!(event.slowdown > 1.0)) {
        throw ConfigError("congestion slowdown must be > 1 (got " + std::to_string(event.slowdown) + ")");
    }
    if (event.start < 0 || event.start >= event.end) {
        throw ConfigError("congestion window must satisfy 0 <= start < end");
    }
    std::vector<std::size_t> indices;
    indices.reserve(event.links.size());
    for (const auto& key : event.links) indices.push_back(link_index(key));
    for (auto i : indices) windows_[i].push_back({event.start, event.end, event.slowdown});
    events_.push_back(event);
}

void Topology::clear_congestion() {
    for (auto& w : windows_) w.clear();
    events_.clear();
}

double Topology::slowdown(std::size_t link, SimTime at) const {
    double factor = 1.0;
    for (const auto& w : windows_.at(link)) {
        if (w.start <= at && at < w.end) factor *= w.slowdown;
    }
    return factor;
}

SimTime Topology::effective_latency(std::size_t link, SimTime at) const {
    const double factor = slowdown(link, at);
    const SimTime base = links_.at(link).base_latency;
    if (factor == 1.0) return base;
    return static_cast<SimTime>(std::llround(static_cast<double>(base) * factor));
}

SimTime Topology::service_interval(std::size_t link, SimTime at) const {
    const double per_packet_us = 1000.0 / links_.at(link).capacity;
    const auto interval = static_cast<SimTime>(std::llround(per_packet_us * slowdown(link, at)));
    return std::max<SimTime>(interval, 1);
}

bool Topology::strongly_connected() const {
    const std::size_t n = node_count();
    if (n == 0) return true;
    auto reaches_all = [&](bool forward) {
        std::vector<char> seen(n, 0);
        std::deque<NodeId> queue{0};
        seen[0] = 1;
        std::size_t count = 1;
        while (!queue.empty()) {
            const NodeId u = queue.front();
            queue.pop_front();
            for (auto l : forward ? out_[u] : in_[u]) {
                const NodeId v = forward ? links_[l].dst : links_[l].src;
                if (!seen[v]) {
                    seen[v] = 1;
                    ++count;
                    queue.push_back(v);
                }
            }
        }
        return count == n;
    };
    return reaches_all(true) && reaches_all(false);
}

Topology generate_swdc(const SwdcParams& params) {
    const std::uint64_t n64 = static_cast<std::uint64_t>(params.grid_width) * params.grid_height;
    if (n64 < 2) throw ConfigError("swdc grid must contain at least 2 nodes");
    if (n64 > std::numeric_limits<NodeId>::max()) throw ConfigError("swdc grid too large");
    const auto n = static_cast<NodeId>(n64);
    const NodeId w = params.grid_width;
    const NodeId h = params.grid_height;

    Topology topo(n);
    auto id = [w](NodeId x, NodeId y) { return y * w + x; };
    for (NodeId y = 0; y < h; ++y) {
        for (NodeId x = 0; x < w; ++x) {
            const NodeId u = id(x, y);
            const NodeId neighbors[4] = {id((x + 1) % w, y), id((x + w - 1) % w, y),
                                         id(x, (y + 1) % h), id(x, (y + h - 1) % h)};
            for (NodeId v : neighbors) {
                if (v != u) topo.add_bidirectional(u, v, params.base_latency, params.capacity);
            }
        }
    }

    // Shortcuts are drawn after the lattice so the lattice is independent of the seed.
    std::mt19937_64 rng(params.rng_seed);
    std::uniform_int_distribution<NodeId> pick(0, n - 1);
    for (NodeId u = 0; u < n; ++u) {
        for (std::uint32_t s = 0; s < params.shortcuts_per_node; ++s) {
            if (topo.out_links(u).size() >= n - 1) break;  // already adjacent to everyone
            NodeId v = pick(rng);
            while (v == u || topo.has_link(u, v)) v = pick(rng);
            topo.add_bidirectional(u, v, params.base_latency, params.capacity);
        }
    }
    return topo;
}

}  // namespace slasim
