#include "slasim/scenario.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <random>
#include <set>
#include <sstream>
#include <thread>

#include <json.hpp>

namespace slasim {

using Json = nlohmann::ordered_json;

namespace {

// ---- enum names ---------------------------------------------------------

std::string name_of(TopologyKind k) { return k == TopologyKind::swdc ? "swdc" : "edges"; }
std::string name_of(Placement p) {
    switch (p) {
        case Placement::priority_route: return "priority_route";
        case Placement::priority_path: return "priority_path";
        case Placement::any_link: return "any_link";
    }
    return "?";
}
std::string name_of(BaseAlgorithm b) { return b == BaseAlgorithm::shortest_path ? "shortest_path" : "ecmp"; }
std::string name_of(CostMetric c) { return c == CostMetric::hop_count ? "hop_count" : "static_latency"; }

std::string name_of(ReleaseKind k) {
    switch (k) {
        case ReleaseKind::at: return "at";
        case ReleaseKind::uniform: return "uniform";
        case ReleaseKind::periodic: return "periodic";
    }
    return "?";
}

std::string name_of(EndpointKind k) {
    switch (k) {
        case EndpointKind::random_pair: return "random_pair";
        case EndpointKind::fixed: return "fixed";
        case EndpointKind::pair_pool: return "pair_pool";
    }
    return "?";
}

template <class E>
std::optional<E> parse_enum(const std::string& text, std::initializer_list<E> values) {
    for (E v : values) {
        if (name_of(v) == text) return v;
    }
    return std::nullopt;
}

// ---- reading ------------------------------------------------------------

class Reader {
public:
    explicit Reader(std::vector<std::string>& errors) : errors_(errors) {}

    void error(const std::string& path, const std::string& message) { errors_.push_back(path + ": " + message); }

    bool object(const Json& j, const std::string& path, std::initializer_list<const char*> allowed) {
        if (!j.is_object()) {
            error(path, "expected an object");
            return false;
        }
        for (const auto& [key, value] : j.items()) {
            if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; })) {
                error(path + "." + key, "unknown key");
            }
        }
        return true;
    }

    void number(const Json& j, const char* key, const std::string& path, double& out) {
        if (!j.contains(key)) return;
        const auto& v = j.at(key);
        if (!v.is_number()) return error(path + "." + key, "expected a number");
        out = v.get<double>();
    }

    void number(const Json& j, const char* key, const std::string& path, std::optional<double>& out) {
        if (!j.contains(key) || j.at(key).is_null()) return;
        double v = 0;
        number(j, key, path, v);
        out = v;
    }

    template <class Int>
    void integer(const Json& j, const char* key, const std::string& path, Int& out) {
        if (!j.contains(key)) return;
        const auto& v = j.at(key);
        if (!v.is_number_integer()) return error(path + "." + key, "expected an integer");
        if (v.is_number_unsigned()) {
            const auto u = v.get<std::uint64_t>();
            if (u > static_cast<std::uint64_t>(std::numeric_limits<Int>::max())) {
                return error(path + "." + key, "out of range");
            }
            out = static_cast<Int>(u);
            return;
        }
        const auto s = v.get<std::int64_t>();
        if (s < 0) return error(path + "." + key, "must be >= 0");
        out = static_cast<Int>(s);
    }

    void boolean(const Json& j, const char* key, const std::string& path, bool& out) {
        if (!j.contains(key)) return;
        const auto& v = j.at(key);
        if (!v.is_boolean()) return error(path + "." + key, "expected true or false");
        out = v.get<bool>();
    }

    void string(const Json& j, const char* key, const std::string& path, std::string& out) {
        if (!j.contains(key)) return;
        const auto& v = j.at(key);
        if (!v.is_string()) return error(path + "." + key, "expected a string");
        out = v.get<std::string>();
    }

    template <class E, class Parse>
    void enumeration(const Json& j, const char* key, const std::string& path, E& out, Parse parse,
                     const char* choices) {
        if (!j.contains(key)) return;
        std::string text;
        string(j, key, path, text);
        if (!j.at(key).is_string()) return;
        if (auto v = parse(text)) {
            out = *v;
        } else {
            error(path + "." + key, "unknown value '" + text + "' (expected " + choices + ")");
        }
    }

    std::optional<LinkKey> link(const Json& j, const std::string& path) {
        if (!j.is_array() || j.size() != 2 || !j[0].is_number_unsigned() || !j[1].is_number_unsigned()) {
            error(path, "expected a [src, dst] pair of node ids");
            return std::nullopt;
        }
        return LinkKey{j[0].get<NodeId>(), j[1].get<NodeId>()};
    }

private:
    std::vector<std::string>& errors_;
};

TopologySection read_topology(Reader& r, const Json& j) {
    TopologySection t;
    const std::string p = "topology";
    if (!r.object(j, p, {"kind", "grid_width", "grid_height", "shortcuts_per_node", "seed", "base_latency_ms",
                         "capacity", "nodes", "edges"})) {
        return t;
    }
    r.enumeration(j, "kind", p, t.kind, [](const std::string& s) {
        return parse_enum(s, {TopologyKind::swdc, TopologyKind::edges});
    }, "swdc, edges");
    r.integer(j, "grid_width", p, t.grid_width);
    r.integer(j, "grid_height", p, t.grid_height);
    r.integer(j, "shortcuts_per_node", p, t.shortcuts_per_node);
    if (j.contains("seed") && !j.at("seed").is_null()) {
        std::uint64_t seed = 0;
        r.integer(j, "seed", p, seed);
        t.seed = seed;
    }
    r.number(j, "base_latency_ms", p, t.base_latency_ms);
    r.number(j, "capacity", p, t.capacity);
    r.integer(j, "nodes", p, t.nodes);
    if (j.contains("edges")) {
        const auto& edges = j.at("edges");
        if (!edges.is_array()) {
            r.error(p + ".edges", "expected a list");
        } else {
            for (std::size_t i = 0; i < edges.size(); ++i) {
                const std::string ep = p + ".edges[" + std::to_string(i) + "]";
                const auto& e = edges[i];
                EdgeSpec edge;
                if (e.is_array()) {
                    if (auto l = r.link(e, ep)) {
                        edge.a = l->src;
                        edge.b = l->dst;
                    }
                } else if (r.object(e, ep, {"a", "b", "bidirectional", "latency_ms", "capacity"})) {
                    if (!e.contains("a") || !e.contains("b")) r.error(ep, "needs both 'a' and 'b'");
                    r.integer(e, "a", ep, edge.a);
                    r.integer(e, "b", ep, edge.b);
                    r.boolean(e, "bidirectional", ep, edge.bidirectional);
                    r.number(e, "latency_ms", ep, edge.latency_ms);
                    r.number(e, "capacity", ep, edge.capacity);
                }
                t.edges.push_back(edge);
            }
        }
    }
    return t;
}

CongestionSection read_congestion(Reader& r, const Json& j) {
    CongestionSection c;
    const std::string p = "congestion";
    if (!r.object(j, p, {"events", "random"})) return c;
    if (j.contains("events")) {
        const auto& events = j.at("events");
        if (!events.is_array()) {
            r.error(p + ".events", "expected a list");
        } else {
            for (std::size_t i = 0; i < events.size(); ++i) {
                const std::string ep = p + ".events[" + std::to_string(i) + "]";
                const auto& e = events[i];
                CongestionSpec ev;
                if (r.object(e, ep, {"links", "slowdown", "start_ms", "end_ms"})) {
                    if (!e.contains("links") || !e.at("links").is_array()) {
                        r.error(ep + ".links", "expected a list of [src, dst] pairs");
                    } else {
                        const auto& links = e.at("links");
                        for (std::size_t k = 0; k < links.size(); ++k) {
                            if (auto l = r.link(links[k], ep + ".links[" + std::to_string(k) + "]")) {
                                ev.links.push_back(*l);
                            }
                        }
                    }
                    r.number(e, "slowdown", ep, ev.slowdown);
                    r.number(e, "start_ms", ep, ev.start_ms);
                    r.number(e, "end_ms", ep, ev.end_ms);
                }
                c.events.push_back(std::move(ev));
            }
        }
    }
    if (j.contains("random")) {
        const auto& random = j.at("random");
        if (!random.is_array()) {
            r.error(p + ".random", "expected a list");
        } else {
            for (std::size_t i = 0; i < random.size(); ++i) {
                const std::string ep = p + ".random[" + std::to_string(i) + "]";
                const auto& e = random[i];
                RandomCongestion rc;
                if (r.object(e, ep, {"count", "placement", "slowdown", "start_ms", "duration_ms", "bidirectional"})) {
                    r.integer(e, "count", ep, rc.count);
                    r.enumeration(e, "placement", ep, rc.placement, [](const std::string& s) {
                        return parse_enum(s, {Placement::priority_route, Placement::priority_path, Placement::any_link});
                    }, "priority_route, priority_path, any_link");
                    r.number(e, "slowdown", ep, rc.slowdown);
                    if (e.contains("start_ms")) {
                        const auto& s = e.at("start_ms");
                        if (s.is_number()) {
                            rc.start_min_ms = rc.start_max_ms = s.get<double>();
                        } else if (s.is_array() && s.size() == 2 && s[0].is_number() && s[1].is_number()) {
                            rc.start_min_ms = s[0].get<double>();
                            rc.start_max_ms = s[1].get<double>();
                        } else {
                            r.error(ep + ".start_ms", "expected a number or a [min, max] pair");
                        }
                    }
                    r.number(e, "duration_ms", ep, rc.duration_ms);
                    r.boolean(e, "bidirectional", ep, rc.bidirectional);
                }
                c.random.push_back(rc);
            }
        }
    }
    return c;
}

Policy read_policy(Reader& r, const std::string& name, const Json& j) {
    Policy pol;
    pol.name = name;
    const std::string p = "policies." + name;
    if (!r.object(j, p, {"priority", "hard_limit_ms", "soft_fraction", "mode", "fanout", "break_policy",
                         "break_point_at", "adaptive_replicate_following", "per_link_threshold_factor",
                         "trigger_on_slow_link", "replicate_drop_original"})) {
        return pol;
    }
    r.enumeration(j, "priority", p, pol.priority, parse_priority, "normal, priority");
    double hard = to_ms(pol.hard_limit);
    r.number(j, "hard_limit_ms", p, hard);
    pol.hard_limit = from_ms(hard);
    r.number(j, "soft_fraction", p, pol.soft_fraction);
    r.enumeration(j, "mode", p, pol.mode, parse_mode, "divert, clone, replicate");
    r.integer(j, "fanout", p, pol.fanout);
    r.enumeration(j, "break_policy", p, pol.break_policy, parse_break_policy, "worst_link, fractional_progress");
    r.enumeration(j, "break_point_at", p, pol.break_point_at, parse_break_point_at,
                  "upstream_of_blame, trigger_location");
    r.boolean(j, "adaptive_replicate_following", p, pol.adaptive_replicate_following);
    r.number(j, "per_link_threshold_factor", p, pol.per_link_threshold_factor);
    r.boolean(j, "trigger_on_slow_link", p, pol.trigger_on_slow_link);
    r.boolean(j, "replicate_drop_original", p, pol.replicate_drop_original);
    return pol;
}

FlowGroup read_group(Reader& r, std::size_t index, const Json& j) {
    FlowGroup g;
    const std::string p = "workload[" + std::to_string(index) + "]";
    if (!r.object(j, p, {"name", "count", "length", "send_interval_ms", "policy", "release", "endpoints"})) return g;
    r.string(j, "name", p, g.name);
    r.integer(j, "count", p, g.count);
    r.integer(j, "length", p, g.length);
    r.number(j, "send_interval_ms", p, g.send_interval_ms);
    if (!j.contains("policy")) r.error(p + ".policy", "missing");
    r.string(j, "policy", p, g.policy);
    if (j.contains("release")) {
        const auto& rel = j.at("release");
        const std::string rp = p + ".release";
        if (r.object(rel, rp, {"kind", "at_ms", "start_ms", "end_ms", "period_ms"})) {
            r.enumeration(rel, "kind", rp, g.release.kind, [](const std::string& s) {
                return parse_enum(s, {ReleaseKind::at, ReleaseKind::uniform, ReleaseKind::periodic});
            }, "at, uniform, periodic");
            r.number(rel, "at_ms", rp, g.release.at_ms);
            r.number(rel, "start_ms", rp, g.release.start_ms);
            r.number(rel, "end_ms", rp, g.release.end_ms);
            r.number(rel, "period_ms", rp, g.release.period_ms);
        }
    }
    if (j.contains("endpoints")) {
        const auto& ends = j.at("endpoints");
        const std::string ep = p + ".endpoints";
        if (r.object(ends, ep, {"kind", "origin", "destination", "pool_size"})) {
            r.enumeration(ends, "kind", ep, g.endpoints.kind, [](const std::string& s) {
                return parse_enum(s, {EndpointKind::random_pair, EndpointKind::fixed, EndpointKind::pair_pool});
            }, "random_pair, fixed, pair_pool");
            r.integer(ends, "origin", ep, g.endpoints.origin);
            r.integer(ends, "destination", ep, g.endpoints.destination);
            r.integer(ends, "pool_size", ep, g.endpoints.pool_size);
        }
    }
    return g;
}

EngineSection read_engine(Reader& r, const Json& j) {
    EngineSection e;
    const std::string p = "engine";
    if (!r.object(j, p, {"base", "cost", "ecmp_max_paths", "enhance", "controller_latency_ms", "horizon_ms",
                         "max_rounds", "registry_ttl_ms"})) {
        return e;
    }
    r.enumeration(j, "base", p, e.base, [](const std::string& s) {
        return parse_enum(s, {BaseAlgorithm::shortest_path, BaseAlgorithm::ecmp});
    }, "shortest_path, ecmp");
    r.enumeration(j, "cost", p, e.cost, [](const std::string& s) {
        return parse_enum(s, {CostMetric::hop_count, CostMetric::static_latency});
    }, "hop_count, static_latency");
    r.integer(j, "ecmp_max_paths", p, e.ecmp_max_paths);
    r.boolean(j, "enhance", p, e.enhance);
    r.number(j, "controller_latency_ms", p, e.controller_latency_ms);
    r.number(j, "horizon_ms", p, e.horizon_ms);
    r.integer(j, "max_rounds", p, e.max_rounds);
    r.number(j, "registry_ttl_ms", p, e.registry_ttl_ms);
    return e;
}

std::pair<std::size_t, std::size_t> line_column(const std::string& text, std::size_t byte) {
    std::size_t line = 1;
    std::size_t col = 1;
    for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return {line, col};
}

// ---- serialization --------------------------------------------------------

Json link_json(const LinkKey& l) { return Json::array({l.src, l.dst}); }

Json opt(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

}  // namespace

ScenarioConfig parse_scenario(const std::string& text) {
    Json root;
    try {
        root = Json::parse(text);
    } catch (const Json::parse_error& e) {
        // byte is one past the offending character
        const auto [line, col] = line_column(text, e.byte > 0 ? e.byte - 1 : 0);
        std::string what = e.what();
        if (auto pos = what.find("syntax error"); pos != std::string::npos) what = what.substr(pos);
        throw ValidationError({"line " + std::to_string(line) + ", column " + std::to_string(col) + ": " + what});
    }

    std::vector<std::string> errors;
    Reader r(errors);
    ScenarioConfig config;
    if (!r.object(root, "scenario", {"topology", "congestion", "policies", "workload", "engine"})) {
        throw ValidationError(errors);
    }
    if (root.contains("topology")) config.topology = read_topology(r, root.at("topology"));
    if (root.contains("congestion")) config.congestion = read_congestion(r, root.at("congestion"));
    if (root.contains("policies")) {
        const auto& pols = root.at("policies");
        if (!pols.is_object()) {
            r.error("policies", "expected an object keyed by policy name");
        } else {
            for (const auto& [name, body] : pols.items()) config.policies.push_back(read_policy(r, name, body));
        }
    }
    if (root.contains("workload")) {
        const auto& work = root.at("workload");
        if (!work.is_array()) {
            r.error("workload", "expected a list of flow groups");
        } else {
            for (std::size_t i = 0; i < work.size(); ++i) config.workload.push_back(read_group(r, i, work[i]));
        }
    }
    if (root.contains("engine")) config.engine = read_engine(r, root.at("engine"));

    // Type errors first, then semantic errors on whatever was readable.
    for (auto& e : validate_scenario(config)) {
        if (std::find(errors.begin(), errors.end(), e) == errors.end()) errors.push_back(std::move(e));
    }
    if (!errors.empty()) throw ValidationError(std::move(errors));
    return config;
}

ScenarioConfig load_scenario(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError({path + ": cannot open file"});
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_scenario(buffer.str());
}

std::vector<std::string> validate_scenario(const ScenarioConfig& c) {
    std::vector<std::string> errors;
    auto err = [&](const std::string& path, const std::string& msg) { errors.push_back(path + ": " + msg); };

    const auto& t = c.topology;
    const std::uint32_t n = t.node_count();
    if (t.kind == TopologyKind::swdc) {
        if (t.grid_width < 1) err("topology.grid_width", "must be >= 1");
        if (t.grid_height < 1) err("topology.grid_height", "must be >= 1");
        if (static_cast<std::uint64_t>(t.grid_width) * t.grid_height < 2) {
            err("topology", "grid must have at least 2 nodes");
        }
        if (!t.edges.empty()) err("topology.edges", "only allowed with kind 'edges'");
    } else {
        if (t.nodes < 2) err("topology.nodes", "must be >= 2");
        if (t.edges.empty()) err("topology.edges", "must list at least one edge");
    }
    if (!(t.base_latency_ms > 0)) err("topology.base_latency_ms", "must be > 0");
    if (!(t.capacity > 0)) err("topology.capacity", "must be > 0");
    std::set<std::pair<NodeId, NodeId>> seen_edges;
    for (std::size_t i = 0; i < t.edges.size(); ++i) {
        const auto& e = t.edges[i];
        const std::string p = "topology.edges[" + std::to_string(i) + "]";
        if (e.a >= n || e.b >= n) err(p, "node id out of range (nodes = " + std::to_string(n) + ")");
        if (e.a == e.b) err(p, "self-loop");
        if (e.latency_ms && !(*e.latency_ms > 0)) err(p + ".latency_ms", "must be > 0");
        if (e.capacity && !(*e.capacity > 0)) err(p + ".capacity", "must be > 0");
        bool dup = !seen_edges.insert({e.a, e.b}).second;
        if (e.bidirectional) dup = !seen_edges.insert({e.b, e.a}).second || dup;
        if (dup) err(p, "duplicate link");
    }
    if (t.kind == TopologyKind::edges && errors.empty()) {
        Topology topo(n);
        for (const auto& e : t.edges) {
            const SimTime lat = from_ms(e.latency_ms.value_or(t.base_latency_ms));
            const double cap = e.capacity.value_or(t.capacity);
            if (e.bidirectional) {
                topo.add_bidirectional(e.a, e.b, lat, cap);
            } else {
                topo.add_link(e.a, e.b, lat, cap);
            }
        }
        if (!topo.strongly_connected()) err("topology.edges", "graph is not strongly connected");
    }

    for (std::size_t i = 0; i < c.congestion.events.size(); ++i) {
        const auto& e = c.congestion.events[i];
        const std::string p = "congestion.events[" + std::to_string(i) + "]";
        if (e.links.empty()) err(p + ".links", "must not be empty");
        for (const auto& l : e.links) {
            if (l.src >= n || l.dst >= n) err(p + ".links", "link " + to_string(l) + " references an unknown node");
        }
        if (!(e.slowdown > 1.0)) err(p + ".slowdown", "must be > 1");
        if (e.start_ms < 0) err(p + ".start_ms", "must be >= 0");
        if (e.end_ms && !(*e.end_ms > e.start_ms)) err(p + ".end_ms", "must be after start_ms");
    }
    bool has_priority_group = false;
    for (const auto& g : c.workload) {
        auto it = std::find_if(c.policies.begin(), c.policies.end(), [&](const Policy& p) { return p.name == g.policy; });
        if (it != c.policies.end() && it->is_priority() && g.count > 0) has_priority_group = true;
    }
    for (std::size_t i = 0; i < c.congestion.random.size(); ++i) {
        const auto& rc = c.congestion.random[i];
        const std::string p = "congestion.random[" + std::to_string(i) + "]";
        if (!(rc.slowdown > 1.0)) err(p + ".slowdown", "must be > 1");
        if (rc.start_min_ms < 0 || rc.start_max_ms < rc.start_min_ms) {
            err(p + ".start_ms", "window must satisfy 0 <= min <= max");
        }
        if (rc.duration_ms && !(*rc.duration_ms > 0)) err(p + ".duration_ms", "must be > 0");
        if (rc.count > 0 && rc.placement != Placement::any_link && !has_priority_group) {
            err(p + ".placement", name_of(rc.placement) + " needs at least one priority flow group");
        }
    }

    std::set<std::string> names;
    for (const auto& pol : c.policies) {
        const std::string p = "policies." + pol.name;
        if (pol.name.empty()) err("policies", "policy names must not be empty");
        if (!names.insert(pol.name).second) err(p, "duplicate policy name");
        for (auto& e : pol.validate(p)) errors.push_back(std::move(e));
    }

    for (std::size_t i = 0; i < c.workload.size(); ++i) {
        const auto& g = c.workload[i];
        const std::string p = "workload[" + std::to_string(i) + "]";
        if (g.length < 1) err(p + ".length", "must be >= 1");
        if (g.send_interval_ms < 0) err(p + ".send_interval_ms", "must be >= 0");
        if (!names.count(g.policy)) err(p + ".policy", "unknown policy '" + g.policy + "'");
        const auto& rel = g.release;
        switch (rel.kind) {
            case ReleaseKind::at:
                if (rel.at_ms < 0) err(p + ".release.at_ms", "must be >= 0");
                break;
            case ReleaseKind::uniform:
                if (rel.start_ms < 0 || rel.end_ms < rel.start_ms) {
                    err(p + ".release", "uniform window must satisfy 0 <= start_ms <= end_ms");
                }
                break;
            case ReleaseKind::periodic:
                if (rel.start_ms < 0) err(p + ".release.start_ms", "must be >= 0");
                if (rel.period_ms < 0) err(p + ".release.period_ms", "must be >= 0");
                break;
        }
        const auto& ends = g.endpoints;
        if (ends.kind == EndpointKind::fixed) {
            if (ends.origin >= n || ends.destination >= n) err(p + ".endpoints", "node id out of range");
            if (ends.origin == ends.destination) err(p + ".endpoints", "origin and destination must differ");
        }
        if (ends.kind == EndpointKind::pair_pool && ends.pool_size < 1) err(p + ".endpoints.pool_size", "must be >= 1");
    }

    const auto& e = c.engine;
    if (e.ecmp_max_paths < 1) err("engine.ecmp_max_paths", "must be >= 1");
    if (e.controller_latency_ms < 0) err("engine.controller_latency_ms", "must be >= 0");
    if (e.horizon_ms && !(*e.horizon_ms > 0)) err("engine.horizon_ms", "must be > 0");
    if (e.max_rounds < 1) err("engine.max_rounds", "must be >= 1");
    if (e.registry_ttl_ms && !(*e.registry_ttl_ms > 0)) err("engine.registry_ttl_ms", "must be > 0");
    return errors;
}

std::string serialize_scenario(const ScenarioConfig& c) {
    Json root;
    const auto& t = c.topology;
    Json topo;
    topo["kind"] = name_of(t.kind);
    if (t.kind == TopologyKind::swdc) {
        topo["grid_width"] = t.grid_width;
        topo["grid_height"] = t.grid_height;
        topo["shortcuts_per_node"] = t.shortcuts_per_node;
        topo["seed"] = t.seed ? Json(*t.seed) : Json(nullptr);
    } else {
        topo["nodes"] = t.nodes;
        Json edges = Json::array();
        for (const auto& e : t.edges) {
            Json je;
            je["a"] = e.a;
            je["b"] = e.b;
            je["bidirectional"] = e.bidirectional;
            je["latency_ms"] = opt(e.latency_ms);
            je["capacity"] = opt(e.capacity);
            edges.push_back(std::move(je));
        }
        topo["edges"] = std::move(edges);
    }
    topo["base_latency_ms"] = t.base_latency_ms;
    topo["capacity"] = t.capacity;
    root["topology"] = std::move(topo);

    Json events = Json::array();
    for (const auto& e : c.congestion.events) {
        Json je;
        je["links"] = Json::array();
        for (const auto& l : e.links) je["links"].push_back(link_json(l));
        je["slowdown"] = e.slowdown;
        je["start_ms"] = e.start_ms;
        je["end_ms"] = opt(e.end_ms);
        events.push_back(std::move(je));
    }
    Json random = Json::array();
    for (const auto& rc : c.congestion.random) {
        Json je;
        je["count"] = rc.count;
        je["placement"] = name_of(rc.placement);
        je["slowdown"] = rc.slowdown;
        je["start_ms"] = Json::array({rc.start_min_ms, rc.start_max_ms});
        je["duration_ms"] = opt(rc.duration_ms);
        je["bidirectional"] = rc.bidirectional;
        random.push_back(std::move(je));
    }
    root["congestion"] = {{"events", std::move(events)}, {"random", std::move(random)}};

    Json pols = Json::object();
    for (const auto& p : c.policies) {
        Json jp;
        jp["priority"] = std::string(to_string(p.priority));
        jp["hard_limit_ms"] = to_ms(p.hard_limit);
        jp["soft_fraction"] = p.soft_fraction;
        jp["mode"] = std::string(to_string(p.mode));
        jp["fanout"] = p.fanout;
        jp["break_policy"] = std::string(to_string(p.break_policy));
        jp["break_point_at"] = std::string(to_string(p.break_point_at));
        jp["adaptive_replicate_following"] = p.adaptive_replicate_following;
        jp["per_link_threshold_factor"] = p.per_link_threshold_factor;
        jp["trigger_on_slow_link"] = p.trigger_on_slow_link;
        jp["replicate_drop_original"] = p.replicate_drop_original;
        pols[p.name] = std::move(jp);
    }
    root["policies"] = std::move(pols);

    Json work = Json::array();
    for (const auto& g : c.workload) {
        Json jg;
        jg["name"] = g.name;
        jg["count"] = g.count;
        jg["length"] = g.length;
        jg["send_interval_ms"] = g.send_interval_ms;
        jg["policy"] = g.policy;
        Json rel;
        rel["kind"] = name_of(g.release.kind);
        switch (g.release.kind) {
            case ReleaseKind::at: rel["at_ms"] = g.release.at_ms; break;
            case ReleaseKind::uniform:
                rel["start_ms"] = g.release.start_ms;
                rel["end_ms"] = g.release.end_ms;
                break;
            case ReleaseKind::periodic:
                rel["start_ms"] = g.release.start_ms;
                rel["period_ms"] = g.release.period_ms;
                break;
        }
        jg["release"] = std::move(rel);
        Json ends;
        ends["kind"] = name_of(g.endpoints.kind);
        if (g.endpoints.kind == EndpointKind::fixed) {
            ends["origin"] = g.endpoints.origin;
            ends["destination"] = g.endpoints.destination;
        } else if (g.endpoints.kind == EndpointKind::pair_pool) {
            ends["pool_size"] = g.endpoints.pool_size;
        }
        jg["endpoints"] = std::move(ends);
        work.push_back(std::move(jg));
    }
    root["workload"] = std::move(work);

    const auto& e = c.engine;
    Json je;
    je["base"] = name_of(e.base);
    je["cost"] = name_of(e.cost);
    je["ecmp_max_paths"] = e.ecmp_max_paths;
    je["enhance"] = e.enhance;
    je["controller_latency_ms"] = e.controller_latency_ms;
    je["horizon_ms"] = opt(e.horizon_ms);
    je["max_rounds"] = e.max_rounds;
    je["registry_ttl_ms"] = opt(e.registry_ttl_ms);
    root["engine"] = std::move(je);
    return root.dump(2) + "\n";
}

// ---- instantiation ------------------------------------------------------

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// One generator per concern so changing one knob does not reshuffle the rest.
enum class Stream : std::uint64_t { topology = 1, workload = 2, congestion = 3 };

std::mt19937_64 stream(std::uint64_t seed, Stream s) {
    return std::mt19937_64(splitmix64(seed ^ splitmix64(static_cast<std::uint64_t>(s))));
}

template <class Rng>
std::uint64_t pick(Rng& rng, std::uint64_t n) {
    return std::uniform_int_distribution<std::uint64_t>(0, n - 1)(rng);
}

template <class Rng>
SimTime pick_time(Rng& rng, double lo_ms, double hi_ms) {
    const SimTime lo = from_ms(lo_ms);
    const SimTime hi = from_ms(hi_ms);
    if (hi <= lo) return lo;
    return std::uniform_int_distribution<SimTime>(lo, hi)(rng);
}

Topology build_topology(const TopologySection& t, std::uint64_t seed) {
    if (t.kind == TopologyKind::swdc) {
        SwdcParams p;
        p.grid_width = t.grid_width;
        p.grid_height = t.grid_height;
        p.shortcuts_per_node = t.shortcuts_per_node;
        p.rng_seed = t.seed ? *t.seed : stream(seed, Stream::topology)();
        p.base_latency = from_ms(t.base_latency_ms);
        p.capacity = t.capacity;
        return generate_swdc(p);
    }
    Topology topo(t.nodes);
    for (const auto& e : t.edges) {
        const SimTime lat = from_ms(e.latency_ms.value_or(t.base_latency_ms));
        const double cap = e.capacity.value_or(t.capacity);
        if (e.bidirectional) {
            topo.add_bidirectional(e.a, e.b, lat, cap);
        } else {
            topo.add_link(e.a, e.b, lat, cap);
        }
    }
    return topo;
}

}  // namespace

ScenarioInstance instantiate(const ScenarioConfig& config, std::uint64_t seed) {
    if (auto errors = validate_scenario(config); !errors.empty()) throw ValidationError(std::move(errors));
    ScenarioInstance inst;
    inst.topology = build_topology(config.topology, seed);
    inst.policies = config.policies;

    const auto& e = config.engine;
    inst.engine.base = e.base;
    inst.engine.cost = e.cost;
    inst.engine.ecmp_max_paths = e.ecmp_max_paths;
    inst.engine.enhance = e.enhance;
    inst.engine.controller_latency = from_ms(e.controller_latency_ms);
    if (e.horizon_ms) inst.engine.horizon = from_ms(*e.horizon_ms);
    inst.engine.max_rounds = e.max_rounds;
    if (e.registry_ttl_ms) inst.engine.registry_ttl = from_ms(*e.registry_ttl_ms);

    const auto n = static_cast<NodeId>(inst.topology.node_count());
    auto rng = stream(seed, Stream::workload);
    std::uint64_t next_id = 0;
    for (const auto& g : config.workload) {
        const auto policy = static_cast<std::size_t>(
            std::find_if(inst.policies.begin(), inst.policies.end(), [&](const Policy& p) { return p.name == g.policy; }) -
            inst.policies.begin());
        auto random_pair = [&]() {
            const auto o = static_cast<NodeId>(pick(rng, n));
            auto d = static_cast<NodeId>(pick(rng, n - 1));
            if (d >= o) ++d;
            return std::pair{o, d};
        };
        std::vector<std::pair<NodeId, NodeId>> pool;
        if (g.endpoints.kind == EndpointKind::pair_pool) {
            for (std::uint32_t i = 0; i < g.endpoints.pool_size; ++i) pool.push_back(random_pair());
        }
        for (std::uint32_t i = 0; i < g.count; ++i) {
            FlowSpec f;
            f.id = FlowId{next_id++};
            switch (g.endpoints.kind) {
                case EndpointKind::random_pair: std::tie(f.origin, f.destination) = random_pair(); break;
                case EndpointKind::fixed:
                    f.origin = g.endpoints.origin;
                    f.destination = g.endpoints.destination;
                    break;
                case EndpointKind::pair_pool: std::tie(f.origin, f.destination) = pool[pick(rng, pool.size())]; break;
            }
            switch (g.release.kind) {
                case ReleaseKind::at: f.release = from_ms(g.release.at_ms); break;
                case ReleaseKind::uniform: f.release = pick_time(rng, g.release.start_ms, g.release.end_ms); break;
                case ReleaseKind::periodic: f.release = from_ms(g.release.start_ms + i * g.release.period_ms); break;
            }
            f.length = g.length;
            f.send_interval = from_ms(g.send_interval_ms);
            f.policy = policy;
            inst.flows.push_back(f);
        }
    }

    for (const auto& ev : config.congestion.events) {
        CongestionEvent ce;
        ce.links = ev.links;
        ce.slowdown = ev.slowdown;
        ce.start = from_ms(ev.start_ms);
        ce.end = ev.end_ms ? from_ms(*ev.end_ms) : kNever;
        inst.topology.inject_congestion(ce);
    }
    if (!config.congestion.random.empty()) {
        auto crng = stream(seed, Stream::congestion);
        RouteCache cache(inst.topology, inst.engine.cost, inst.engine.ecmp_max_paths);
        std::vector<const FlowSpec*> priority;
        for (const auto& f : inst.flows) {
            if (inst.policies[f.policy].is_priority()) priority.push_back(&f);
        }
        for (const auto& rc : config.congestion.random) {
            // Events of one block land on distinct links while untouched
            // candidates remain, so slowdowns do not silently compound.
            std::set<LinkKey> used;
            auto fresh = [&](const std::vector<LinkKey>& links) {
                return std::none_of(links.begin(), links.end(), [&](const LinkKey& l) { return used.count(l) > 0; });
            };
            for (std::uint32_t i = 0; i < rc.count; ++i) {
                CongestionEvent ce;
                for (int attempt = 0; attempt < 64; ++attempt) {
                    if (rc.placement == Placement::any_link) {
                        ce.links = {inst.topology.link(pick(crng, inst.topology.link_count())).key()};
                    } else {
                        const auto& flow = *priority[pick(crng, priority.size())];
                        const auto route = Simulator::base_route(cache, inst.engine.base, flow);
                        if (rc.placement == Placement::priority_path) {
                            ce.links = route_links(route);
                        } else {
                            const auto hop = pick(crng, route.size() - 1);
                            ce.links = {{route[hop], route[hop + 1]}};
                        }
                    }
                    if (fresh(ce.links)) break;
                }
                used.insert(ce.links.begin(), ce.links.end());
                if (rc.bidirectional) {
                    const auto forward = ce.links;
                    for (const auto& l : forward) {
                        if (inst.topology.has_link(l.dst, l.src)) ce.links.push_back({l.dst, l.src});
                    }
                }
                ce.slowdown = rc.slowdown;
                ce.start = pick_time(crng, rc.start_min_ms, rc.start_max_ms);
                ce.end = rc.duration_ms ? ce.start + from_ms(*rc.duration_ms) : kNever;
                inst.topology.inject_congestion(ce);
            }
        }
    }
    return inst;
}

RunResult run_scenario(const ScenarioConfig& config, std::uint64_t seed) {
    auto inst = instantiate(config, seed);
    Simulator sim(inst.topology, std::move(inst.policies), std::move(inst.flows), inst.engine);
    return sim.run();
}

ScenarioConfig with_enhancement(ScenarioConfig config, bool enhance) {
    config.engine.enhance = enhance;
    return config;
}

ScenarioConfig without_congestion(ScenarioConfig config) {
    config.congestion = {};
    return config;
}

// ---- batches ------------------------------------------------------------

BatchResult run_batch(const ScenarioConfig& config, const std::vector<std::uint64_t>& seeds, unsigned parallelism,
                      bool compare) {
    if (auto errors = validate_scenario(config); !errors.empty()) throw ValidationError(std::move(errors));
    BatchResult batch;
    batch.runs.resize(seeds.size());
    std::vector<std::exception_ptr> failures(seeds.size());
    const ScenarioConfig enhanced = compare ? with_enhancement(config, true) : config;
    const ScenarioConfig base = with_enhancement(config, false);

    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        for (std::size_t i = next++; i < seeds.size(); i = next++) {
            try {
                auto& run = batch.runs[i];
                run.seed = seeds[i];
                run.result = run_scenario(enhanced, seeds[i]);
                if (compare) run.base = run_scenario(base, seeds[i]);
            } catch (...) {
                failures[i] = std::current_exception();
            }
        }
    };
    const unsigned threads = std::max(1u, std::min<unsigned>(parallelism, static_cast<unsigned>(seeds.size())));
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    }
    for (std::size_t i = 0; i < seeds.size(); ++i) {
        if (!failures[i]) continue;
        try {
            std::rethrow_exception(failures[i]);
        } catch (const std::exception& e) {
            throw SimError("seed " + std::to_string(seeds[i]) + ": " + e.what());
        }
    }

    std::vector<MetricsRecord> all;
    std::vector<MetricsRecord> all_base;
    for (const auto& run : batch.runs) {
        all.insert(all.end(), run.result.records.begin(), run.result.records.end());
        if (!run.base) continue;
        all_base.insert(all_base.end(), run.base->records.begin(), run.base->records.end());
        Containment c;
        c.seed = run.seed;
        for (std::size_t k = 0; k < run.result.records.size(); ++k) {
            const auto& enhanced = run.result.records[k];
            const auto& plain = run.base->records[k];
            if (enhanced.sla_violated && !plain.sla_violated) c.violated_only_enhanced.push_back(enhanced.flow_id);
            if (!enhanced.sla_violated && plain.sla_violated) c.avoided.push_back(enhanced.flow_id);
        }
        batch.containment.push_back(std::move(c));
    }
    batch.aggregate = summarize(all);
    if (compare) batch.base_aggregate = summarize(all_base);
    return batch;
}

std::string batch_summary_text(const BatchResult& batch) {
    std::ostringstream os;
    os << "seeds = " << batch.runs.size() << '\n';
    if (batch.base_aggregate) {
        os << "[enhanced]\n" << summary_to_text(batch.aggregate) << "[base]\n" << summary_to_text(*batch.base_aggregate);
    } else {
        os << summary_to_text(batch.aggregate);
    }
    os << "[per_seed]\n";
    char buf[64];
    for (const auto& run : batch.runs) {
        std::snprintf(buf, sizeof(buf), "%.6f", run.result.summary.violation_rate);
        os << "seed_" << run.seed << ".violation_rate = " << buf << '\n';
        if (run.base) {
            std::snprintf(buf, sizeof(buf), "%.6f", run.base->summary.violation_rate);
            os << "seed_" << run.seed << ".base_violation_rate = " << buf << '\n';
        }
    }
    return os.str();
}

std::string containment_text(const BatchResult& batch) {
    std::ostringstream os;
    std::size_t counterexamples = 0;
    for (const auto& c : batch.containment) {
        counterexamples += c.violated_only_enhanced.size();
        os << "seed " << c.seed << ": avoided = " << c.avoided.size()
           << ", violated_only_enhanced = " << c.violated_only_enhanced.size();
        for (const auto& id : c.violated_only_enhanced) os << ' ' << id.value;
        os << '\n';
    }
    os << "counterexamples = " << counterexamples << '\n';
    return os.str();
}

std::vector<std::uint64_t> parse_seed_list(const std::string& text) {
    std::vector<std::uint64_t> seeds;
    std::stringstream ss(text);
    std::string part;
    auto number = [&](const std::string& s) {
        if (s.empty() || !std::all_of(s.begin(), s.end(), [](char ch) { return ch >= '0' && ch <= '9'; })) {
            throw ValidationError({"seeds: '" + s + "' is not a non-negative integer"});
        }
        return std::stoull(s);
    };
    while (std::getline(ss, part, ',')) {
        if (auto dots = part.find(".."); dots != std::string::npos) {
            const auto lo = number(part.substr(0, dots));
            const auto hi = number(part.substr(dots + 2));
            if (hi < lo) throw ValidationError({"seeds: empty range '" + part + "'"});
            if (hi - lo > 1'000'000) throw ValidationError({"seeds: range '" + part + "' is too large"});
            for (auto s = lo; s <= hi; ++s) seeds.push_back(s);
        } else {
            seeds.push_back(number(part));
        }
    }
    if (seeds.empty()) throw ValidationError({"seeds: no seeds given"});
    return seeds;
}

}  // namespace slasim
