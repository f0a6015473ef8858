#include "slasim/simulator.hpp"

#include <algorithm>
#include <array>
#include <cinttypes>
#include <cstdio>
#include <memory>
#include <queue>
#include <set>
#include <sstream>

namespace slasim {

Transmission transit_packet(const Topology& topology, std::size_t link, LinkChannel& channel, SimTime now) {
    Transmission tx;
    tx.entry = std::max(now, channel.next_free);
    tx.arrival = std::max(tx.entry + topology.effective_latency(link, tx.entry), channel.last_arrival);
    channel.next_free = tx.entry + topology.service_interval(link, tx.entry);
    channel.last_arrival = tx.arrival;
    return tx;
}

std::string MetricsRecord::mode() const {
    std::string out;
    for (const auto& a : actions) {
        if (!a.activated) continue;
        if (!out.empty()) out += '+';
        out += to_string(a.mode);
    }
    return out.empty() ? "none" : out;
}

Route Simulator::base_route(RouteCache& cache, BaseAlgorithm base, const FlowSpec& flow) {
    if (base == BaseAlgorithm::shortest_path) return cache.shortest_path(flow.origin, flow.destination);
    auto paths = cache.ecmp_paths(flow.origin, flow.destination);
    return ecmp_select(flow.id, paths);
}

namespace {

enum class EventKind : std::uint8_t { release, emit, arrive, link_free, soft_check, activate };

constexpr std::uint8_t kPrimary = 0;
constexpr std::uint8_t kRedundant = 1;

struct InFlight {
    std::uint32_t flow = 0;
    std::uint32_t seq = 0;
    std::uint32_t path = 0;
    std::uint16_t hop = 0;  // index of the current node on `path`
    std::uint16_t copy = 0;
    LineageKind kind = LineageKind::original;
    SimTime entered = 0;  // start of the last link transmission

    bool original() const { return kind == LineageKind::original; }
    Lineage lineage() const { return {kind, copy}; }
};

struct Event {
    SimTime time;
    std::uint64_t order;
    EventKind kind;
    std::uint8_t channel;
    std::uint32_t target;  // flow, link or action index
    InFlight packet;
};

struct EventLater {
    bool operator()(const Event& a, const Event& b) const {
        return a.time != b.time ? a.time > b.time : a.order > b.order;
    }
};

struct ChannelState {
    LinkChannel channel;
    std::deque<InFlight> queue;
    bool free_pending = false;
};

struct MergePoint {
    NodeId node;
    std::uint32_t action;
    ReassemblyBuffer seen;
    std::uint32_t needed_from = 0;
    std::uint32_t needed_seen = 0;
};

struct Rule {
    std::size_t route_index;
    std::uint32_t from_seq;
    std::uint32_t action;
};

struct ActionRuntime {
    std::uint32_t flow;
    EnhancementAction action;
    std::size_t summary;  // index into the flow's action summaries
    std::vector<std::uint32_t> alt_paths;
    std::uint16_t copy_base = 1;
};

struct FlowRuntime {
    Flow flow;
    const Policy* policy = nullptr;
    SimTime send_interval = 0;
    std::uint32_t base_path = 0;
    std::vector<std::uint32_t> position;
    std::uint32_t emitted = 0;
    FlowStatus status;
    std::vector<MergePoint> merges;
    std::vector<Rule> rules;
    std::vector<std::uint32_t> replicate_actions;
    std::optional<SimTime> completed;
    std::uint32_t triggers = 0;
    std::optional<SimTime> first_trigger;
    std::uint32_t unactionable = 0;
    std::uint32_t controller_events = 0;
    std::uint64_t duplicates = 0;
    std::uint16_t next_copy = 1;
    std::vector<ActionSummary> actions;

    FlowRuntime(Flow f, const Policy* p, SimTime interval)
        : flow(std::move(f)), policy(p), send_interval(interval), position(flow.length, 0),
          status(flow.id, flow.length, flow.release_time) {}

    bool priority() const { return policy->is_priority(); }
};

void fnv_mix(std::uint64_t& h, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) {
        h ^= (v >> (8 * i)) & 0xff;
        h *= 0x100000001b3ULL;
    }
}

}  // namespace

struct Simulator::Impl {
    const Topology& topology;
    std::vector<Policy> policies;
    std::vector<FlowSpec> specs;
    EngineConfig engine;

    RouteCache routes;
    std::vector<Route> paths;
    std::vector<std::vector<std::uint32_t>> path_links;
    std::vector<std::array<ChannelState, 2>> links;
    std::vector<FlowRuntime> flows;
    std::vector<ActionRuntime> actions;
    PathViolationRegistry registry;
    // Links blamed by any flow so far; the controller steers every later
    // alternative around them.
    std::vector<LinkKey> known_slow;
    std::set<LinkKey> known_slow_set;
    FlowIdAllocator subflow_ids;
    FlowLineage lineage;
    ControllerModel controller;

    std::priority_queue<Event, std::vector<Event>, EventLater> queue;
    std::uint64_t order = 0;
    SimStats stats;
    bool ran = false;

    Impl(const Topology& t, std::vector<Policy> p, std::vector<FlowSpec> f, EngineConfig e)
        : topology(t), policies(std::move(p)), specs(std::move(f)), engine(e),
          routes(t, e.cost, e.ecmp_max_paths), links(t.link_count()), registry(e.registry_ttl) {
        controller.rule_latency = engine.controller_latency;
        stats.trace_digest = 0xcbf29ce484222325ULL;
    }

    // ---- plumbing -------------------------------------------------------

    void schedule(SimTime time, EventKind kind, std::uint32_t target, std::uint8_t channel = 0,
                  const InFlight& packet = {}) {
        queue.push(Event{time, order++, kind, channel, target, packet});
    }

    std::uint32_t add_path(Route route) {
        std::vector<std::uint32_t> ls;
        ls.reserve(route.size());
        for (std::size_t i = 0; i + 1 < route.size(); ++i) {
            ls.push_back(static_cast<std::uint32_t>(topology.link_index({route[i], route[i + 1]})));
        }
        paths.push_back(std::move(route));
        path_links.push_back(std::move(ls));
        return static_cast<std::uint32_t>(paths.size() - 1);
    }

    bool enhanced(const FlowRuntime& f) const { return engine.enhance && f.priority(); }

    RouteProgress progress(const FlowRuntime& f) const { return RouteProgress(f.flow.route, f.position); }

    void setup() {
        std::uint64_t max_id = 0;
        for (const auto& s : specs) max_id = std::max(max_id, s.id.value);
        subflow_ids = FlowIdAllocator(max_id + 1);
        flows.reserve(specs.size());
        for (const auto& s : specs) {
            if (s.policy >= policies.size()) throw ConfigError("flow " + std::to_string(s.id.value) + ": bad policy index");
            if (s.length < 1) throw ConfigError("flow " + std::to_string(s.id.value) + ": length must be >= 1");
            Flow flow;
            flow.id = s.id;
            flow.origin = s.origin;
            flow.destination = s.destination;
            flow.length = s.length;
            flow.policy = policies[s.policy].name;
            flow.release_time = s.release;
            flow.route = base_route(routes, engine.base, s);
            const auto index = static_cast<std::uint32_t>(flows.size());
            auto& rt = flows.emplace_back(std::move(flow), &policies[s.policy], s.send_interval);
            rt.base_path = add_path(rt.flow.route);
            rt.status.round_cap = engine.max_rounds;
            schedule(s.release, EventKind::release, index);
        }
    }

    // ---- link service ---------------------------------------------------

    void start_transmission(std::uint32_t link, std::uint8_t ch, InFlight p, SimTime now) {
        auto& state = links[link][ch];
        const auto tx = transit_packet(topology, link, state.channel, now);
        p.entered = tx.entry;
        auto& f = flows[p.flow];
        if (p.original() && p.path == f.base_path) f.position[p.seq] = RouteProgress::left_node(p.hop);
        ++p.hop;
        schedule(tx.arrival, EventKind::arrive, link, ch, p);
    }

    void enqueue(InFlight p, SimTime now) {
        const std::uint32_t link = path_links[p.path].at(p.hop);
        const std::uint8_t ch = p.original() ? kPrimary : kRedundant;
        auto& state = links[link][ch];
        if (state.queue.empty() && state.channel.next_free <= now) {
            start_transmission(link, ch, p, now);
            return;
        }
        state.queue.push_back(p);
        if (!state.free_pending) {
            state.free_pending = true;
            schedule(state.channel.next_free, EventKind::link_free, link, ch);
        }
    }

    void on_link_free(std::uint32_t link, std::uint8_t ch, SimTime now) {
        auto& state = links[link][ch];
        state.free_pending = false;
        if (state.queue.empty()) return;
        InFlight p = state.queue.front();
        state.queue.pop_front();
        start_transmission(link, ch, p, now);
        if (!state.queue.empty()) {
            state.free_pending = true;
            schedule(state.channel.next_free, EventKind::link_free, link, ch);
        }
    }

    // ---- enhancement rules ----------------------------------------------

    void spawn_copy(const FlowRuntime& f, const ActionRuntime& a, std::size_t route, std::uint32_t seq, SimTime now,
                    LineageKind kind) {
        InFlight c;
        c.flow = static_cast<std::uint32_t>(&f - flows.data());
        c.seq = seq;
        c.path = a.alt_paths[route];
        c.hop = 0;
        c.copy = static_cast<std::uint16_t>(a.copy_base + route);
        c.kind = kind;
        c.entered = now;
        ++stats.packets_created;
        enqueue(c, now);
    }

    // Applies a divert/clone rule to an original packet sitting at the rule's
    // node. Returns true when the original itself was moved off the base route.
    bool apply_rule(FlowRuntime& f, ActionRuntime& a, InFlight& p, SimTime now) {
        auto& summary = f.actions[a.summary];
        if (summary.merged_at) ++stats.break_point_lookups_after_merge;
        ++summary.affected_seqs;
        const auto n = a.alt_paths.size();
        const bool divert = a.action.mode == Mode::divert || a.action.drop_original;
        const LineageKind copy_kind = a.action.mode == Mode::replicate ? LineageKind::replica : LineageKind::clone;
        for (std::size_t r = divert ? 1 : 0; r < n; ++r) {
            spawn_copy(f, a, r, p.seq, now, copy_kind);
            ++summary.extra_copies;
        }
        if (!divert) return false;
        const auto& alt = paths[a.alt_paths[0]];
        const auto rejoin = std::find(f.flow.route.begin(), f.flow.route.end(), alt.back()) - f.flow.route.begin();
        f.position[p.seq] = RouteProgress::left_node(static_cast<std::size_t>(rejoin) - 1);
        p.path = a.alt_paths[0];
        p.hop = 0;
        return true;
    }

    const Rule* rule_at(const FlowRuntime& f, std::size_t route_index, std::uint32_t seq) const {
        for (const auto& r : f.rules) {
            if (r.route_index == route_index && seq >= r.from_seq) return &r;
        }
        return nullptr;
    }

    void activate(std::uint32_t action_index, SimTime now) {
        auto& a = actions[action_index];
        auto& f = flows[a.flow];
        auto& summary = f.actions[a.summary];
        summary.activated = true;
        summary.activation_time = now;
        ++f.controller_events;
        if (f.completed) return;

        for (const auto& r : a.action.routes) a.alt_paths.push_back(add_path(r));
        a.copy_base = f.next_copy;
        f.next_copy = static_cast<std::uint16_t>(f.next_copy + a.alt_paths.size());

        if (a.action.mode == Mode::replicate && !a.action.drop_original) {
            summary.first_affected_seq = 0;
            f.replicate_actions.push_back(action_index);
            for (std::uint32_t seq = 0; seq < f.emitted; ++seq) {
                ++summary.affected_seqs;
                for (std::size_t r = 0; r < a.alt_paths.size(); ++r) {
                    spawn_copy(f, a, r, seq, now, LineageKind::replica);
                    ++summary.extra_copies;
                }
            }
            return;
        }

        const BreakPoint bp = *a.action.break_point;
        const std::uint32_t from = progress(f).first_not_past(bp.route_index, bp.packet_seq);
        summary.first_affected_seq = from;
        f.rules.push_back({bp.route_index, from, action_index});
        if (a.action.clone_destination != f.flow.destination) {
            MergePoint mp{a.action.clone_destination, action_index, ReassemblyBuffer(f.flow.id, f.flow.length)};
            mp.needed_from = from;
            f.merges.push_back(std::move(mp));
        }
        if (from >= f.flow.length) return;

        // Packets already waiting at the break node fall under the new rule.
        const std::uint32_t link = path_links[f.base_path][bp.route_index];
        auto& waiting = links[link][kPrimary].queue;
        const auto flow_index = a.flow;
        std::vector<InFlight> moved;
        for (auto it = waiting.begin(); it != waiting.end();) {
            if (it->flow == flow_index && it->original() && it->path == f.base_path && it->seq >= from) {
                InFlight p = *it;
                if (apply_rule(f, a, p, now)) {
                    moved.push_back(p);
                    it = waiting.erase(it);
                    continue;
                }
            }
            ++it;
        }
        for (auto& p : moved) enqueue(p, now);
    }

    std::uint32_t install(FlowRuntime& f, EnhancementAction action, ActionSummary summary) {
        const auto action_index = static_cast<std::uint32_t>(actions.size());
        const auto flow_index = static_cast<std::uint32_t>(&f - flows.data());
        const std::uint32_t from = action.break_point ? action.break_point->packet_seq : 0;
        const Lineage kind = action.mode == Mode::replicate ? Lineage::replica(f.next_copy) : Lineage::clone(f.next_copy);
        if (from < f.flow.length) summary.subflow = make_subflow(f.flow, from, kind, subflow_ids, &lineage).id;
        f.actions.push_back(std::move(summary));
        actions.push_back({flow_index, std::move(action), f.actions.size() - 1, {}, 1});
        return action_index;
    }

    void handle_trigger(FlowRuntime& f, const TriggerDecision& d, SimTime now) {
        ++f.triggers;
        if (!f.first_trigger) f.first_trigger = now;
        if (d.reason == TriggerReason::soft_limit_elapsed) f.status.soft_fired = true;

        auto plan = plan_enhancement(f.flow, f.status, *f.policy, topology, progress(f), d, engine.cost, known_slow);
        for (const auto& l : plan.newly_blamed) f.status.blamed.push_back(l);
        if (d.link && !f.status.is_blamed(*d.link)) f.status.blamed.push_back(*d.link);
        for (const auto& l : f.status.blamed) {
            if (known_slow_set.insert(l).second) known_slow.push_back(l);
        }
        if (f.policy->adaptive_replicate_following) {
            registry.register_path_violation(f.flow.origin, f.flow.destination, f.flow.route,
                                             f.status.blamed.empty() ? route_links(f.flow.route) : f.status.blamed,
                                             now);
        }
        if (!plan.action) {
            ++f.unactionable;
            return;
        }
        ++f.status.rounds_fired;
        ActionSummary summary;
        summary.mode = plan.action->mode;
        summary.reason = d.reason;
        summary.drop_original = plan.action->drop_original;
        summary.fanout = plan.action->fanout();
        summary.trigger_time = now;
        summary.break_point = plan.break_point;
        summary.clone_destination = plan.action->clone_destination;
        summary.routes = plan.action->routes;
        summary.blamed = plan.newly_blamed;
        const SimTime latency = controller_latency_model(*plan.action, controller);
        const auto index = install(f, std::move(*plan.action), std::move(summary));
        schedule(now + latency, EventKind::activate, index);
    }

    void evaluate(FlowRuntime& f, SimTime now) {
        if (!enhanced(f) || f.completed) return;
        const auto d = is_threshold_met(f.status, *f.policy, now);
        f.status.clear_probe();
        if (d.fire) handle_trigger(f, d, now);
    }

    // ---- packet handling ------------------------------------------------

    void drop(FlowRuntime& f) {
        ++f.duplicates;
        ++stats.packets_dropped;
    }

    void deliver(FlowRuntime& f, const InFlight& p, SimTime now) {
        const auto result = f.status.delivered().accept(p.seq, p.lineage(), now);
        if (result == AcceptResult::duplicate_dropped) {
            drop(f);
            return;
        }
        ++stats.packets_delivered;
        if (result == AcceptResult::completed) f.completed = now;
    }

    void on_arrive(InFlight p, NodeId node, SimTime now) {
        auto& f = flows[p.flow];
        const bool on_base = p.path == f.base_path;
        if (p.original() && on_base) f.position[p.seq] = RouteProgress::at_node(p.hop);
        if (enhanced(f) && p.hop > 0) {
            const LinkKey link{paths[p.path][p.hop - 1], node};
            f.status.observe_transit(link, now - p.entered, node, p.seq);
            evaluate(f, now);
        }
        if (node == f.flow.destination) {
            deliver(f, p, now);
            return;
        }
        for (auto& mp : f.merges) {
            if (mp.node != node) continue;
            if (mp.seen.has(p.seq)) {
                if (!p.original()) {
                    drop(f);
                    return;
                }
            } else {
                mp.seen.accept(p.seq, p.lineage(), now);
                if (p.seq >= mp.needed_from && ++mp.needed_seen == f.flow.length - mp.needed_from) {
                    f.actions[actions[mp.action].summary].merged_at = now;
                }
            }
        }
        if (!on_base && p.hop + 1u == paths[p.path].size()) {
            // End of an alternative segment: rejoin the base route here.
            const auto idx = std::find(f.flow.route.begin(), f.flow.route.end(), node) - f.flow.route.begin();
            p.path = f.base_path;
            p.hop = static_cast<std::uint16_t>(idx);
            if (p.original()) f.position[p.seq] = RouteProgress::at_node(p.hop);
        }
        if (p.original() && p.path == f.base_path) {
            if (const Rule* rule = rule_at(f, p.hop, p.seq)) apply_rule(f, actions[rule->action], p, now);
        }
        enqueue(p, now);
    }

    void emit(std::uint32_t flow_index, SimTime now) {
        auto& f = flows[flow_index];
        const std::uint32_t seq = f.emitted++;
        for (auto ai : f.replicate_actions) {
            auto& a = actions[ai];
            ++f.actions[a.summary].affected_seqs;
            for (std::size_t r = 0; r < a.alt_paths.size(); ++r) {
                spawn_copy(f, a, r, seq, now, LineageKind::replica);
                ++f.actions[a.summary].extra_copies;
            }
        }
        InFlight p;
        p.flow = flow_index;
        p.seq = seq;
        p.path = f.base_path;
        p.entered = now;
        ++stats.packets_created;
        on_arrive(p, f.flow.origin, now);
    }

    void on_release(std::uint32_t flow_index, SimTime now) {
        auto& f = flows[flow_index];
        tag_flow(f.flow, *f.policy, now);
        f.flow.released = true;
        if (enhanced(f)) {
            auto d = adaptive_dispatch(f.flow, registry, *f.policy, topology, engine.cost, now);
            if (d.action) {
                ActionSummary summary;
                summary.mode = Mode::replicate;
                summary.at_release = true;
                summary.drop_original = d.action->drop_original;
                summary.fanout = d.action->fanout();
                summary.trigger_time = now;
                summary.break_point = d.action->break_point;
                summary.clone_destination = f.flow.destination;
                summary.routes = d.action->routes;
                activate(install(f, std::move(*d.action), std::move(summary)), now);
            }
        }
        if (f.priority()) schedule(now + f.policy->soft_limit(), EventKind::soft_check, flow_index);
        if (f.send_interval == 0) {
            while (f.emitted < f.flow.length) emit(flow_index, now);
        } else {
            emit(flow_index, now);
            if (f.emitted < f.flow.length) schedule(now + f.send_interval, EventKind::emit, flow_index);
        }
    }

    void on_emit(std::uint32_t flow_index, SimTime now) {
        auto& f = flows[flow_index];
        emit(flow_index, now);
        if (f.emitted < f.flow.length) {
            schedule(f.flow.release_time + static_cast<SimTime>(f.emitted) * f.send_interval, EventKind::emit,
                     flow_index);
        }
    }

    void on_soft_check(std::uint32_t flow_index, SimTime now) {
        auto& f = flows[flow_index];
        if (!enhanced(f) || f.completed) return;
        const auto first = f.status.delivered().first_missing();
        if (first < f.flow.length) f.status.lead_node = f.flow.route[progress(f).next_index(first)];
        evaluate(f, now);
    }

    void trace(const Event& e) {
        auto& h = stats.trace_digest;
        fnv_mix(h, static_cast<std::uint64_t>(e.time));
        fnv_mix(h, static_cast<std::uint64_t>(e.kind) | (static_cast<std::uint64_t>(e.channel) << 8) |
                       (static_cast<std::uint64_t>(e.target) << 16));
        if (e.kind == EventKind::arrive) {
            fnv_mix(h, (static_cast<std::uint64_t>(e.packet.flow) << 32) | e.packet.seq);
            fnv_mix(h, (static_cast<std::uint64_t>(e.packet.copy) << 8) | static_cast<std::uint64_t>(e.packet.kind));
        }
    }

    RunResult run() {
        if (ran) throw SimError("Simulator::run may only be called once");
        ran = true;
        setup();
        while (!queue.empty()) {
            const Event e = queue.top();
            if (engine.horizon && e.time > *engine.horizon) break;
            queue.pop();
            ++stats.events;
            stats.end_time = e.time;
            trace(e);
            switch (e.kind) {
                case EventKind::release: on_release(e.target, e.time); break;
                case EventKind::emit: on_emit(e.target, e.time); break;
                case EventKind::arrive: on_arrive(e.packet, topology.link(e.target).dst, e.time); break;
                case EventKind::link_free: on_link_free(e.target, e.channel, e.time); break;
                case EventKind::soft_check: on_soft_check(e.target, e.time); break;
                case EventKind::activate: activate(e.target, e.time); break;
            }
        }
        for (; !queue.empty(); queue.pop()) {
            if (queue.top().kind == EventKind::arrive) ++stats.packets_in_flight;
        }
        for (const auto& l : links) {
            for (const auto& ch : l) stats.packets_in_flight += ch.queue.size();
        }

        RunResult result;
        result.records.reserve(flows.size());
        for (auto& f : flows) {
            MetricsRecord r;
            r.flow_id = f.flow.id;
            r.priority = f.policy->priority;
            r.policy = f.policy->name;
            r.base_route = f.flow.route;
            r.length = f.flow.length;
            r.released = f.flow.release_time;
            r.completed = f.completed;
            r.sla_violated = sla_violated(f.flow.release_time, f.completed, *f.policy);
            r.triggers = f.triggers;
            r.first_trigger = f.first_trigger;
            r.unactionable_triggers = f.unactionable;
            r.duplicates = f.duplicates;
            r.controller_events = f.controller_events;
            r.actions = std::move(f.actions);
            result.records.push_back(std::move(r));
        }
        std::sort(result.records.begin(), result.records.end(),
                  [](const auto& a, const auto& b) { return a.flow_id < b.flow_id; });
        result.summary = summarize(result.records);
        result.stats = stats;
        return result;
    }
};

Simulator::Simulator(const Topology& topology, std::vector<Policy> policies, std::vector<FlowSpec> flows,
                     EngineConfig engine)
    : impl_(std::make_unique<Impl>(topology, std::move(policies), std::move(flows), engine)) {}

Simulator::~Simulator() = default;

RunResult Simulator::run() { return impl_->run(); }

RunSummary summarize(const std::vector<MetricsRecord>& records) {
    RunSummary s;
    std::vector<SimTime> times;
    std::uint64_t total_len = 0;
    std::uint64_t total_dup = 0;
    for (const auto& r : records) {
        ++s.flows_total;
        if (r.priority == Priority::priority) {
            ++s.priority_flows;
            if (r.sla_violated) ++s.violations_priority;
        } else if (r.sla_violated) {
            ++s.violations_normal;
        }
        if (auto t = r.routing_time()) {
            ++s.completed_flows;
            times.push_back(*t);
        }
        total_len += r.length;
        total_dup += r.duplicates;
        s.triggers += r.triggers;
        s.unactionable_triggers += r.unactionable_triggers;
        s.controller_events += r.controller_events;
        if (std::any_of(r.actions.begin(), r.actions.end(), [](const auto& a) { return a.activated; })) {
            ++s.enhanced_flows;
        }
    }
    s.violation_rate = s.priority_flows ? static_cast<double>(s.violations_priority) / s.priority_flows : 0.0;
    s.total_duplicate_fraction = total_len ? static_cast<double>(total_dup) / total_len : 0.0;
    if (!times.empty()) {
        std::sort(times.begin(), times.end());
        long double sum = 0;
        for (auto t : times) sum += t;
        s.routing_ms_mean = static_cast<double>(sum / times.size()) / 1000.0;
        auto rank = [&](double q) {
            auto k = static_cast<std::size_t>(std::ceil(q * static_cast<double>(times.size())));
            return to_ms(times[std::clamp<std::size_t>(k, 1, times.size()) - 1]);
        };
        s.routing_ms_median = rank(0.5);
        s.routing_ms_p99 = rank(0.99);
    }
    return s;
}

std::string records_to_csv(const std::vector<MetricsRecord>& records) {
    std::string out = "flow_id,priority,mode,released_ms,completed_ms,routing_ms,sla_violated,triggers,duplicates,"
                      "duplicate_fraction\n";
    char frac[32];
    for (const auto& r : records) {
        out += std::to_string(r.flow_id.value);
        out += ',';
        out += to_string(r.priority);
        out += ',';
        out += r.mode();
        out += ',';
        out += format_ms(r.released);
        out += ',';
        if (r.completed) out += format_ms(*r.completed);
        out += ',';
        if (auto t = r.routing_time()) out += format_ms(*t);
        out += ',';
        out += r.sla_violated ? "true" : "false";
        out += ',';
        out += std::to_string(r.triggers);
        out += ',';
        out += std::to_string(r.duplicates);
        out += ',';
        std::snprintf(frac, sizeof(frac), "%.6f", r.duplicate_fraction());
        out += frac;
        out += '\n';
    }
    return out;
}

std::string summary_to_text(const RunSummary& s) {
    std::ostringstream os;
    auto num = [](double v) {
        char buf[40];
        std::snprintf(buf, sizeof(buf), "%.6f", v);
        return std::string(buf);
    };
    os << "flows_total = " << s.flows_total << '\n'
       << "priority_flows = " << s.priority_flows << '\n'
       << "completed_flows = " << s.completed_flows << '\n'
       << "violations_priority = " << s.violations_priority << '\n'
       << "violations_normal = " << s.violations_normal << '\n'
       << "violation_rate = " << num(s.violation_rate) << '\n'
       << "routing_ms_mean = " << num(s.routing_ms_mean) << '\n'
       << "routing_ms_median = " << num(s.routing_ms_median) << '\n'
       << "routing_ms_p99 = " << num(s.routing_ms_p99) << '\n'
       << "total_duplicate_fraction = " << num(s.total_duplicate_fraction) << '\n'
       << "triggers = " << s.triggers << '\n'
       << "unactionable_triggers = " << s.unactionable_triggers << '\n'
       << "controller_events = " << s.controller_events << '\n'
       << "enhanced_flows = " << s.enhanced_flows << '\n';
    return os.str();
}

FlowOutcome smart_route(const Topology& topology, const FlowSpec& flow, const Policy& policy,
                        const EngineConfig& engine) {
    FlowSpec spec = flow;
    spec.policy = 0;
    EngineConfig plain = engine;
    plain.enhance = false;
    auto base = Simulator(topology, {policy}, {spec}, plain).run();
    auto enhanced = Simulator(topology, {policy}, {spec}, engine).run();
    FlowOutcome out;
    out.record = std::move(enhanced.records.front());
    out.overhead = overhead_record(out.record.duplicates, out.record.length, out.record.completed,
                                   base.records.front().completed);
    return out;
}

}  // namespace slasim
