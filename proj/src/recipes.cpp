#include <algorithm>

#include "slasim/scenario.hpp"

namespace slasim {

namespace {

Policy priority_policy(const std::string& name, Mode mode, double hard_ms, double soft_fraction) {
    Policy p;
    p.name = name;
    p.priority = Priority::priority;
    p.hard_limit = from_ms(hard_ms);
    p.soft_fraction = soft_fraction;
    p.mode = mode;
    p.fanout = 1;
    p.trigger_on_slow_link = false;
    return p;
}

Policy normal_policy(double hard_ms) {
    Policy p;
    p.name = "normal";
    p.priority = Priority::normal;
    p.hard_limit = from_ms(hard_ms);
    return p;
}

TopologySection desk_swdc(double latency_ms, double capacity) {
    TopologySection t;
    t.kind = TopologyKind::swdc;
    t.grid_width = 16;
    t.grid_height = 16;
    t.shortcuts_per_node = 1;
    t.base_latency_ms = latency_ms;
    t.capacity = capacity;
    return t;
}

FlowGroup group(std::string name, std::uint32_t count, std::uint32_t length, double interval_ms, std::string policy) {
    FlowGroup g;
    g.name = std::move(name);
    g.count = count;
    g.length = length;
    g.send_interval_ms = interval_ms;
    g.policy = std::move(policy);
    return g;
}

ReleaseSpec uniform(double start_ms, double end_ms) {
    ReleaseSpec r;
    r.kind = ReleaseKind::uniform;
    r.start_ms = start_ms;
    r.end_ms = end_ms;
    return r;
}

// Long flows: 100 packets one second apart over 1 s links, so an
// uncongested flow finishes in roughly 105 s against a 250 s hard limit
// whose soft limit sits at 120 s. Congestion starts once more than half of
// each flow has been sent and slows one route link 50x until well past the
// hard limit. Divert also reacts to slow links seen before the soft limit;
// clone waits for the soft limit so its redundancy stays bounded.
ScenarioConfig long_flows(Mode mode, double soft_fraction) {
    ScenarioConfig c;
    c.topology = desk_swdc(1000.0, 0.01);
    auto policy = priority_policy("gold", mode, 250000.0, soft_fraction);
    policy.trigger_on_slow_link = mode == Mode::divert;
    c.policies.push_back(policy);
    c.policies.push_back(normal_policy(250000.0));

    auto gold = group("long_priority", 200, 100, 1000.0, "gold");
    gold.release = uniform(0.0, 10000.0);
    auto background = group("short_background", 800, 10, 0.0, "normal");
    background.release = uniform(0.0, 200000.0);
    c.workload = {gold, background};

    RandomCongestion rc;
    rc.count = 40;
    rc.placement = Placement::priority_route;
    rc.slowdown = 50.0;
    rc.start_min_ms = 60000.0;
    rc.start_max_ms = 75000.0;
    rc.duration_ms = 400000.0;
    c.congestion.random.push_back(rc);
    return c;
}

// Short flows: bursts of 10 packets over 10 ms links. A pool of hot
// priority pairs is released every 100 ms while every link of their base
// routes is slowed 10x; background traffic is uniform.
ScenarioConfig short_flows(BaseAlgorithm base) {
    ScenarioConfig c;
    c.topology = desk_swdc(10.0, 1.0);
    c.topology.shortcuts_per_node = 1;
    auto gold = priority_policy("gold", Mode::clone, 300.0, 0.48);
    gold.adaptive_replicate_following = true;
    c.policies.push_back(gold);
    c.policies.push_back(normal_policy(1000.0));
    c.engine.base = base;

    auto hot = group("hot_priority", 200, 10, 0.0, "gold");
    hot.release.kind = ReleaseKind::periodic;
    hot.release.start_ms = 0.0;
    hot.release.period_ms = 100.0;
    hot.endpoints.kind = EndpointKind::pair_pool;
    hot.endpoints.pool_size = 4;
    auto background = group("background", 2000, 10, 0.0, "normal");
    background.release = uniform(0.0, 20000.0);
    c.workload = {hot, background};
    return c;
}

}  // namespace

std::vector<std::string> recipe_names() {
    return {"long_flows_divert", "long_flows_clone", "short_flows_clone_replicate", "ecmp_clone_replicate"};
}

ScenarioConfig recipe(const std::string& name) {
    if (name == "long_flows_divert") return long_flows(Mode::divert, 0.48);
    if (name == "long_flows_clone") return long_flows(Mode::clone, 0.5);
    if (name == "short_flows_clone_replicate" || name == "ecmp_clone_replicate") {
        auto c = short_flows(name == "ecmp_clone_replicate" ? BaseAlgorithm::ecmp : BaseAlgorithm::shortest_path);
        RandomCongestion rc;
        rc.count = 1;
        rc.placement = Placement::priority_path;
        rc.slowdown = 10.0;
        c.congestion.random.push_back(rc);
        return c;
    }
    std::string known;
    for (const auto& n : recipe_names()) known += (known.empty() ? "" : ", ") + n;
    throw ValidationError({"unknown recipe '" + name + "' (known: " + known + ")"});
}

}  // namespace slasim
