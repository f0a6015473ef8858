#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "slasim/policy.hpp"
#include "slasim/simulator.hpp"
#include "slasim/topology.hpp"

namespace slasim {

// Scenario files are JSON. Times are milliseconds (floating point allowed),
// node ids are integers. docs/scenario-format.md lists every key.

enum class TopologyKind { swdc, edges };

struct EdgeSpec {
    NodeId a = 0;
    NodeId b = 0;
    bool bidirectional = true;
    std::optional<double> latency_ms;
    std::optional<double> capacity;
    friend bool operator==(const EdgeSpec&, const EdgeSpec&) = default;
};

struct TopologySection {
    TopologyKind kind = TopologyKind::swdc;
    std::uint32_t grid_width = 4;
    std::uint32_t grid_height = 4;
    std::uint32_t shortcuts_per_node = 1;
    std::optional<std::uint64_t> seed;  // fixed topology; otherwise derived from the run seed
    double base_latency_ms = 1.0;
    double capacity = 1.0;  // packets per ms
    std::uint32_t nodes = 0;  // edges kind only
    std::vector<EdgeSpec> edges;

    std::uint32_t node_count() const { return kind == TopologyKind::swdc ? grid_width * grid_height : nodes; }
    friend bool operator==(const TopologySection&, const TopologySection&) = default;
};

struct CongestionSpec {
    std::vector<LinkKey> links;
    double slowdown = 2.0;
    double start_ms = 0.0;
    std::optional<double> end_ms;
    friend bool operator==(const CongestionSpec&, const CongestionSpec&) = default;
};

/// priority_route: one random link of a random priority flow's base route.
/// priority_path: every link of a random priority flow's base route.
/// any_link: one uniformly random link.
enum class Placement { priority_route, priority_path, any_link };

/// `count` events placed by `placement`.
struct RandomCongestion {
    std::uint32_t count = 0;
    Placement placement = Placement::priority_route;
    double slowdown = 10.0;
    double start_min_ms = 0.0;
    double start_max_ms = 0.0;
    std::optional<double> duration_ms;
    bool bidirectional = false;
    friend bool operator==(const RandomCongestion&, const RandomCongestion&) = default;
};

struct CongestionSection {
    std::vector<CongestionSpec> events;
    std::vector<RandomCongestion> random;
    friend bool operator==(const CongestionSection&, const CongestionSection&) = default;
};

enum class ReleaseKind { at, uniform, periodic };

struct ReleaseSpec {
    ReleaseKind kind = ReleaseKind::at;
    double at_ms = 0.0;
    double start_ms = 0.0;
    double end_ms = 0.0;
    double period_ms = 0.0;
    friend bool operator==(const ReleaseSpec&, const ReleaseSpec&) = default;
};

enum class EndpointKind { random_pair, fixed, pair_pool };

struct EndpointSpec {
    EndpointKind kind = EndpointKind::random_pair;
    NodeId origin = 0;
    NodeId destination = 0;
    std::uint32_t pool_size = 1;
    friend bool operator==(const EndpointSpec&, const EndpointSpec&) = default;
};

struct FlowGroup {
    std::string name = "flows";
    std::uint32_t count = 0;
    std::uint32_t length = 1;
    double send_interval_ms = 0.0;
    std::string policy;
    ReleaseSpec release;
    EndpointSpec endpoints;
    friend bool operator==(const FlowGroup&, const FlowGroup&) = default;
};

struct EngineSection {
    BaseAlgorithm base = BaseAlgorithm::shortest_path;
    CostMetric cost = CostMetric::hop_count;
    std::uint32_t ecmp_max_paths = static_cast<std::uint32_t>(kDefaultEcmpMaxPaths);
    bool enhance = true;
    double controller_latency_ms = 100.0;
    std::optional<double> horizon_ms;
    std::uint32_t max_rounds = 2;
    std::optional<double> registry_ttl_ms;
    friend bool operator==(const EngineSection&, const EngineSection&) = default;
};

struct ScenarioConfig {
    TopologySection topology;
    CongestionSection congestion;
    std::vector<Policy> policies;
    std::vector<FlowGroup> workload;
    EngineSection engine;
    friend bool operator==(const ScenarioConfig&, const ScenarioConfig&) = default;
};

/// Parses and validates. Throws ValidationError listing every problem
/// (parse errors carry line:column, semantic errors a key path).
ScenarioConfig parse_scenario(const std::string& text);
ScenarioConfig load_scenario(const std::string& path);

/// Semantic checks only; empty when valid.
std::vector<std::string> validate_scenario(const ScenarioConfig& config);

/// Full JSON including defaults; parse_scenario(serialize_scenario(c)) == c.
std::string serialize_scenario(const ScenarioConfig& config);

/// Everything one run needs, drawn from the per-concern generators.
struct ScenarioInstance {
    Topology topology{0};
    std::vector<Policy> policies;
    std::vector<FlowSpec> flows;
    EngineConfig engine;
};

ScenarioInstance instantiate(const ScenarioConfig& config, std::uint64_t seed);

RunResult run_scenario(const ScenarioConfig& config, std::uint64_t seed);

/// Same scenario with the enhancer forced on or off.
ScenarioConfig with_enhancement(ScenarioConfig config, bool enhance);
ScenarioConfig without_congestion(ScenarioConfig config);

struct SeedRun {
    std::uint64_t seed = 0;
    RunResult result;               // as configured, or enhanced in compare mode
    std::optional<RunResult> base;  // compare mode only
};

struct Containment {
    std::uint64_t seed = 0;
    std::vector<FlowId> violated_only_enhanced;  // do-no-harm counterexamples
    std::vector<FlowId> avoided;                 // violated in base only
};

struct BatchResult {
    std::vector<SeedRun> runs;  // in the order the seeds were given
    RunSummary aggregate;
    std::optional<RunSummary> base_aggregate;
    std::vector<Containment> containment;
};

/// Runs every seed, up to `parallelism` at a time. The output depends only
/// on the seeds, never on scheduling.
BatchResult run_batch(const ScenarioConfig& config, const std::vector<std::uint64_t>& seeds, unsigned parallelism,
                      bool compare);

std::string batch_summary_text(const BatchResult& batch);
std::string containment_text(const BatchResult& batch);

/// "1..10", "3", "1,2,7" or combinations like "1..3,9".
std::vector<std::uint64_t> parse_seed_list(const std::string& text);

std::vector<std::string> recipe_names();
ScenarioConfig recipe(const std::string& name);

}  // namespace slasim
