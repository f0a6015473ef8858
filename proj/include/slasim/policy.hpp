#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "slasim/flow.hpp"
#include "slasim/types.hpp"

namespace slasim {

enum class Mode { divert, clone, replicate };
enum class BreakPolicy { worst_link, fractional_progress };
enum class BreakPointAt { upstream_of_blame, trigger_location };

/// SLA policy; soft limit = hard limit x soft_fraction.
struct Policy {
    std::string name = "default";
    Priority priority = Priority::normal;
    SimTime hard_limit = from_ms(1000);
    double soft_fraction = 0.5;
    Mode mode = Mode::clone;
    std::uint32_t fanout = 1;
    BreakPolicy break_policy = BreakPolicy::worst_link;
    BreakPointAt break_point_at = BreakPointAt::upstream_of_blame;
    bool adaptive_replicate_following = false;
    double per_link_threshold_factor = 3.0;
    bool trigger_on_slow_link = true;
    bool replicate_drop_original = false;

    SimTime soft_limit() const {
        return static_cast<SimTime>(std::llround(static_cast<double>(hard_limit) * soft_fraction));
    }
    bool is_priority() const { return priority == Priority::priority; }

    /// Invariant violations, each prefixed with `path`.
    std::vector<std::string> validate(const std::string& path) const;

    friend bool operator==(const Policy&, const Policy&) = default;
};

enum class TriggerReason { none, soft_limit_elapsed, slow_link_observed };

struct TriggerDecision {
    bool fire = false;
    TriggerReason reason = TriggerReason::none;
    NodeId at_node = 0;
    std::uint32_t at_seq = 0;
    std::optional<LinkKey> link;  // the slow link for slow_link_observed
};

/// Rules-manager guard. Normal-priority flows never fire; otherwise fires on
/// an elapsed soft limit (once per flow) or on a newly observed slow link,
/// within the round cap held by the status.
TriggerDecision is_threshold_met(const FlowStatus& status, const Policy& policy, SimTime now);

/// Links whose worst observed transit exceeds the policy factor times the
/// mean transit over the flow's other links.
bool link_breaches_threshold(const FlowStatus& status, const Policy& policy, LinkKey link);

/// Strictly later than the hard limit, or never completed.
bool sla_violated(SimTime release_time, std::optional<SimTime> completion_time, const Policy& policy);
bool sla_violated(const FlowStatus& status, const Policy& policy, std::optional<SimTime> completion_time);

/// Routes that recently exposed a violation, keyed on the exact base route.
class PathViolationRegistry {
public:
    struct Entry {
        NodeId origin = 0;
        NodeId destination = 0;
        Route route;
        std::vector<LinkKey> avoid;  // links replicas must not use
        SimTime registered_at = 0;
    };

    explicit PathViolationRegistry(std::optional<SimTime> ttl = std::nullopt) : ttl_(ttl) {}

    void register_path_violation(NodeId origin, NodeId destination, const Route& route, std::vector<LinkKey> avoid,
                                 SimTime now);
    const Entry* match(NodeId origin, NodeId destination, const Route& route, SimTime now) const;
    std::size_t size() const noexcept { return entries_.size(); }
    bool empty() const noexcept { return entries_.empty(); }

private:
    std::optional<SimTime> ttl_;
    std::map<Route, Entry> entries_;
};

std::string_view to_string(Mode mode);
std::string_view to_string(BreakPolicy policy);
std::string_view to_string(BreakPointAt at);
std::string_view to_string(TriggerReason reason);
std::string_view to_string(Priority priority);

std::optional<Mode> parse_mode(std::string_view text);
std::optional<BreakPolicy> parse_break_policy(std::string_view text);
std::optional<BreakPointAt> parse_break_point_at(std::string_view text);
std::optional<Priority> parse_priority(std::string_view text);

}  // namespace slasim
