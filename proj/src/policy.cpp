#include "slasim/policy.hpp"

#include <algorithm>
#include <cmath>

namespace slasim {

std::vector<std::string> Policy::validate(const std::string& path) const {
    std::vector<std::string> errors;
    auto err = [&](const std::string& key, const std::string& msg) { errors.push_back(path + "." + key + ": " + msg); };
    if (hard_limit <= 0) err("hard_limit_ms", "must be > 0");
    if (!(soft_fraction > 0.0 && soft_fraction < 1.0)) err("soft_fraction", "must be in (0,1)");
    if (fanout < 1) err("fanout", "must be >= 1");
    if (!(per_link_threshold_factor > 1.0)) err("per_link_threshold_factor", "must be > 1");
    if (errors.empty() && soft_limit() >= hard_limit) err("soft_fraction", "soft limit must be below hard limit");
    return errors;
}

bool link_breaches_threshold(const FlowStatus& status, const Policy& policy, LinkKey link) {
    const auto* obs = status.observation(link);
    if (!obs) return false;
    auto baseline = status.mean_transit_excluding(link);
    if (!baseline) return false;
    return static_cast<double>(obs->max) > policy.per_link_threshold_factor * *baseline;
}

TriggerDecision is_threshold_met(const FlowStatus& status, const Policy& policy, SimTime now) {
    TriggerDecision d;
    if (!policy.is_priority() || status.complete() || status.rounds_fired >= status.round_cap) return d;

    if (!status.soft_fired && status.elapsed(now) >= policy.soft_limit()) {
        d.fire = true;
        d.reason = TriggerReason::soft_limit_elapsed;
        d.at_node = status.lead_node;
        d.at_seq = status.delivered().first_missing();
        return d;
    }
    if (policy.trigger_on_slow_link) {
        if (const auto& probe = status.last_probe(); probe && probe->prior_count >= 1 && !status.is_blamed(probe->link) &&
                                                     static_cast<double>(probe->transit) >
                                                         policy.per_link_threshold_factor * probe->prior_mean) {
            d.fire = true;
            d.reason = TriggerReason::slow_link_observed;
            d.at_node = probe->at_node;
            d.at_seq = probe->seq;
            d.link = probe->link;
        }
    }
    return d;
}

bool sla_violated(SimTime release_time, std::optional<SimTime> completion_time, const Policy& policy) {
    if (!completion_time) return true;
    return *completion_time - release_time > policy.hard_limit;
}

bool sla_violated(const FlowStatus& status, const Policy& policy, std::optional<SimTime> completion_time) {
    return sla_violated(status.release_time(), completion_time, policy);
}

void PathViolationRegistry::register_path_violation(NodeId origin, NodeId destination, const Route& route,
                                                    std::vector<LinkKey> avoid, SimTime now) {
    auto& e = entries_[route];
    e.origin = origin;
    e.destination = destination;
    e.route = route;
    for (const auto& l : avoid) {
        if (std::find(e.avoid.begin(), e.avoid.end(), l) == e.avoid.end()) e.avoid.push_back(l);
    }
    e.registered_at = now;
}

const PathViolationRegistry::Entry* PathViolationRegistry::match(NodeId origin, NodeId destination,
                                                                 const Route& route, SimTime now) const {
    auto it = entries_.find(route);
    if (it == entries_.end()) return nullptr;
    const auto& e = it->second;
    if (e.origin != origin || e.destination != destination) return nullptr;
    if (ttl_ && now - e.registered_at > *ttl_) return nullptr;
    return &e;
}

std::string_view to_string(Mode mode) {
    switch (mode) {
        case Mode::divert: return "divert";
        case Mode::clone: return "clone";
        case Mode::replicate: return "replicate";
    }
    return "?";
}

std::string_view to_string(BreakPolicy policy) {
    return policy == BreakPolicy::worst_link ? "worst_link" : "fractional_progress";
}

std::string_view to_string(BreakPointAt at) {
    return at == BreakPointAt::upstream_of_blame ? "upstream_of_blame" : "trigger_location";
}

std::string_view to_string(TriggerReason reason) {
    switch (reason) {
        case TriggerReason::none: return "none";
        case TriggerReason::soft_limit_elapsed: return "soft_limit_elapsed";
        case TriggerReason::slow_link_observed: return "slow_link_observed";
    }
    return "?";
}

std::string_view to_string(Priority priority) { return priority == Priority::priority ? "priority" : "normal"; }

std::optional<Mode> parse_mode(std::string_view text) {
    if (text == "divert") return Mode::divert;
    if (text == "clone") return Mode::clone;
    if (text == "replicate") return Mode::replicate;
    return std::nullopt;
}

std::optional<BreakPolicy> parse_break_policy(std::string_view text) {
    if (text == "worst_link") return BreakPolicy::worst_link;
    if (text == "fractional_progress") return BreakPolicy::fractional_progress;
    return std::nullopt;
}

std::optional<BreakPointAt> parse_break_point_at(std::string_view text) {
    if (text == "upstream_of_blame") return BreakPointAt::upstream_of_blame;
    if (text == "trigger_location") return BreakPointAt::trigger_location;
    return std::nullopt;
}

std::optional<Priority> parse_priority(std::string_view text) {
    if (text == "normal") return Priority::normal;
    if (text == "priority") return Priority::priority;
    return std::nullopt;
}

}  // namespace slasim
