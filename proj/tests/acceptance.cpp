// Acceptance run: one PASS/FAIL line per criterion, exit status 1 on any FAIL.
//
//   slasim_acceptance [--only N[,N...]]

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstring>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "oracle.hpp"
#include "slasim/scenario.hpp"

#ifndef SLASIM_SOURCE_DIR
#define SLASIM_SOURCE_DIR "."
#endif

using namespace slasim;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

std::vector<std::uint64_t> seeds_1_to(std::uint64_t n) {
    std::vector<std::uint64_t> out;
    for (std::uint64_t s = 1; s <= n; ++s) out.push_back(s);
    return out;
}

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, double a) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), f, a);
    return buf;
}

double median(std::vector<double> v) {
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    const auto n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::uint64_t copies_per_seq(const ActionSummary& a) {
    switch (a.mode) {
        case Mode::divert: return a.fanout - 1;
        case Mode::clone: return a.fanout;
        case Mode::replicate: return a.drop_original ? a.fanout - 1 : a.fanout;
    }
    return 0;
}

// Completion of every flow with the enhancer is no later than under base.
std::uint64_t timing_violations(const std::vector<MetricsRecord>& enhanced, const std::vector<MetricsRecord>& base) {
    std::uint64_t bad = 0;
    for (std::size_t i = 0; i < enhanced.size(); ++i) {
        const auto& s = enhanced[i];
        const auto& b = base[i];
        if (s.flow_id != b.flow_id) return enhanced.size();
        if (!b.completed) continue;
        if (!s.completed || *s.completed > *b.completed) ++bad;
    }
    return bad;
}

// ---- 1 -------------------------------------------------------------------

Outcome no_trigger_equivalence() {
    const auto start = Clock::now();
    std::uint64_t pairs = 0, mismatches = 0, triggers = 0;
    for (const auto& name : recipe_names()) {
        const auto idle = without_congestion(recipe(name));
        for (auto seed : seeds_1_to(20)) {
            const auto enhanced = run_scenario(with_enhancement(idle, true), seed);
            const auto base = run_scenario(with_enhancement(idle, false), seed);
            ++pairs;
            triggers += enhanced.summary.triggers;
            if (records_to_csv(enhanced.records) != records_to_csv(base.records)) ++mismatches;
        }
    }
    const double t = seconds_since(start);
    return {mismatches == 0 && t < 60.0,
            std::to_string(pairs) + " recipe/seed pairs, " + std::to_string(mismatches) + " CSV mismatches, " +
                std::to_string(triggers) + " triggers, " + fmt("%.1f s", t)};
}

// ---- 2, 3 ------------------------------------------------------------------

struct LongFlowRates {
    std::uint64_t priority = 0;
    std::uint64_t base_violations = 0;
    std::uint64_t enhanced_violations = 0;
    double min_seed_rate = 1.0;
    double max_seed_rate = 0.0;
};

LongFlowRates long_flow_rates(const std::string& name) {
    const auto batch = run_batch(recipe(name), seeds_1_to(20), 1, true);
    LongFlowRates r;
    for (const auto& run : batch.runs) {
        const auto& b = run.base->summary;
        r.priority += b.priority_flows;
        r.base_violations += b.violations_priority;
        r.enhanced_violations += run.result.summary.violations_priority;
        r.min_seed_rate = std::min(r.min_seed_rate, b.violation_rate);
        r.max_seed_rate = std::max(r.max_seed_rate, b.violation_rate);
    }
    return r;
}

double rate(std::uint64_t n, std::uint64_t d) { return d ? static_cast<double>(n) / static_cast<double>(d) : 0.0; }

Outcome base_violation_shape(const LongFlowRates& r) {
    const double v = rate(r.base_violations, r.priority);
    return {v >= 0.20 && v <= 0.45, "long_flows_divert base violation " + fmt("%.1f%%", 100 * v) + " over 20 seeds" +
                                        " (per seed " + fmt("%.1f", 100 * r.min_seed_rate) + "-" +
                                        fmt("%.1f%%)", 100 * r.max_seed_rate)};
}

Outcome violation_avoidance(const LongFlowRates& divert, const LongFlowRates& clone) {
    const double rd = 1.0 - rate(divert.enhanced_violations, divert.base_violations);
    const double rc = 1.0 - rate(clone.enhanced_violations, clone.base_violations);
    return {rd >= 0.90 || rc >= 0.90,
            "reduction divert " + fmt("%.1f%%", 100 * rd) + " (" + std::to_string(divert.base_violations) + " -> " +
                std::to_string(divert.enhanced_violations) + "), clone " + fmt("%.1f%%", 100 * rc) + " (" +
                std::to_string(clone.base_violations) + " -> " + std::to_string(clone.enhanced_violations) + ")"};
}

// ---- 4, 6 ------------------------------------------------------------------

struct KeepOriginalRuns {
    std::uint64_t seeds = 0;
    std::uint64_t counterexamples = 0;
    std::uint64_t avoided = 0;
    std::uint64_t late_flows = 0;
    std::uint64_t flows = 0;
    std::uint64_t enhanced = 0;
};

KeepOriginalRuns keep_original_recipes() {
    KeepOriginalRuns k;
    for (const char* name : {"long_flows_clone", "short_flows_clone_replicate", "ecmp_clone_replicate"}) {
        const auto batch = run_batch(recipe(name), seeds_1_to(20), 1, true);
        for (const auto& c : batch.containment) {
            ++k.seeds;
            k.counterexamples += c.violated_only_enhanced.size();
            k.avoided += c.avoided.size();
        }
        for (const auto& run : batch.runs) {
            k.flows += run.result.records.size();
            k.enhanced += run.result.summary.enhanced_flows;
            k.late_flows += timing_violations(run.result.records, run.base->records);
        }
    }
    return k;
}

Outcome containment(const KeepOriginalRuns& k) {
    return {k.counterexamples == 0, std::to_string(k.seeds) + " seed runs over 3 keep-original recipes, " +
                                        std::to_string(k.counterexamples) + " counterexamples, " +
                                        std::to_string(k.avoided) + " violations avoided"};
}

// ---- 5 (and random cases for 6) -------------------------------------------

ScenarioConfig random_small(std::mt19937_64& rng) {
    auto uni = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
    auto real = [&](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); };
    ScenarioConfig c;
    c.topology.kind = TopologyKind::swdc;
    do {
        c.topology.grid_width = static_cast<std::uint32_t>(uni(2, 4));
        c.topology.grid_height = static_cast<std::uint32_t>(uni(2, 4));
    } while (c.topology.grid_width * c.topology.grid_height < 4);
    c.topology.shortcuts_per_node = static_cast<std::uint32_t>(uni(0, 2));
    c.topology.capacity = real(0.5, 2.0);

    Policy gold;
    gold.name = "gold";
    gold.priority = Priority::priority;
    gold.mode = static_cast<Mode>(uni(0, 2));
    gold.fanout = static_cast<std::uint32_t>(uni(1, 3));
    gold.hard_limit = from_ms(uni(8, 60));
    gold.soft_fraction = real(0.2, 0.8);
    gold.trigger_on_slow_link = uni(0, 1) == 1;
    gold.adaptive_replicate_following = uni(0, 1) == 1;
    gold.break_policy = static_cast<BreakPolicy>(uni(0, 1));
    gold.break_point_at = static_cast<BreakPointAt>(uni(0, 1));
    Policy normal;
    normal.name = "normal";
    normal.hard_limit = from_ms(1000);
    c.policies = {gold, normal};

    const int priority_count = uni(1, 40);
    const int normal_count = uni(0, 100 - priority_count);
    FlowGroup p;
    p.name = "p";
    p.count = static_cast<std::uint32_t>(priority_count);
    p.length = static_cast<std::uint32_t>(uni(1, 30));
    p.send_interval_ms = real(0.0, 2.0);
    p.policy = "gold";
    p.release.kind = ReleaseKind::uniform;
    p.release.end_ms = real(0.0, 80.0);
    if (uni(0, 2) == 0) {
        p.endpoints.kind = EndpointKind::pair_pool;
        p.endpoints.pool_size = static_cast<std::uint32_t>(uni(1, 3));
    }
    FlowGroup n;
    n.name = "n";
    n.count = static_cast<std::uint32_t>(normal_count);
    n.length = static_cast<std::uint32_t>(uni(1, 10));
    n.policy = "normal";
    n.release.kind = ReleaseKind::uniform;
    n.release.end_ms = 100.0;
    c.workload = {p, n};

    RandomCongestion rc;
    rc.count = static_cast<std::uint32_t>(uni(1, 4));
    rc.placement = static_cast<Placement>(uni(0, 2));
    rc.slowdown = real(2.0, 30.0);
    rc.start_min_ms = 0.0;
    rc.start_max_ms = real(0.0, 40.0);
    if (uni(0, 1)) rc.duration_ms = real(5.0, 100.0);
    rc.bidirectional = uni(0, 1) == 1;
    c.congestion.random = {rc};

    c.engine.controller_latency_ms = real(0.0, 5.0);
    c.engine.max_rounds = static_cast<std::uint32_t>(uni(1, 3));
    if (uni(0, 3) == 0) c.engine.base = BaseAlgorithm::ecmp;
    return c;
}

struct SmallRuns {
    std::uint64_t scenarios = 0;
    std::map<Mode, std::uint64_t> enhanced_by_mode;
    std::uint64_t count_mismatches = 0;
    std::uint64_t flows_checked = 0;
    std::uint64_t conservation_failures = 0;
    std::uint64_t keep_original_flows = 0;
    std::uint64_t late_flows = 0;
    std::string first_mismatch;
};

SmallRuns random_small_scenarios() {
    SmallRuns s;
    std::mt19937_64 rng(20240611);
    for (int i = 0; i < 600; ++i) {
        const auto config = random_small(rng);
        const std::uint64_t seed = rng();
        const auto enhanced = run_scenario(config, seed);
        ++s.scenarios;
        const auto& st = enhanced.stats;
        if (st.packets_created != st.packets_delivered + st.packets_dropped + st.packets_in_flight) {
            ++s.conservation_failures;
        }
        for (const auto& rec : enhanced.records) {
            if (rec.actions.empty()) continue;
            ++s.flows_checked;
            std::uint64_t expected = 0;
            for (const auto& a : rec.actions) {
                if (!a.activated) continue;
                ++s.enhanced_by_mode[a.mode];
                // s*L is the number of seqs the rule reached
                expected += copies_per_seq(a) * a.affected_seqs;
            }
            if (expected != rec.duplicates) {
                ++s.count_mismatches;
                if (s.first_mismatch.empty()) {
                    s.first_mismatch = "scenario " + std::to_string(i) + " flow " + std::to_string(rec.flow_id.value) +
                                       ": duplicates " + std::to_string(rec.duplicates) + " vs " +
                                       std::to_string(expected);
                }
            }
        }
        if (config.policies[0].mode != Mode::divert) {
            const auto base = run_scenario(with_enhancement(config, false), seed);
            s.keep_original_flows += enhanced.records.size();
            s.late_flows += timing_violations(enhanced.records, base.records);
        }
    }
    return s;
}

Outcome overhead_accounting(const SmallRuns& s) {
    const bool covered = s.enhanced_by_mode.count(Mode::divert) && s.enhanced_by_mode.count(Mode::clone) &&
                         s.enhanced_by_mode.count(Mode::replicate);
    std::string detail = std::to_string(s.scenarios) + " random scenarios (<=16 nodes, <=100 flows), " +
                         std::to_string(s.flows_checked) + " enhanced flows, actions divert/clone/replicate " +
                         std::to_string(s.enhanced_by_mode.count(Mode::divert) ? s.enhanced_by_mode.at(Mode::divert) : 0) +
                         "/" +
                         std::to_string(s.enhanced_by_mode.count(Mode::clone) ? s.enhanced_by_mode.at(Mode::clone) : 0) +
                         "/" +
                         std::to_string(s.enhanced_by_mode.count(Mode::replicate) ? s.enhanced_by_mode.at(Mode::replicate)
                                                                                  : 0) +
                         ", " + std::to_string(s.count_mismatches) + " count mismatches, " +
                         std::to_string(s.conservation_failures) + " conservation failures";
    if (!s.first_mismatch.empty()) detail += "; first: " + s.first_mismatch;
    return {covered && s.count_mismatches == 0 && s.conservation_failures == 0, detail};
}

Outcome timing_property(const KeepOriginalRuns& k, const SmallRuns& s) {
    return {k.late_flows == 0 && s.late_flows == 0,
            std::to_string(k.flows + s.keep_original_flows) + " flows compared (" + std::to_string(k.enhanced) +
                " enhanced in recipes), " + std::to_string(k.late_flows + s.late_flows) + " finished later than base"};
}

// ---- 7 ---------------------------------------------------------------------

Outcome redundancy_ceiling() {
    const auto config = recipe("long_flows_clone");
    const auto& gold = config.policies.at(0);
    if (gold.mode != Mode::clone || gold.fanout != 1 || gold.soft_fraction != 0.5) {
        return {false, "long_flows_clone is not single clone at soft fraction 0.5"};
    }
    std::uint64_t enhanced = 0, over = 0;
    double worst = 0.0;
    for (auto seed : seeds_1_to(20)) {
        for (const auto& rec : run_scenario(config, seed).records) {
            if (rec.mode() == "none") continue;
            ++enhanced;
            worst = std::max(worst, rec.duplicate_fraction());
            if (rec.duplicate_fraction() > 0.5 + 1.0 / rec.length + 1e-12) ++over;
        }
    }
    return {over == 0 && enhanced > 0, std::to_string(enhanced) + " enhanced flows over 20 seeds, max duplicate fraction " +
                                           fmt("%.3f", worst) + ", " + std::to_string(over) + " above 0.5 + 1/L"};
}

// ---- 8 ---------------------------------------------------------------------

Outcome short_flow_speedup() {
    std::vector<double> base_ms, enhanced_ms;
    std::uint64_t followers = 0, delayed_followers = 0;
    double worst_seed = 1e300;
    for (const char* name : {"short_flows_clone_replicate", "ecmp_clone_replicate"}) {
        const auto config = recipe(name);
        const bool primary = std::strcmp(name, "short_flows_clone_replicate") == 0;
        for (auto seed : seeds_1_to(20)) {
            const auto inst = instantiate(config, seed);
            std::set<LinkKey> congested;
            for (const auto& ev : inst.topology.congestion_events()) congested.insert(ev.links.begin(), ev.links.end());
            const auto enhanced = run_scenario(config, seed);
            const auto base = run_scenario(with_enhancement(config, false), seed);

            std::vector<std::size_t> affected;
            std::map<Route, SimTime> first_registration;
            for (std::size_t i = 0; i < base.records.size(); ++i) {
                const auto& rec = base.records[i];
                if (rec.priority != Priority::priority) continue;
                const auto links = route_links(rec.base_route);
                if (std::none_of(links.begin(), links.end(), [&](const LinkKey& l) { return congested.count(l) > 0; })) {
                    continue;
                }
                affected.push_back(i);
                // any trigger of an adaptive flow registers its base route
                if (const auto t = enhanced.records[i].first_trigger) {
                    auto [it, fresh] = first_registration.emplace(rec.base_route, *t);
                    if (!fresh) it->second = std::min(it->second, *t);
                }
            }
            std::vector<double> b, s;
            for (auto i : affected) {
                b.push_back(to_ms(*base.records[i].routing_time()));
                s.push_back(to_ms(*enhanced.records[i].routing_time()));
                const auto& rec = enhanced.records[i];
                const auto reg = first_registration.find(rec.base_route);
                if (reg == first_registration.end() || rec.released <= reg->second) continue;
                ++followers;
                const bool at_origin = !rec.actions.empty() && rec.actions.front().at_release &&
                                       rec.actions.front().activation_time == rec.released;
                if (!at_origin) ++delayed_followers;
            }
            if (!primary) continue;
            if (!s.empty()) worst_seed = std::min(worst_seed, median(b) / median(s));
            base_ms.insert(base_ms.end(), b.begin(), b.end());
            enhanced_ms.insert(enhanced_ms.end(), s.begin(), s.end());
        }
    }
    const double speedup = enhanced_ms.empty() ? 0.0 : median(base_ms) / median(enhanced_ms);
    return {speedup >= 3.0 && followers > 0 && delayed_followers == 0,
            std::to_string(enhanced_ms.size()) + " affected flows, median " + fmt("%.1f ms", median(base_ms)) + " -> " +
                fmt("%.1f ms", median(enhanced_ms)) + " (" + fmt("%.2fx", speedup) + ", worst seed " +
                fmt("%.2fx)", worst_seed) + "; " + std::to_string(followers) + " flows after registration, " +
                std::to_string(delayed_followers) + " not replicated at origin"};
}

// ---- 9 ---------------------------------------------------------------------

Outcome scale_determinism() {
    const auto config = load_scenario(SLASIM_SOURCE_DIR "/scenarios/scale_1024.json");
    double worst = 0.0;
    std::string first;
    bool identical = true;
    std::uint64_t flows = 0;
    for (int rep = 0; rep < 2; ++rep) {
        const auto start = Clock::now();
        const auto r = run_scenario(config, 7);
        worst = std::max(worst, seconds_since(start));
        flows = r.records.size();
        const auto bytes = records_to_csv(r.records) + summary_to_text(r.summary);
        if (rep == 0) {
            first = bytes;
        } else {
            identical = bytes == first;
        }
    }
    const auto nodes = config.topology.node_count();
    return {identical && worst < 600.0 && nodes == 1024 && flows == 100000,
            std::to_string(nodes) + " nodes, " + std::to_string(flows) + " flows, slowest run " + fmt("%.1f s", worst) +
                (identical ? ", repeat byte-identical" : ", repeat DIFFERS")};
}

// ---- 10 --------------------------------------------------------------------

Outcome oracle_equivalence() {
    std::mt19937_64 rng(99);
    std::uint64_t graphs = 0, queries = 0, mismatches = 0;
    for (int g = 0; g < 1500; ++g) {
        const auto n = static_cast<NodeId>(std::uniform_int_distribution<int>(2, 8)(rng));
        const auto topo = oracle::random_graph(rng, n);
        ++graphs;
        const auto links = topo.links();
        for (CostMetric metric : {CostMetric::hop_count, CostMetric::static_latency}) {
            for (NodeId o = 0; o < n; ++o) {
                for (NodeId d = 0; d < n; ++d) {
                    if (o == d) continue;
                    const auto all = oracle::all_simple_paths(topo, o, d, {}, metric);
                    ++queries;
                    if (all.empty() || shortest_path(topo, o, d, metric) != all.front().route) ++mismatches;

                    std::vector<LinkKey> excluded;
                    for (const auto& l : links) {
                        if (std::uniform_int_distribution<int>(0, 4)(rng) == 0) excluded.push_back(l.key());
                    }
                    const auto k = static_cast<std::size_t>(std::uniform_int_distribution<int>(1, 4)(rng));
                    const auto expect = oracle::all_simple_paths(topo, o, d, excluded, metric);
                    const auto got = alternative_routes(topo, o, d, excluded, k, metric);
                    ++queries;
                    bool same = got.size() == std::min(k, expect.size());
                    for (std::size_t i = 0; same && i < got.size(); ++i) same = got[i] == expect[i].route;
                    if (!same) ++mismatches;
                }
            }
        }
    }
    return {mismatches == 0 && graphs >= 1000, std::to_string(graphs) + " random graphs (2-8 nodes), " +
                                                   std::to_string(queries) + " queries, " +
                                                   std::to_string(mismatches) + " mismatches"};
}

}  // namespace

int main(int argc, char** argv) {
    std::set<int> only;
    for (int i = 1; i + 1 < argc; ++i) {
        if (std::strcmp(argv[i], "--only") == 0) {
            std::string list = argv[i + 1];
            std::size_t pos = 0;
            while (pos < list.size()) {
                only.insert(std::stoi(list.substr(pos)));
                pos = list.find(',', pos);
                if (pos == std::string::npos) break;
                ++pos;
            }
        }
    }
    auto wanted = [&](int n) { return only.empty() || only.count(n) > 0; };

    int failures = 0;
    auto report = [&](int n, const char* title, const Outcome& o) {
        std::printf("criterion %2d %s  %s: %s\n", n, o.pass ? "PASS" : "FAIL", title, o.detail.c_str());
        std::fflush(stdout);
        if (!o.pass) ++failures;
    };

    if (wanted(1)) report(1, "no-trigger equivalence", no_trigger_equivalence());
    if (wanted(2) || wanted(3)) {
        const auto divert = long_flow_rates("long_flows_divert");
        if (wanted(2)) report(2, "base violation shape", base_violation_shape(divert));
        if (wanted(3)) report(3, "violation avoidance", violation_avoidance(divert, long_flow_rates("long_flows_clone")));
    }
    std::optional<KeepOriginalRuns> keep;
    if (wanted(4) || wanted(6)) keep = keep_original_recipes();
    if (wanted(4)) report(4, "do-no-harm containment", containment(*keep));
    std::optional<SmallRuns> small;
    if (wanted(5) || wanted(6)) small = random_small_scenarios();
    if (wanted(5)) report(5, "overhead accounting", overhead_accounting(*small));
    if (wanted(6)) report(6, "clone/replicate timing", timing_property(*keep, *small));
    if (wanted(7)) report(7, "redundancy ceiling", redundancy_ceiling());
    if (wanted(8)) report(8, "short-flow speedup", short_flow_speedup());
    if (wanted(9)) report(9, "determinism and scale", scale_determinism());
    if (wanted(10)) report(10, "routing oracle", oracle_equivalence());
    return failures == 0 ? 0 : 1;
}
