#include <doctest.h>

#include <array>
#include <numeric>

#include "slasim/simulator.hpp"

using namespace slasim;

namespace {

Topology line3(double capacity = 1.0) {
    Topology t(3);
    t.add_link(0, 1, from_ms(1), capacity);
    t.add_link(1, 2, from_ms(1), capacity);
    return t;
}

// Base route 0-1-2-3; 1-4-2 and 1-6-2 bypass (1,2); 1-5-3 bypasses the tail.
Topology ladder() {
    Topology t(7);
    const std::array<std::pair<NodeId, NodeId>, 9> links{
        {{0, 1}, {1, 2}, {2, 3}, {1, 4}, {4, 2}, {1, 5}, {5, 3}, {1, 6}, {6, 2}}};
    for (auto [a, b] : links) t.add_link(a, b);
    return t;
}

Policy gold(Mode mode, std::uint32_t fanout = 1) {
    Policy p;
    p.name = "gold";
    p.priority = Priority::priority;
    p.hard_limit = from_ms(60);
    p.soft_fraction = 0.5;
    p.mode = mode;
    p.fanout = fanout;
    return p;
}

FlowSpec spec(std::uint64_t id, NodeId o, NodeId d, std::uint32_t length, double interval_ms = 0.0,
              double release_ms = 0.0) {
    FlowSpec f;
    f.id = FlowId{id};
    f.origin = o;
    f.destination = d;
    f.length = length;
    f.send_interval = from_ms(interval_ms);
    f.release = from_ms(release_ms);
    return f;
}

EngineConfig engine(bool enhance = true) {
    EngineConfig e;
    e.enhance = enhance;
    e.controller_latency = from_ms(1);
    return e;
}

RunResult run(const Topology& t, const Policy& p, std::vector<FlowSpec> flows, EngineConfig e = engine()) {
    return Simulator(t, {p}, std::move(flows), e).run();
}

void check_conservation(const SimStats& s) {
    CHECK(s.packets_created == s.packets_delivered + s.packets_dropped + s.packets_in_flight);
}

}  // namespace

TEST_CASE("transit arithmetic") {
    Topology t(2);
    t.add_link(0, 1, from_ms(5), 1.0);
    LinkChannel ch;
    auto a = transit_packet(t, 0, ch, 0);
    CHECK(a.entry == 0);
    CHECK(a.arrival == from_ms(5));
    auto b = transit_packet(t, 0, ch, 0);
    CHECK(b.entry == from_ms(1));
    CHECK(b.arrival == from_ms(6));
    auto c = transit_packet(t, 0, ch, from_ms(10));
    CHECK(c.entry == from_ms(10));
    CHECK(ch.next_free == from_ms(11));
}

TEST_CASE("a packet never overtakes one sent earlier on the same link") {
    Topology t(2);
    t.add_link(0, 1, from_ms(5), 1.0);
    t.inject_congestion({{{0, 1}}, 2.0, 0, from_ms(1)});
    LinkChannel ch;
    auto a = transit_packet(t, 0, ch, 0);
    CHECK(a.arrival == from_ms(10));
    CHECK(ch.next_free == from_ms(2));
    auto b = transit_packet(t, 0, ch, 0);
    CHECK(b.entry == from_ms(2));
    CHECK(b.arrival == from_ms(10));  // 7 ms on its own, held behind the first
}

TEST_CASE("hand-computed three-packet flow on a two-hop line") {
    Policy normal;
    SUBCASE("idle, 1 packet/ms") {
        auto r = run(line3(), normal, {spec(0, 0, 2, 3)});
        REQUIRE(r.records.size() == 1);
        CHECK(r.records[0].completed == from_ms(4));
        CHECK(r.records[0].base_route == Route{0, 1, 2});
        check_conservation(r.stats);
    }
    SUBCASE("idle, 0.5 packet/ms") {
        auto r = run(line3(0.5), normal, {spec(0, 0, 2, 3)});
        CHECK(r.records[0].completed == from_ms(6));
    }
    SUBCASE("second hop slowed 3x until 2.5 ms") {
        auto t = line3();
        t.inject_congestion({{{1, 2}}, 3.0, 0, SimTime{2500}});
        auto r = run(t, normal, {spec(0, 0, 2, 3)});
        // p0 enters (1,2) at 1 ms and lands at 4 ms, holding the link until 4 ms;
        // p1 and p2 then cross at full speed.
        CHECK(r.records[0].completed == from_ms(6));
    }
    SUBCASE("paced emission") {
        auto r = run(line3(), normal, {spec(0, 0, 2, 3, 5.0, 1.0)});
        CHECK(r.records[0].released == from_ms(1));
        CHECK(r.records[0].completed == from_ms(13));
        CHECK(r.records[0].routing_time() == from_ms(12));
    }
}

TEST_CASE("hard limit is judged on routing time") {
    auto p = gold(Mode::clone);
    p.hard_limit = from_ms(4);
    auto r = run(line3(), p, {spec(0, 0, 2, 3)}, engine(false));
    CHECK_FALSE(r.records[0].sla_violated);
    p.hard_limit = SimTime{3999};
    r = run(line3(), p, {spec(0, 0, 2, 3)}, engine(false));
    CHECK(r.records[0].sla_violated);
}

TEST_CASE("duplicate counts per mode") {
    struct Case {
        Mode mode;
        std::uint32_t fanout;
    };
    for (auto c : {Case{Mode::divert, 1}, Case{Mode::divert, 2}, Case{Mode::clone, 1}, Case{Mode::clone, 2},
                   Case{Mode::replicate, 1}, Case{Mode::replicate, 2}}) {
        CAPTURE(to_string(c.mode));
        CAPTURE(c.fanout);
        auto t = ladder();
        t.inject_congestion({{{1, 2}}, 20.0, 0, kNever});
        const std::uint32_t L = 20;
        auto r = run(t, gold(c.mode, c.fanout), {spec(0, 0, 3, L, 1.0)});
        const auto& rec = r.records.at(0);
        REQUIRE(rec.completed);
        REQUIRE_FALSE(rec.actions.empty());
        std::uint64_t expected = 0;
        for (const auto& a : rec.actions) {
            REQUIRE(a.activated);
            CHECK(a.fanout == c.fanout);
            const std::uint64_t per_seq = c.mode == Mode::divert ? c.fanout - 1 : c.fanout;
            CHECK(a.extra_copies == per_seq * a.affected_seqs);
            if (c.mode == Mode::replicate) CHECK(a.affected_seqs <= L);
            if (c.mode != Mode::replicate) CHECK(a.affected_seqs == L - a.first_affected_seq);
            expected += a.extra_copies;
        }
        CHECK(rec.duplicates == expected);
        CHECK(r.stats.packets_created == L + expected);
        CHECK(r.stats.packets_delivered == L);
        CHECK(r.stats.break_point_lookups_after_merge == 0);
        check_conservation(r.stats);
    }
}

TEST_CASE("keep-original modes never finish later than the base run") {
    for (Mode mode : {Mode::clone, Mode::replicate}) {
        for (double slowdown : {2.0, 5.0, 30.0}) {
            auto t = ladder();
            t.inject_congestion({{{1, 2}}, slowdown, from_ms(3), from_ms(200)});
            auto out = smart_route(t, spec(4, 0, 3, 30, 1.0), gold(mode, 2), engine());
            REQUIRE(out.overhead.time_overhead);
            CHECK(*out.overhead.time_overhead <= 0);
        }
    }
}

TEST_CASE("smart_route on an idle network changes nothing") {
    auto out = smart_route(ladder(), spec(1, 0, 3, 10), gold(Mode::clone), engine());
    CHECK(out.record.mode() == "none");
    CHECK(out.record.duplicates == 0);
    CHECK(out.overhead.time_overhead == 0);
    CHECK(out.overhead.duplicate_packet_fraction == 0.0);
}

TEST_CASE("divert moves the tail of the flow off the slow link") {
    auto t = ladder();
    t.inject_congestion({{{1, 2}}, 20.0, 0, kNever});
    auto base = run(t, gold(Mode::divert), {spec(0, 0, 3, 20, 1.0)}, engine(false));
    auto enhanced = run(t, gold(Mode::divert), {spec(0, 0, 3, 20, 1.0)});
    CHECK(base.records[0].sla_violated);
    CHECK(enhanced.records[0].mode() == "divert");
    CHECK(enhanced.records[0].duplicates == 0);
    CHECK(*enhanced.records[0].completed < *base.records[0].completed);
    CHECK(enhanced.records[0].actions[0].reason == TriggerReason::slow_link_observed);
    CHECK(enhanced.records[0].actions[0].activation_time ==
          enhanced.records[0].actions[0].trigger_time + from_ms(1));
}

TEST_CASE("normal flows are never enhanced") {
    auto t = ladder();
    t.inject_congestion({{{1, 2}}, 20.0, 0, kNever});
    Policy normal;
    normal.hard_limit = from_ms(10);
    auto r = run(t, normal, {spec(0, 0, 3, 10, 1.0)});
    CHECK(r.records[0].actions.empty());
    CHECK(r.records[0].triggers == 0);
    CHECK(r.records[0].sla_violated);
}

TEST_CASE("adaptive replication applies at release without controller delay") {
    auto t = ladder();
    t.inject_congestion({{{1, 2}}, 20.0, 0, kNever});
    auto p = gold(Mode::clone);
    p.adaptive_replicate_following = true;
    std::vector<FlowSpec> flows;
    for (std::uint64_t i = 0; i < 6; ++i) flows.push_back(spec(i, 0, 3, 10, 1.0, 40.0 * static_cast<double>(i)));
    auto r = run(t, p, flows);
    REQUIRE(r.records[0].actions.size() >= 1);
    const SimTime registered = r.records[0].actions[0].trigger_time;
    bool any_at_release = false;
    for (const auto& rec : r.records) {
        if (rec.released <= registered) continue;
        REQUIRE_FALSE(rec.actions.empty());
        CHECK(rec.actions[0].at_release);
        CHECK(rec.actions[0].mode == Mode::replicate);
        CHECK(rec.actions[0].activation_time == rec.released);
        CHECK(rec.routing_time() <= r.records[0].routing_time());
        any_at_release = true;
    }
    CHECK(any_at_release);
}

TEST_CASE("runs are deterministic") {
    auto t = ladder();
    t.inject_congestion({{{1, 2}}, 7.0, from_ms(2), from_ms(80)});
    std::vector<FlowSpec> flows;
    for (std::uint64_t i = 0; i < 12; ++i) {
        flows.push_back(spec(i, static_cast<NodeId>(i % 2), 3, 8, 0.5, static_cast<double>(i)));
    }
    auto p = gold(Mode::clone, 2);
    auto a = run(t, p, flows);
    auto b = run(t, p, flows);
    CHECK(a.stats.trace_digest == b.stats.trace_digest);
    CHECK(records_to_csv(a.records) == records_to_csv(b.records));
    CHECK(summary_to_text(a.summary) == summary_to_text(b.summary));
}

TEST_CASE("horizon leaves packets in flight and flows incomplete") {
    auto e = engine(false);
    e.horizon = from_ms(2);
    Policy normal;
    auto r = run(line3(), normal, {spec(0, 0, 2, 3)}, e);
    CHECK_FALSE(r.records[0].completed);
    CHECK(r.records[0].sla_violated);
    CHECK(r.stats.packets_in_flight > 0);
    check_conservation(r.stats);
}

TEST_CASE("a simulator runs once") {
    Policy normal;
    auto t = line3();
    Simulator sim(t, {normal}, {spec(0, 0, 2, 1)}, engine());
    sim.run();
    CHECK_THROWS_AS(sim.run(), SimError);
}

TEST_CASE("summary and csv") {
    std::vector<MetricsRecord> recs(3);
    for (std::size_t i = 0; i < recs.size(); ++i) {
        recs[i].flow_id = FlowId{i};
        recs[i].priority = Priority::priority;
        recs[i].length = 10;
        recs[i].completed = from_ms(10.0 * static_cast<double>(i + 1));
    }
    recs[2].sla_violated = true;
    recs[1].duplicates = 5;
    const auto s = summarize(recs);
    CHECK(s.priority_flows == 3);
    CHECK(s.violations_priority == 1);
    CHECK(s.violation_rate == doctest::Approx(1.0 / 3.0));
    CHECK(s.routing_ms_median == doctest::Approx(20.0));
    CHECK(s.routing_ms_p99 == doctest::Approx(30.0));
    CHECK(s.total_duplicate_fraction == doctest::Approx(5.0 / 30.0));
    const auto csv = records_to_csv(recs);
    CHECK(csv.rfind("flow_id,priority,mode,released_ms,completed_ms,routing_ms,sla_violated,triggers,duplicates,"
                    "duplicate_fraction\n",
                    0) == 0);
    CHECK(csv.find("1,priority,none,0.000,20.000,20.000,false,0,5,0.500000\n") != std::string::npos);
}
