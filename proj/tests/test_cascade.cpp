#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <map>
#include <set>
#include <vector>

#include "hfsim/cascade.hpp"
#include "hfsim/netmodel.hpp"
#include "support/cascade_oracle.hpp"
#include "support/fixtures.hpp"

using namespace hfsim;
using cascade::CascadeTrace;
using cascade::EventCause;
using cascade::LatentFailure;
using cascade::ScenarioSpec;

namespace {

const char* kFixtures[] = {"triangle.json", "twobus.json",  "parallel.json",
                           "idaho.json",    "path4.json",   "mls3.json"};

ScenarioSpec branch_fault(int id) {
    ScenarioSpec spec;
    spec.initiating_fault = {ElementKind::BRANCH, id};
    return spec;
}

// Trace-wide sanity: steps never go backwards, trip events agree with the
// tripped set, the terminal case balances per island.
void check_trace_invariants(const GridCase& c, const CascadeTrace& t, int max_steps) {
    int last_step = 0;
    std::set<int> tripped_in_events;
    for (const auto& ev : t.events) {
        CHECK(ev.step >= last_step);
        last_step = ev.step;
        const bool is_trip = ev.cause == EventCause::CORRECT_CLEARING ||
                             ev.cause == EventCause::REMOTE_BACKUP ||
                             ev.cause == EventCause::MISOPERATION ||
                             ev.cause == EventCause::BREAKER_FAILURE_SPREAD ||
                             ev.cause == EventCause::OVERLOAD_TRIP ||
                             (ev.cause == EventCause::INITIATING_FAULT &&
                              ev.element.kind == ElementKind::BRANCH &&
                              ev.detail == "forced outage");
        if (is_trip) CHECK(tripped_in_events.insert(ev.element.id).second);
    }
    CHECK(tripped_in_events == t.tripped_branches);
    CHECK(t.lines_tripped == static_cast<int>(t.tripped_branches.size()));
    CHECK(t.depth >= 1);
    CHECK(t.depth <= max_steps);
    if (t.truncated) CHECK(t.depth == max_steps);

    for (const auto& island : islands(t.terminal)) {
        std::set<int> in(island.begin(), island.end());
        double gen = 0.0, load = 0.0;
        for (const auto& g : t.terminal.generators)
            if (in.count(g.bus)) gen += g.p_mw;
        for (const auto& l : t.terminal.loads)
            if (in.count(l.bus)) load += l.p_mw;
        CHECK(gen == doctest::Approx(load).epsilon(1e-9).scale(1.0));
    }
    double lost = c.total_load_mw() - t.terminal.total_load_mw();
    CHECK(t.load_lost_mw == doctest::Approx(lost).epsilon(1e-9).scale(1.0));
}

}  // namespace

TEST_CASE("clean clearing of one parallel line loses nothing") {
    const GridCase c = fixtures::load_case("parallel.json");
    const CascadeTrace t = cascade::run_cascade(c, branch_fault(1));
    CHECK(t.tripped_branches == std::set<int>{1});
    CHECK(t.load_lost_mw == doctest::Approx(0.0));
    CHECK(t.depth == 1);
    CHECK_FALSE(t.truncated);
    check_trace_invariants(c, t, 50);
}

TEST_CASE("latent stuck timer turns a cleared fault into a blackout") {
    const GridCase c = fixtures::load_case("parallel.json");
    ScenarioSpec spec = branch_fault(1);
    spec.hidden_failures = {{2, relay::Component::ZONE2_TIMER,
                             relay::ComponentState::STUCK_CLOSED}};
    const CascadeTrace t = cascade::run_cascade(c, spec);
    CHECK(t.tripped_branches == std::set<int>{1, 2});
    CHECK(t.load_lost_mw == doctest::Approx(100.0));
    check_trace_invariants(c, t, 50);

    bool misoperated = false;
    for (const auto& ev : t.events)
        if (ev.cause == EventCause::MISOPERATION) {
            misoperated = true;
            CHECK(ev.step == 1);
            CHECK(ev.element == ElementRef{ElementKind::BRANCH, 2});
        }
    CHECK(misoperated);
}

TEST_CASE("three parallel lines with a baked-in stuck timer collapse fully") {
    const GridCase c = fixtures::load_case("idaho.json");
    ScenarioSpec spec = branch_fault(1);
    spec.overload_trip_factor = 1.0;
    const CascadeTrace t = cascade::run_cascade(c, spec);

    REQUIRE(t.events.size() == 5);
    CHECK(t.events[0].step == 0);
    CHECK(t.events[0].cause == EventCause::INITIATING_FAULT);
    CHECK(t.events[0].element == ElementRef{ElementKind::BRANCH, 1});
    CHECK(t.events[1].step == 0);
    CHECK(t.events[1].cause == EventCause::CORRECT_CLEARING);
    CHECK(t.events[1].element == ElementRef{ElementKind::BRANCH, 1});
    CHECK(t.events[1].detail == "ZONE123 in-zone trip");
    CHECK(t.events[2].step == 1);
    CHECK(t.events[2].cause == EventCause::MISOPERATION);
    CHECK(t.events[2].element == ElementRef{ElementKind::BRANCH, 2});
    CHECK(t.events[2].detail == "ZONE123 tripped on FORWARD_EXTERNAL_A");
    CHECK(t.events[3].step == 2);
    CHECK(t.events[3].cause == EventCause::OVERLOAD_TRIP);
    CHECK(t.events[3].element == ElementRef{ElementKind::BRANCH, 3});
    CHECK(t.events[3].mw == doctest::Approx(120.0));
    CHECK(t.events[4].step == 3);
    CHECK(t.events[4].cause == EventCause::ISLAND_BLACKOUT);
    CHECK(t.events[4].element == ElementRef{ElementKind::BUS, 2});
    CHECK(t.events[4].mw == doctest::Approx(120.0));

    CHECK(t.load_lost_mw == doctest::Approx(120.0));
    CHECK(t.tripped_branches == std::set<int>{1, 2, 3});
    CHECK(t.depth == 2);
    CHECK_FALSE(t.truncated);
    check_trace_invariants(c, t, 50);

    // The default 1.25 emergency factor changes nothing: 120 MW against a
    // 62.5 MW emergency limit still trips.
    const CascadeTrace def = cascade::run_cascade(c, branch_fault(1));
    CHECK(def.tripped_branches == t.tripped_branches);
    CHECK(def.load_lost_mw == doctest::Approx(120.0));
}

TEST_CASE("failure to trip calls on remote backup around both buses") {
    const GridCase c = fixtures::load_case("mls3.json");
    // Branch 2 (1-3) carries PHASE_COMPARISON; a stuck-deasserted low-set
    // detector on one end makes the in-zone clearing incomplete.
    ScenarioSpec spec = branch_fault(2);
    spec.hidden_failures = {{2, relay::Component::FD_LOW_A,
                             relay::ComponentState::STUCK_DEASSERTED}};
    const CascadeTrace t = cascade::run_cascade(c, spec);
    bool backup = false;
    for (const auto& ev : t.events)
        if (ev.cause == EventCause::REMOTE_BACKUP) backup = true;
    CHECK(backup);
    // Buses 1 and 3 are both cleared out: branches 1 (1-2), 2 (1-3), 3 (3-2).
    CHECK(t.tripped_branches == std::set<int>{1, 2, 3});
    check_trace_invariants(c, t, 50);
}

TEST_CASE("cascade stops at max_steps and reports truncation") {
    const GridCase c = fixtures::load_case("idaho.json");
    ScenarioSpec spec = branch_fault(1);
    spec.overload_trip_factor = 1.0;
    spec.max_steps = 1;
    const CascadeTrace t = cascade::run_cascade(c, spec);
    CHECK(t.truncated);
    CHECK(t.depth == 1);
    // The overload on the last line is detected but never executed.
    CHECK(t.tripped_branches == std::set<int>{1, 2});
    CHECK(t.load_lost_mw == doctest::Approx(0.0));
    check_trace_invariants(c, t, 1);
}

TEST_CASE("forced outages skip relay modeling") {
    const GridCase c = fixtures::load_case("idaho.json");
    ScenarioSpec options;
    const CascadeTrace t = cascade::run_outage(c, {1, 2}, options);
    CHECK(t.tripped_branches == std::set<int>{1, 2, 3});
    CHECK(t.load_lost_mw == doctest::Approx(120.0));
    for (const auto& ev : t.events)
        if (ev.cause == EventCause::INITIATING_FAULT) CHECK(ev.detail == "forced outage");
    check_trace_invariants(c, t, 50);

    GridCase pre = c;
    pre.find_branch(1)->in_service = false;
    const CascadeTrace q = cascade::run_outage(pre, {1}, options);
    CHECK(q.tripped_branches.empty());
    CHECK(q.load_lost_mw == doctest::Approx(0.0));
}

TEST_CASE("fault sets de-duplicate and validate") {
    const GridCase c = fixtures::load_case("idaho.json");
    ScenarioSpec options;
    const CascadeTrace once = cascade::run_cascade(c, branch_fault(1));
    const CascadeTrace twice = cascade::run_fault_set(
        c, {{ElementKind::BRANCH, 1}, {ElementKind::BRANCH, 1}}, options);
    CHECK(once.tripped_branches == twice.tripped_branches);
    CHECK(once.load_lost_mw == doctest::Approx(twice.load_lost_mw));

    CHECK_THROWS_AS(cascade::run_fault_set(c, {}, options), std::invalid_argument);
}

TEST_CASE("scenario validation") {
    const GridCase c = fixtures::load_case("triangle.json");
    ScenarioSpec spec = branch_fault(42);
    CHECK_THROWS_AS(cascade::run_cascade(c, spec), std::invalid_argument);

    GridCase off = c;
    off.find_branch(1)->in_service = false;
    CHECK_THROWS_AS(cascade::run_cascade(off, branch_fault(1)), std::invalid_argument);

    spec = branch_fault(1);
    spec.max_steps = 0;
    CHECK_THROWS_AS(cascade::run_cascade(c, spec), std::invalid_argument);
    spec = branch_fault(1);
    spec.overload_trip_factor = 0.0;
    CHECK_THROWS_AS(cascade::run_cascade(c, spec), std::invalid_argument);
    spec = branch_fault(1);
    spec.rov_depth = -1;
    CHECK_THROWS_AS(cascade::run_cascade(c, spec), std::invalid_argument);

    spec = branch_fault(1);
    spec.hidden_failures = {{99, relay::Component::ZONE2_TIMER,
                             relay::ComponentState::STUCK_CLOSED}};
    CHECK_THROWS_AS(cascade::run_cascade(c, spec), std::invalid_argument);
    spec.hidden_failures = {{2, relay::Component::CHANNEL, relay::ComponentState::FAILED}};
    CHECK_THROWS_AS(cascade::run_cascade(c, spec), std::invalid_argument);
}

TEST_CASE("stimulus enumeration walks the element graph") {
    using relay::FaultLocation;
    const GridCase c = fixtures::load_case("path4.json");
    auto loc = [&](ElementRef fault, int branch, int rov) {
        return cascade::enumerate_stimulus(c, fault, branch, rov).location;
    };
    const ElementRef b1{ElementKind::BRANCH, 1};
    const ElementRef b2{ElementKind::BRANCH, 2};
    const ElementRef b3{ElementKind::BRANCH, 3};
    const ElementRef bus1{ElementKind::BUS, 1};
    const ElementRef bus3{ElementKind::BUS, 3};

    CHECK(loc(b1, 1, 1) == FaultLocation::IN_ZONE);
    CHECK(loc(b1, 1, 0) == FaultLocation::IN_ZONE);   // own zone ignores depth
    CHECK(loc(b2, 1, 0) == FaultLocation::NONE);      // depth zero sees nothing else
    CHECK(loc(b2, 1, 1) == FaultLocation::FORWARD_EXTERNAL_A);
    CHECK(loc(b1, 2, 1) == FaultLocation::FORWARD_EXTERNAL_B);
    CHECK(loc(b3, 1, 1) == FaultLocation::NONE);      // two hops, depth one
    CHECK(loc(b3, 1, 2) == FaultLocation::REVERSE_B); // far past the to_bus end
    CHECK(loc(bus1, 2, 2) == FaultLocation::REVERSE_A);
    CHECK(loc(bus3, 2, 1) == FaultLocation::FORWARD_EXTERNAL_A);

    // Parallel lines share both buses; the tie lands on the to_bus side.
    const GridCase p = fixtures::load_case("idaho.json");
    CHECK(cascade::enumerate_stimulus(p, {ElementKind::BRANCH, 2}, 1, 1).location ==
          FaultLocation::FORWARD_EXTERNAL_A);

    CHECK_THROWS_AS(cascade::enumerate_stimulus(c, {ElementKind::BRANCH, 9}, 1, 1),
                    std::invalid_argument);
    CHECK_THROWS_AS(cascade::enumerate_stimulus(c, b1, 9, 1), std::invalid_argument);
}

TEST_CASE("stimulus enumeration matches the oracle everywhere") {
    for (const char* name : kFixtures) {
        CAPTURE(name);
        const GridCase c = fixtures::load_case(name);
        std::vector<ElementRef> elements;
        for (const auto& b : c.buses) elements.push_back({ElementKind::BUS, b.id});
        for (const auto& br : c.branches)
            if (br.in_service) elements.push_back({ElementKind::BRANCH, br.id});
        for (const auto& fault : elements)
            for (const auto& br : c.branches)
                for (int rov = 0; rov <= 3; ++rov) {
                    const auto lib = cascade::enumerate_stimulus(c, fault, br.id, rov);
                    const auto ref = oracle::oracle_stimulus(c, fault, br.id, rov);
                    CAPTURE(to_string(fault));
                    CAPTURE(br.id);
                    CAPTURE(rov);
                    CHECK(lib.location == ref.location);
                    CHECK(lib.condition == ref.condition);
                }
    }
}

TEST_CASE("traces are deterministic and serialize stably") {
    const GridCase c = fixtures::load_case("idaho.json");
    const ScenarioSpec spec = branch_fault(1);
    const CascadeTrace a = cascade::run_cascade(c, spec);
    const CascadeTrace b = cascade::run_cascade(c, spec);
    CHECK(cascade::events_ndjson(a) == cascade::events_ndjson(b));
    CHECK(cascade::summary_json(a) == cascade::summary_json(b));

    const std::string nd = cascade::events_ndjson(a);
    std::size_t lines = 0;
    for (char ch : nd)
        if (ch == '\n') ++lines;
    CHECK(lines == a.events.size());
    CHECK(nd.find("INITIATING_FAULT") != std::string::npos);
    CHECK(cascade::summary_json(a).find("\"load_lost_mw\"") != std::string::npos);
}

TEST_CASE("engine agrees with the brute-force oracle on every fixture") {
    for (const char* name : kFixtures) {
        CAPTURE(name);
        const GridCase c = fixtures::load_case(name);

        std::vector<ElementRef> faults;
        for (const auto& br : c.branches)
            if (br.in_service) faults.push_back({ElementKind::BRANCH, br.id});
        for (const auto& b : c.buses) faults.push_back({ElementKind::BUS, b.id});

        std::vector<std::vector<LatentFailure>> latent_sets{{}};
        for (const auto& group : c.protection)
            for (const auto& mode : relay::enumerate_hidden_failures(group.scheme))
                latent_sets.push_back({{group.branch, mode.component, mode.state}});

        for (const auto& fault : faults) {
            for (const auto& latents : latent_sets) {
                ScenarioSpec spec;
                spec.initiating_fault = fault;
                spec.hidden_failures = latents;
                const CascadeTrace t = cascade::run_cascade(c, spec);
                const auto ref = oracle::oracle_cascade(c, fault, latents, spec.rov_depth,
                                                        spec.overload_trip_factor,
                                                        spec.max_steps);
                CAPTURE(to_string(fault));
                CAPTURE(latents.empty() ? -1 : latents[0].branch);
                CHECK(t.tripped_branches == ref.tripped);
                CHECK(t.load_lost_mw ==
                      doctest::Approx(ref.load_lost_mw).epsilon(1e-9).scale(1.0));
                CHECK(t.truncated == ref.truncated);
                check_trace_invariants(c, t, spec.max_steps);
            }
        }
    }
}
