#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "hfsim/relays.hpp"
#include "support/relay_oracle.hpp"

using namespace hfsim::relay;

namespace {

const SchemeKind kAllSchemes[] = {
    SchemeKind::DCB,     SchemeKind::DCUB,          SchemeKind::PUTT,
    SchemeKind::POTT,    SchemeKind::ZONE123,       SchemeKind::PHASE_COMPARISON,
    SchemeKind::DIRECTIONAL_GROUND, SchemeKind::DIFFERENTIAL, SchemeKind::BREAKER_FAILURE};

// Every health assignment a scheme admits: each component OK or in one of
// its credible failure states.
std::vector<ComponentHealth> all_healths(SchemeKind k) {
    std::vector<ComponentHealth> out{ComponentHealth(k)};
    for (const auto& spec : scheme_components(k)) {
        std::vector<ComponentHealth> next;
        for (const auto& base : out) {
            next.push_back(base);
            for (ComponentState s : spec.failure_states) {
                ComponentHealth h = base;
                h.set(spec.component, s);
                next.push_back(h);
            }
        }
        out = std::move(next);
    }
    return out;
}

std::vector<FaultStimulus> all_stimuli() {
    std::vector<FaultStimulus> out;
    const FaultLocation locs[] = {FaultLocation::NONE,
                                  FaultLocation::IN_ZONE,
                                  FaultLocation::FORWARD_EXTERNAL_A,
                                  FaultLocation::FORWARD_EXTERNAL_B,
                                  FaultLocation::REVERSE_A,
                                  FaultLocation::REVERSE_B};
    const FaultCondition conds[] = {FaultCondition::FAULT, FaultCondition::HIGH_LOAD,
                                    FaultCondition::ENERGIZATION};
    for (FaultLocation l : locs)
        for (FaultCondition c : conds) out.push_back({l, c});
    return out;
}

std::string describe(SchemeKind k, const ComponentHealth& h, FaultStimulus s) {
    std::string text = std::string(to_string(k));
    for (const auto& [c, st] : h.overrides())
        text += " " + std::string(to_string(c)) + "=" + std::string(to_string(st));
    text += " @ " + std::string(to_string(s.location)) + "/" +
            std::string(to_string(s.condition));
    return text;
}

}  // namespace

TEST_CASE("every health and stimulus matches the independent oracle") {
    int combos = 0;
    for (SchemeKind k : kAllSchemes) {
        for (const auto& h : all_healths(k)) {
            for (const auto& stim : all_stimuli()) {
                const TripDecision lib = evaluate_scheme(k, h, stim);
                const TripDecision ref = oracle::oracle_decide(k, h, stim);
                ++combos;
                CAPTURE(describe(k, h, stim));
                CHECK(lib.trip_a == ref.trip_a);
                CHECK(lib.trip_b == ref.trip_b);
                CHECK(lib.classification == ref.classification);
                CHECK(lib.delay == ref.delay);
                CHECK(lib.transfer_trip_end == ref.transfer_trip_end);
            }
        }
    }
    // 9 schemes, all of them with at least the healthy assignment.
    CHECK(combos > 9 * 18);
}

TEST_CASE("hand-worked decisions hold") {
    for (const auto& row : oracle::relay_expectations()) {
        ComponentHealth h(row.scheme);
        for (const auto& o : row.overrides) h.set(o.component, o.state);
        const FaultStimulus stim{row.location, row.condition};
        CAPTURE(describe(row.scheme, h, stim));

        const TripDecision lib = evaluate_scheme(row.scheme, h, stim);
        CHECK(lib.trip_a == row.trip_a);
        CHECK(lib.trip_b == row.trip_b);
        CHECK(lib.classification == row.classification);
        CHECK(lib.transfer_trip_end.has_value() == row.transfer_a);
        if (row.transfer_a) CHECK(*lib.transfer_trip_end == LineEnd::A);

        const TripDecision ref = oracle::oracle_decide(row.scheme, h, stim);
        CHECK(ref.trip_a == row.trip_a);
        CHECK(ref.trip_b == row.trip_b);
        CHECK(ref.classification == row.classification);
    }
}

TEST_CASE("healthy schemes are secure and dependable") {
    for (SchemeKind k : kAllSchemes) {
        const ComponentHealth healthy(k);
        for (const auto& stim : all_stimuli()) {
            CAPTURE(describe(k, healthy, stim));
            const TripDecision d = evaluate_scheme(k, healthy, stim);
            CHECK(d.classification != Classification::MISOPERATION);
            if (stim.location == FaultLocation::IN_ZONE) {
                CHECK(d.trip_a);
                CHECK(d.trip_b);
                CHECK(d.classification == Classification::CORRECT_TRIP);
            }
        }
    }
}

TEST_CASE("single latent failures stay dormant on a quiet system") {
    const FaultStimulus quiet{FaultLocation::NONE, FaultCondition::FAULT};
    for (SchemeKind k : kAllSchemes) {
        for (const auto& mode : enumerate_hidden_failures(k)) {
            ComponentHealth h(k);
            h.set(mode.component, mode.state);
            CAPTURE(describe(k, h, quiet));
            const TripDecision d = evaluate_scheme(k, h, quiet);
            CHECK_FALSE(d.trip_a);
            CHECK_FALSE(d.trip_b);
            CHECK_FALSE(d.transfer_trip_end.has_value());
        }
    }
}

TEST_CASE("no failure mode is vacuous") {
    // Every catalogued mode must change behaviour for the worse under some
    // stimulus: a wrong trip, a missed trip, or a breaker-failure spread
    // the healthy scheme would not order.
    for (SchemeKind k : kAllSchemes) {
        const ComponentHealth healthy(k);
        for (const auto& mode : enumerate_hidden_failures(k)) {
            ComponentHealth h(k);
            h.set(mode.component, mode.state);
            bool harmful = false;
            for (const auto& stim : all_stimuli()) {
                const TripDecision d = evaluate_scheme(k, h, stim);
                if (d.classification == Classification::MISOPERATION ||
                    d.classification == Classification::FAILURE_TO_TRIP) {
                    harmful = true;
                    break;
                }
                const TripDecision base = evaluate_scheme(k, healthy, stim);
                if (d.transfer_trip_end && !base.transfer_trip_end) {
                    harmful = true;
                    break;
                }
            }
            CAPTURE(describe(k, h, {FaultLocation::NONE, FaultCondition::FAULT}));
            CHECK(harmful);
        }
    }
}

TEST_CASE("failure mode counts per relay technology") {
    auto total = [](Profile p) {
        std::size_t n = 0;
        for (SchemeKind k : kAllSchemes) n += modes_for_profile(k, p).size();
        return n;
    };
    std::size_t electromechanical = 0;
    for (SchemeKind k : kAllSchemes) electromechanical += enumerate_hidden_failures(k).size();
    CHECK(electromechanical == 25);
    CHECK(total(Profile::ELECTROMECHANICAL) == 25);
    CHECK(total(Profile::DIGITAL) == 10);
    CHECK(total(Profile::DIGITAL_WITH_MONITORING) == 3);

    std::set<std::tuple<SchemeKind, Component, ComponentState>> survivors;
    for (SchemeKind k : kAllSchemes)
        for (const auto& m : modes_for_profile(k, Profile::DIGITAL_WITH_MONITORING))
            survivors.insert({m.scheme, m.component, m.state});
    const std::set<std::tuple<SchemeKind, Component, ComponentState>> expected{
        {SchemeKind::DCB, Component::CHANNEL, ComponentState::FAILED},
        {SchemeKind::PHASE_COMPARISON, Component::CHANNEL, ComponentState::FAILED},
        {SchemeKind::BREAKER_FAILURE, Component::STATUS_CONTACTS, ComponentState::SHORTED},
    };
    CHECK(survivors == expected);
}

TEST_CASE("profile pruning removes only what it should") {
    for (SchemeKind k : kAllSchemes) {
        const auto em = enumerate_hidden_failures(k);
        const auto digital = modes_for_profile(k, Profile::DIGITAL);
        const auto monitored = modes_for_profile(k, Profile::DIGITAL_WITH_MONITORING);
        // Each profile keeps a subset of the previous one.
        for (const auto& m : digital) {
            CHECK_FALSE(m.absent_in_digital);
            CHECK(std::find(em.begin(), em.end(), m) != em.end());
        }
        for (const auto& m : monitored) {
            CHECK(m.detectability == Detectability::UNDETECTABLE);
            CHECK(std::find(digital.begin(), digital.end(), m) != digital.end());
        }
    }
}

TEST_CASE("detectability classification") {
    CHECK(detectability(SchemeKind::DCUB, Component::RECEIVER_A, ComponentState::STUCK_UNBLOCK) ==
          Detectability::MONITORING);
    CHECK(detectability(SchemeKind::BREAKER_FAILURE, Component::STATUS_CONTACTS,
                        ComponentState::SHORTED) == Detectability::UNDETECTABLE);
    CHECK(detectability(SchemeKind::ZONE123, Component::ZONE2_TIMER,
                        ComponentState::STUCK_CLOSED) == Detectability::UNDETECTABLE);
    CHECK(detectability(SchemeKind::DCB, Component::CHANNEL, ComponentState::FAILED) ==
          Detectability::UNDETECTABLE);
    CHECK(detectability(SchemeKind::DIRECTIONAL_GROUND, Component::POLARIZING,
                        ComponentState::LOST) == Detectability::MONITORING);
    CHECK_THROWS_AS(
        detectability(SchemeKind::DCB, Component::RECEIVER_A, ComponentState::STUCK_UNBLOCK),
        std::invalid_argument);
    CHECK_THROWS_AS(
        detectability(SchemeKind::DIFFERENTIAL, Component::RESTRAINT, ComponentState::FAILED),
        std::invalid_argument);

    // Mechanical mechanisms disappear in digital hardware; channel and
    // breaker-side failures do not.
    bool z2_absent = false;
    for (const auto& m : enumerate_hidden_failures(SchemeKind::ZONE123))
        if (m.component == Component::ZONE2_TIMER) z2_absent = m.absent_in_digital;
    CHECK(z2_absent);
    for (const auto& m : enumerate_hidden_failures(SchemeKind::DCB))
        if (m.component == Component::CHANNEL) CHECK_FALSE(m.absent_in_digital);
}

TEST_CASE("component health rejects foreign components and states") {
    ComponentHealth h(SchemeKind::ZONE123);
    CHECK(h.all_ok());
    CHECK_THROWS_AS(h.set(Component::CHANNEL, ComponentState::FAILED), std::invalid_argument);
    CHECK_THROWS_AS(h.set(Component::ZONE2_TIMER, ComponentState::FAILED),
                    std::invalid_argument);
    h.set(Component::ZONE2_TIMER, ComponentState::STUCK_CLOSED);
    CHECK_FALSE(h.all_ok());
    CHECK(h.state(Component::ZONE2_TIMER) == ComponentState::STUCK_CLOSED);
    CHECK(h.state(Component::ZONE3_TIMER) == ComponentState::OK);
    h.set(Component::ZONE2_TIMER, ComponentState::OK);
    CHECK(h.all_ok());
}

TEST_CASE("names round-trip through the parsers") {
    for (SchemeKind k : kAllSchemes) {
        CHECK(parse_scheme(to_string(k)) == k);
        for (const auto& spec : scheme_components(k)) {
            CHECK(parse_component(to_string(spec.component)) == spec.component);
            for (ComponentState s : spec.failure_states)
                CHECK(parse_state(to_string(s)) == s);
        }
    }
    CHECK(parse_profile(to_string(Profile::DIGITAL)) == Profile::DIGITAL);
    CHECK_THROWS_AS(parse_scheme("MHO"), std::invalid_argument);
    CHECK_THROWS_AS(parse_component("frobnicator"), std::invalid_argument);
    CHECK_THROWS_AS(parse_state("WEDGED"), std::invalid_argument);
    CHECK_THROWS_AS(parse_profile("ANALOG"), std::invalid_argument);
}
