#pragma once

#include <compare>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

// Transmission-line protection schemes reduced to steady-state truth tables.
//
// Each scheme guards one branch with a relay at each end: end A at from_bus,
// end B at to_bus.  A stimulus is a fault location relative to the protected
// branch (in zone, just beyond either end, further out on either side, or
// absent) plus a system condition (fault, high load, energization).  Given a
// stimulus and the health of every scheme component, evaluate_scheme() says
// which ends trip, how fast, and whether the outcome was correct.
//
// Conventions used throughout:
//  - FORWARD_EXTERNAL_A is a fault just beyond end A's remote bus (to_bus),
//    i.e. in end A's forward direction but outside the zone; REVERSE_A is a
//    fault behind end A (beyond from_bus, two or more element hops away).
//  - Pilot channels are directional: channel_ab carries signals keyed at A
//    toward B, channel_ba the reverse.  Blocking schemes use one shared
//    "channel" component.
//  - Impedance-measuring elements do not respond to load or energization;
//    current-measuring elements (phase comparison fault detectors, the
//    differential element) do.

namespace hfsim::relay {

enum class SchemeKind {
    DCB,                // directional comparison blocking
    DCUB,               // directional comparison unblocking
    PUTT,               // permissive underreaching transfer trip
    POTT,               // permissive overreaching transfer trip
    ZONE123,            // stepped distance, three zones
    PHASE_COMPARISON,
    DIRECTIONAL_GROUND,
    DIFFERENTIAL,
    BREAKER_FAILURE,
};

enum class Component {
    FWD_DETECTOR_A, FWD_DETECTOR_B,      // forward (overreaching) directional/distance elements
    REV_DETECTOR_A, REV_DETECTOR_B,      // reverse-looking blocking elements
    UNDERREACH_A, UNDERREACH_B,          // zone-1 style underreaching elements
    CHANNEL,                             // shared pilot channel (blocking / phase comparison)
    CHANNEL_AB, CHANNEL_BA,              // directional pilot channels
    RECEIVER_A, RECEIVER_B,              // permissive / unblocking receive logic
    ZONE2_TIMER, ZONE3_TIMER,            // stepped-distance coordination timers
    FD_HIGH_A, FD_HIGH_B,                // phase comparison high-set fault detectors
    FD_LOW_A, FD_LOW_B,                  // phase comparison low-set (keying) fault detectors
    POLARIZING,                          // ground directional polarizing source
    RESTRAINT,                           // differential restraint circuit
    STATUS_CONTACTS,                     // breaker-failure breaker status contacts
};

enum class ComponentState {
    OK,
    STUCK_ASSERTED,      // detector output latched on
    STUCK_DEASSERTED,    // detector output latched off
    FAILED,              // channel dead
    STUCK_UNBLOCK,       // receiver latched in trip-permissive state
    STUCK_CLOSED,        // timer contact latched closed (no coordination delay)
    LOST,                // polarizing source absent
    SHORTED,             // restraint or status contacts bypassed
};

std::string_view to_string(SchemeKind k);
std::string_view to_string(Component c);
std::string_view to_string(ComponentState s);
SchemeKind parse_scheme(std::string_view name);
Component parse_component(std::string_view name);
ComponentState parse_state(std::string_view name);

struct ComponentSpec {
    Component component;
    // Failure states this component admits (OK is always allowed and not listed).
    std::vector<ComponentState> failure_states;
};

// The component complement of a scheme, in canonical order.
std::span<const ComponentSpec> scheme_components(SchemeKind k);

// Health assignment for one protection group.  Components default to OK;
// set() rejects components the scheme does not have and states the
// component does not admit.
class ComponentHealth {
public:
    ComponentHealth() : kind_(SchemeKind::ZONE123) {}
    explicit ComponentHealth(SchemeKind k) : kind_(k) {}

    SchemeKind scheme() const { return kind_; }
    ComponentState state(Component c) const;
    void set(Component c, ComponentState s);
    bool all_ok() const { return overrides_.empty(); }
    const std::map<Component, ComponentState>& overrides() const { return overrides_; }

    bool operator==(const ComponentHealth&) const = default;

private:
    SchemeKind kind_;
    std::map<Component, ComponentState> overrides_; // only non-OK entries
};

enum class FaultLocation {
    NONE,
    IN_ZONE,
    FORWARD_EXTERNAL_A,  // just past to_bus: forward for end A, behind end B
    FORWARD_EXTERNAL_B,  // just past from_bus: forward for end B, behind end A
    REVERSE_A,           // well behind end A (two or more hops past from_bus)
    REVERSE_B,           // well behind end B
};

enum class FaultCondition { FAULT, HIGH_LOAD, ENERGIZATION };

struct FaultStimulus {
    FaultLocation location = FaultLocation::NONE;
    FaultCondition condition = FaultCondition::FAULT;
    bool operator==(const FaultStimulus&) const = default;
};

std::string_view to_string(FaultLocation l);
std::string_view to_string(FaultCondition c);

enum class DelayClass { INSTANTANEOUS, ZONE2_DELAY, ZONE3_DELAY };
enum class Classification { CORRECT_TRIP, CORRECT_RESTRAIN, MISOPERATION, FAILURE_TO_TRIP };
enum class LineEnd { A, B };

std::string_view to_string(DelayClass d);
std::string_view to_string(Classification c);

struct TripDecision {
    bool trip_a = false;
    bool trip_b = false;
    DelayClass delay = DelayClass::INSTANTANEOUS;
    Classification classification = Classification::CORRECT_RESTRAIN;
    // Breaker-failure spread: the scheme orders every breaker at this end's
    // bus opened.  Resolved to a concrete bus by the cascade engine.
    std::optional<LineEnd> transfer_trip_end;
};

// Total over all (scheme, health, stimulus) combinations.
TripDecision evaluate_scheme(SchemeKind k, const ComponentHealth& health, FaultStimulus stim);

enum class Detectability {
    SELF_TEST,      // caught at once by digital relay self-tests
    MONITORING,     // visible to continuous channel/measurement monitoring
    UNDETECTABLE,   // dormant until a fault exercises the path
};

std::string_view to_string(Detectability d);

struct HiddenFailureMode {
    SchemeKind scheme;
    Component component;
    ComponentState state;
    Detectability detectability;
    bool absent_in_digital; // failure mechanism does not exist in a digital relay

    bool operator==(const HiddenFailureMode&) const = default;
};

// Single-component failures that stay dormant until a fault (or system
// stress) exercises them, per scheme, in canonical order.
std::vector<HiddenFailureMode> enumerate_hidden_failures(SchemeKind k);

// Lookup into the same catalog; throws std::invalid_argument for
// combinations that are not enumerated hidden-failure modes.
Detectability detectability(SchemeKind k, Component c, ComponentState s);

enum class Profile { ELECTROMECHANICAL, DIGITAL, DIGITAL_WITH_MONITORING };

std::string_view to_string(Profile p);
Profile parse_profile(std::string_view name);

// Modes that remain credible under the given relay technology profile:
// DIGITAL removes mechanisms digital hardware does not have;
// DIGITAL_WITH_MONITORING additionally removes modes continuous
// monitoring would flag.
std::vector<HiddenFailureMode> modes_for_profile(SchemeKind k, Profile p);

} // namespace hfsim::relay
