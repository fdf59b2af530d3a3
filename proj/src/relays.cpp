#include "hfsim/relays.hpp"

#include <algorithm>
#include <array>

namespace hfsim::relay {

namespace {

template <typename E, size_t N>
std::string_view enum_name(const std::array<std::pair<E, std::string_view>, N>& table, E v) {
    for (const auto& [e, name] : table)
        if (e == v) return name;
    throw std::logic_error("enum value out of range");
}

template <typename E, size_t N>
E enum_value(const std::array<std::pair<E, std::string_view>, N>& table, std::string_view name,
             const char* what) {
    for (const auto& [e, n] : table)
        if (n == name) return e;
    throw std::invalid_argument(std::string("unknown ") + what + ": " + std::string(name));
}

constexpr std::array<std::pair<SchemeKind, std::string_view>, 9> kSchemeNames{{
    {SchemeKind::DCB, "DCB"},
    {SchemeKind::DCUB, "DCUB"},
    {SchemeKind::PUTT, "PUTT"},
    {SchemeKind::POTT, "POTT"},
    {SchemeKind::ZONE123, "ZONE123"},
    {SchemeKind::PHASE_COMPARISON, "PHASE_COMPARISON"},
    {SchemeKind::DIRECTIONAL_GROUND, "DIRECTIONAL_GROUND"},
    {SchemeKind::DIFFERENTIAL, "DIFFERENTIAL"},
    {SchemeKind::BREAKER_FAILURE, "BREAKER_FAILURE"},
}};

constexpr std::array<std::pair<Component, std::string_view>, 20> kComponentNames{{
    {Component::FWD_DETECTOR_A, "fwd_detector_a"},
    {Component::FWD_DETECTOR_B, "fwd_detector_b"},
    {Component::REV_DETECTOR_A, "rev_detector_a"},
    {Component::REV_DETECTOR_B, "rev_detector_b"},
    {Component::UNDERREACH_A, "underreach_a"},
    {Component::UNDERREACH_B, "underreach_b"},
    {Component::CHANNEL, "channel"},
    {Component::CHANNEL_AB, "channel_ab"},
    {Component::CHANNEL_BA, "channel_ba"},
    {Component::RECEIVER_A, "receiver_a"},
    {Component::RECEIVER_B, "receiver_b"},
    {Component::ZONE2_TIMER, "zone2_timer"},
    {Component::ZONE3_TIMER, "zone3_timer"},
    {Component::FD_HIGH_A, "fd_high_a"},
    {Component::FD_HIGH_B, "fd_high_b"},
    {Component::FD_LOW_A, "fd_low_a"},
    {Component::FD_LOW_B, "fd_low_b"},
    {Component::POLARIZING, "polarizing"},
    {Component::RESTRAINT, "restraint"},
    {Component::STATUS_CONTACTS, "status_contacts"},
}};

constexpr std::array<std::pair<ComponentState, std::string_view>, 8> kStateNames{{
    {ComponentState::OK, "OK"},
    {ComponentState::STUCK_ASSERTED, "STUCK_ASSERTED"},
    {ComponentState::STUCK_DEASSERTED, "STUCK_DEASSERTED"},
    {ComponentState::FAILED, "FAILED"},
    {ComponentState::STUCK_UNBLOCK, "STUCK_UNBLOCK"},
    {ComponentState::STUCK_CLOSED, "STUCK_CLOSED"},
    {ComponentState::LOST, "LOST"},
    {ComponentState::SHORTED, "SHORTED"},
}};

constexpr std::array<std::pair<FaultLocation, std::string_view>, 6> kLocationNames{{
    {FaultLocation::NONE, "NONE"},
    {FaultLocation::IN_ZONE, "IN_ZONE"},
    {FaultLocation::FORWARD_EXTERNAL_A, "FORWARD_EXTERNAL_A"},
    {FaultLocation::FORWARD_EXTERNAL_B, "FORWARD_EXTERNAL_B"},
    {FaultLocation::REVERSE_A, "REVERSE_A"},
    {FaultLocation::REVERSE_B, "REVERSE_B"},
}};

constexpr std::array<std::pair<FaultCondition, std::string_view>, 3> kConditionNames{{
    {FaultCondition::FAULT, "FAULT"},
    {FaultCondition::HIGH_LOAD, "HIGH_LOAD"},
    {FaultCondition::ENERGIZATION, "ENERGIZATION"},
}};

constexpr std::array<std::pair<DelayClass, std::string_view>, 3> kDelayNames{{
    {DelayClass::INSTANTANEOUS, "INSTANTANEOUS"},
    {DelayClass::ZONE2_DELAY, "ZONE2_DELAY"},
    {DelayClass::ZONE3_DELAY, "ZONE3_DELAY"},
}};

constexpr std::array<std::pair<Classification, std::string_view>, 4> kClassificationNames{{
    {Classification::CORRECT_TRIP, "CORRECT_TRIP"},
    {Classification::CORRECT_RESTRAIN, "CORRECT_RESTRAIN"},
    {Classification::MISOPERATION, "MISOPERATION"},
    {Classification::FAILURE_TO_TRIP, "FAILURE_TO_TRIP"},
}};

constexpr std::array<std::pair<Detectability, std::string_view>, 3> kDetectabilityNames{{
    {Detectability::SELF_TEST, "SELF_TEST"},
    {Detectability::MONITORING, "MONITORING"},
    {Detectability::UNDETECTABLE, "UNDETECTABLE"},
}};

constexpr std::array<std::pair<Profile, std::string_view>, 3> kProfileNames{{
    {Profile::ELECTROMECHANICAL, "ELECTROMECHANICAL"},
    {Profile::DIGITAL, "DIGITAL"},
    {Profile::DIGITAL_WITH_MONITORING, "DIGITAL_WITH_MONITORING"},
}};

} // namespace

std::string_view to_string(SchemeKind k) { return enum_name(kSchemeNames, k); }
std::string_view to_string(Component c) { return enum_name(kComponentNames, c); }
std::string_view to_string(ComponentState s) { return enum_name(kStateNames, s); }
std::string_view to_string(FaultLocation l) { return enum_name(kLocationNames, l); }
std::string_view to_string(FaultCondition c) { return enum_name(kConditionNames, c); }
std::string_view to_string(DelayClass d) { return enum_name(kDelayNames, d); }
std::string_view to_string(Classification c) { return enum_name(kClassificationNames, c); }
std::string_view to_string(Detectability d) { return enum_name(kDetectabilityNames, d); }
std::string_view to_string(Profile p) { return enum_name(kProfileNames, p); }

SchemeKind parse_scheme(std::string_view n) { return enum_value(kSchemeNames, n, "scheme"); }
Component parse_component(std::string_view n) { return enum_value(kComponentNames, n, "component"); }
ComponentState parse_state(std::string_view n) { return enum_value(kStateNames, n, "component state"); }
Profile parse_profile(std::string_view n) { return enum_value(kProfileNames, n, "profile"); }

// ---------------------------------------------------------------------------
// Scheme component complements.  failure_states lists exactly the credible
// latent failures of each component; everything else only admits OK.

namespace {

using C = Component;
using S = ComponentState;

const std::vector<ComponentSpec> kDcb{
    {C::FWD_DETECTOR_A, {}},
    {C::FWD_DETECTOR_B, {}},
    {C::REV_DETECTOR_A, {S::STUCK_DEASSERTED}},
    {C::REV_DETECTOR_B, {S::STUCK_DEASSERTED}},
    {C::CHANNEL, {S::FAILED}},
};

const std::vector<ComponentSpec> kDcub{
    {C::FWD_DETECTOR_A, {S::STUCK_ASSERTED}},
    {C::FWD_DETECTOR_B, {S::STUCK_ASSERTED}},
    {C::RECEIVER_A, {S::STUCK_UNBLOCK}},
    {C::RECEIVER_B, {S::STUCK_UNBLOCK}},
    // Channel loss opens a timed unblock window by design; the lasting
    // failure that leaves is the receiver latched permissive, so the
    // channels themselves carry no latent state here.
    {C::CHANNEL_AB, {}},
    {C::CHANNEL_BA, {}},
};

const std::vector<ComponentSpec> kPutt{
    {C::FWD_DETECTOR_A, {}},
    {C::FWD_DETECTOR_B, {}},
    {C::UNDERREACH_A, {S::STUCK_ASSERTED}},
    {C::UNDERREACH_B, {S::STUCK_ASSERTED}},
    {C::RECEIVER_A, {S::STUCK_UNBLOCK}},
    {C::RECEIVER_B, {S::STUCK_UNBLOCK}},
    {C::CHANNEL_AB, {}},
    {C::CHANNEL_BA, {}},
};

const std::vector<ComponentSpec> kPott{
    {C::FWD_DETECTOR_A, {S::STUCK_ASSERTED}},
    {C::FWD_DETECTOR_B, {S::STUCK_ASSERTED}},
    {C::RECEIVER_A, {S::STUCK_UNBLOCK}},
    {C::RECEIVER_B, {S::STUCK_UNBLOCK}},
    {C::CHANNEL_AB, {}},
    {C::CHANNEL_BA, {}},
};

const std::vector<ComponentSpec> kZone123{
    {C::ZONE2_TIMER, {S::STUCK_CLOSED}},
    {C::ZONE3_TIMER, {S::STUCK_CLOSED}},
};

const std::vector<ComponentSpec> kPhaseComparison{
    {C::FD_HIGH_A, {S::STUCK_ASSERTED}},
    {C::FD_HIGH_B, {S::STUCK_ASSERTED}},
    {C::FD_LOW_A, {S::STUCK_DEASSERTED}},
    {C::FD_LOW_B, {S::STUCK_DEASSERTED}},
    {C::CHANNEL, {S::FAILED}},
};

const std::vector<ComponentSpec> kDirectionalGround{
    {C::POLARIZING, {S::LOST}},
};

const std::vector<ComponentSpec> kDifferential{
    {C::RESTRAINT, {S::SHORTED}},
};

const std::vector<ComponentSpec> kBreakerFailure{
    {C::STATUS_CONTACTS, {S::SHORTED}},
};

const std::vector<ComponentSpec>& components_of(SchemeKind k) {
    switch (k) {
        case SchemeKind::DCB: return kDcb;
        case SchemeKind::DCUB: return kDcub;
        case SchemeKind::PUTT: return kPutt;
        case SchemeKind::POTT: return kPott;
        case SchemeKind::ZONE123: return kZone123;
        case SchemeKind::PHASE_COMPARISON: return kPhaseComparison;
        case SchemeKind::DIRECTIONAL_GROUND: return kDirectionalGround;
        case SchemeKind::DIFFERENTIAL: return kDifferential;
        case SchemeKind::BREAKER_FAILURE: return kBreakerFailure;
    }
    throw std::logic_error("bad scheme kind");
}

} // namespace

std::span<const ComponentSpec> scheme_components(SchemeKind k) {
    const auto& v = components_of(k);
    return {v.data(), v.size()};
}

ComponentState ComponentHealth::state(Component c) const {
    auto it = overrides_.find(c);
    return it == overrides_.end() ? ComponentState::OK : it->second;
}

void ComponentHealth::set(Component c, ComponentState s) {
    for (const auto& spec : components_of(kind_)) {
        if (spec.component != c) continue;
        if (s == ComponentState::OK) {
            overrides_.erase(c);
            return;
        }
        if (std::find(spec.failure_states.begin(), spec.failure_states.end(), s) ==
            spec.failure_states.end())
            throw std::invalid_argument(std::string("state ") + std::string(to_string(s)) +
                                        " not valid for component " + std::string(to_string(c)) +
                                        " of scheme " + std::string(to_string(kind_)));
        overrides_[c] = s;
        return;
    }
    throw std::invalid_argument(std::string("scheme ") + std::string(to_string(kind_)) +
                                " has no component " + std::string(to_string(c)));
}

// ---------------------------------------------------------------------------
// Trip logic.

namespace {

// What one line end sees, after folding in which end it is.
enum class View { QUIET, IN_ZONE, FWD_CLOSE, FWD_FAR, REV_CLOSE, REV_FAR };

View view_for(FaultLocation loc, LineEnd end) {
    const bool a = end == LineEnd::A;
    switch (loc) {
        case FaultLocation::NONE: return View::QUIET;
        case FaultLocation::IN_ZONE: return View::IN_ZONE;
        case FaultLocation::FORWARD_EXTERNAL_A: return a ? View::FWD_CLOSE : View::REV_CLOSE;
        case FaultLocation::FORWARD_EXTERNAL_B: return a ? View::REV_CLOSE : View::FWD_CLOSE;
        case FaultLocation::REVERSE_A: return a ? View::REV_FAR : View::FWD_FAR;
        case FaultLocation::REVERSE_B: return a ? View::FWD_FAR : View::REV_FAR;
    }
    throw std::logic_error("bad fault location");
}

// Nominal (healthy) pickups of the impedance-measuring elements.
bool fwd_overreach(View v) { return v == View::IN_ZONE || v == View::FWD_CLOSE; }
bool underreach(View v) { return v == View::IN_ZONE; }
bool reverse_reach(View v) { return v == View::REV_CLOSE; }
bool zone1(View v) { return v == View::IN_ZONE; }
bool zone2(View v) { return v == View::IN_ZONE || v == View::FWD_CLOSE; }
bool zone3(View v) { return zone2(v) || v == View::FWD_FAR; }
bool behind(View v) { return v == View::REV_CLOSE || v == View::REV_FAR; }

bool det(const ComponentHealth& h, Component c, bool nominal) {
    switch (h.state(c)) {
        case ComponentState::STUCK_ASSERTED: return true;
        case ComponentState::STUCK_DEASSERTED: return false;
        default: return nominal;
    }
}

} // namespace

TripDecision evaluate_scheme(SchemeKind k, const ComponentHealth& health, FaultStimulus stim) {
    if (health.scheme() != k && !health.all_ok())
        throw std::invalid_argument("health object built for a different scheme");

    const FaultLocation loc = stim.location;
    // The condition field describes the system state when no fault is
    // present; with a fault location given, fault semantics apply.
    const FaultCondition cond =
        loc == FaultLocation::NONE ? stim.condition : FaultCondition::FAULT;

    const View va = view_for(loc, LineEnd::A);
    const View vb = view_for(loc, LineEnd::B);
    const auto& h = health;

    TripDecision d;

    switch (k) {
        case SchemeKind::DCB: {
            // Trip unless the remote reverse element gets a blocking signal through.
            const bool fa = det(h, C::FWD_DETECTOR_A, fwd_overreach(va));
            const bool fb = det(h, C::FWD_DETECTOR_B, fwd_overreach(vb));
            const bool ra = det(h, C::REV_DETECTOR_A, reverse_reach(va));
            const bool rb = det(h, C::REV_DETECTOR_B, reverse_reach(vb));
            const bool ch = h.state(C::CHANNEL) == S::OK;
            d.trip_a = fa && !(rb && ch);
            d.trip_b = fb && !(ra && ch);
            break;
        }
        case SchemeKind::DCUB: {
            const bool fa = det(h, C::FWD_DETECTOR_A, fwd_overreach(va));
            const bool fb = det(h, C::FWD_DETECTOR_B, fwd_overreach(vb));
            const bool unblock_a =
                (fb && h.state(C::CHANNEL_BA) == S::OK) || h.state(C::RECEIVER_A) == S::STUCK_UNBLOCK;
            const bool unblock_b =
                (fa && h.state(C::CHANNEL_AB) == S::OK) || h.state(C::RECEIVER_B) == S::STUCK_UNBLOCK;
            d.trip_a = fa && unblock_a;
            d.trip_b = fb && unblock_b;
            break;
        }
        case SchemeKind::PUTT: {
            // Permission is keyed by the remote underreaching element.
            const bool oa = det(h, C::FWD_DETECTOR_A, fwd_overreach(va));
            const bool ob = det(h, C::FWD_DETECTOR_B, fwd_overreach(vb));
            const bool ua = det(h, C::UNDERREACH_A, underreach(va));
            const bool ub = det(h, C::UNDERREACH_B, underreach(vb));
            const bool perm_a =
                (ub && h.state(C::CHANNEL_BA) == S::OK) || h.state(C::RECEIVER_A) == S::STUCK_UNBLOCK;
            const bool perm_b =
                (ua && h.state(C::CHANNEL_AB) == S::OK) || h.state(C::RECEIVER_B) == S::STUCK_UNBLOCK;
            d.trip_a = oa && perm_a;
            d.trip_b = ob && perm_b;
            break;
        }
        case SchemeKind::POTT: {
            const bool oa = det(h, C::FWD_DETECTOR_A, fwd_overreach(va));
            const bool ob = det(h, C::FWD_DETECTOR_B, fwd_overreach(vb));
            const bool perm_a =
                (ob && h.state(C::CHANNEL_BA) == S::OK) || h.state(C::RECEIVER_A) == S::STUCK_UNBLOCK;
            const bool perm_b =
                (oa && h.state(C::CHANNEL_AB) == S::OK) || h.state(C::RECEIVER_B) == S::STUCK_UNBLOCK;
            d.trip_a = oa && perm_a;
            d.trip_b = ob && perm_b;
            break;
        }
        case SchemeKind::ZONE123: {
            // Healthy timed zones are assumed coordinated away (the closer
            // protection clears first); a welded timer contact turns the
            // overreaching zone into an instantaneous element.
            const bool z2_stuck = h.state(C::ZONE2_TIMER) == S::STUCK_CLOSED;
            const bool z3_stuck = h.state(C::ZONE3_TIMER) == S::STUCK_CLOSED;
            d.trip_a = zone1(va) || (z2_stuck && zone2(va)) || (z3_stuck && zone3(va));
            d.trip_b = zone1(vb) || (z2_stuck && zone2(vb)) || (z3_stuck && zone3(vb));
            break;
        }
        case SchemeKind::PHASE_COMPARISON: {
            // Low-set detectors key the blocking carrier and supervise the
            // trip; high-set detectors arm it.  With the channel dead the
            // scheme degrades to a plain overcurrent element on the high
            // set.  Energization inrush picks up the low sets but cannot
            // key a valid comparison.
            const bool strong = loc == FaultLocation::IN_ZONE ||
                                loc == FaultLocation::FORWARD_EXTERNAL_A ||
                                loc == FaultLocation::FORWARD_EXTERNAL_B;
            const bool low_nominal =
                loc != FaultLocation::NONE || cond == FaultCondition::ENERGIZATION;
            const bool fha = det(h, C::FD_HIGH_A, strong);
            const bool fhb = det(h, C::FD_HIGH_B, strong);
            const bool fla = det(h, C::FD_LOW_A, low_nominal);
            const bool flb = det(h, C::FD_LOW_B, low_nominal);
            const bool ch_ok = h.state(C::CHANNEL) == S::OK;
            const bool keying_valid = cond != FaultCondition::ENERGIZATION;
            const bool block_a =
                ch_ok && flb && loc != FaultLocation::IN_ZONE && keying_valid;
            const bool block_b =
                ch_ok && fla && loc != FaultLocation::IN_ZONE && keying_valid;
            d.trip_a = fha && (fla || !ch_ok) && !block_a;
            d.trip_b = fhb && (flb || !ch_ok) && !block_b;
            break;
        }
        case SchemeKind::DIRECTIONAL_GROUND: {
            // Without polarizing the element loses direction and behaves
            // non-directionally: in-zone dependability is kept, reverse
            // faults now operate it too.
            const bool lost = h.state(C::POLARIZING) == S::LOST;
            d.trip_a = loc == FaultLocation::IN_ZONE || (lost && behind(va));
            d.trip_b = loc == FaultLocation::IN_ZONE || (lost && behind(vb));
            break;
        }
        case SchemeKind::DIFFERENTIAL: {
            const bool shorted = h.state(C::RESTRAINT) == S::SHORTED;
            const bool through_stress = loc == FaultLocation::FORWARD_EXTERNAL_A ||
                                        loc == FaultLocation::FORWARD_EXTERNAL_B ||
                                        cond != FaultCondition::FAULT;
            const bool trip = loc == FaultLocation::IN_ZONE || (shorted && through_stress);
            d.trip_a = d.trip_b = trip;
            break;
        }
        case SchemeKind::BREAKER_FAILURE: {
            const bool trip = loc == FaultLocation::IN_ZONE;
            d.trip_a = d.trip_b = trip;
            if (trip && h.state(C::STATUS_CONTACTS) == S::SHORTED)
                d.transfer_trip_end = LineEnd::A;
            break;
        }
    }

    // Latent failures stay dormant on a quiet system.  Only the
    // current-measuring schemes respond to anything but a fault: phase
    // comparison keeps its overcurrent fallback (high set stuck plus dead
    // channel trips at once) and the differential its shorted-restraint
    // response to load and inrush.
    if (loc == FaultLocation::NONE && k != SchemeKind::PHASE_COMPARISON &&
        k != SchemeKind::DIFFERENTIAL) {
        d.trip_a = d.trip_b = false;
        d.transfer_trip_end.reset();
    }

    d.delay = DelayClass::INSTANTANEOUS;
    if (loc == FaultLocation::IN_ZONE)
        d.classification = (d.trip_a && d.trip_b) ? Classification::CORRECT_TRIP
                                                  : Classification::FAILURE_TO_TRIP;
    else
        d.classification = (d.trip_a || d.trip_b) ? Classification::MISOPERATION
                                                  : Classification::CORRECT_RESTRAIN;
    return d;
}

// ---------------------------------------------------------------------------
// Hidden failure catalog.

namespace {

struct CatalogEntry {
    Detectability detectability;
    bool absent_in_digital;
};

// Keyed by (scheme, component, state); only enumerated modes appear.
CatalogEntry catalog_entry(SchemeKind k, Component c, ComponentState s) {
    using K = SchemeKind;
    switch (k) {
        case K::DCB:
            if ((c == C::REV_DETECTOR_A || c == C::REV_DETECTOR_B) && s == S::STUCK_DEASSERTED)
                return {Detectability::UNDETECTABLE, true};
            if (c == C::CHANNEL && s == S::FAILED)
                // On/off blocking carrier is silent between faults, so a dead
                // channel shows nothing to monitor.
                return {Detectability::UNDETECTABLE, false};
            break;
        case K::DCUB:
            if ((c == C::FWD_DETECTOR_A || c == C::FWD_DETECTOR_B) && s == S::STUCK_ASSERTED)
                // Keys the channel off guard frequency continuously.
                return {Detectability::MONITORING, true};
            if ((c == C::RECEIVER_A || c == C::RECEIVER_B) && s == S::STUCK_UNBLOCK)
                return {Detectability::MONITORING, false};
            break;
        case K::PUTT:
            if ((c == C::UNDERREACH_A || c == C::UNDERREACH_B) && s == S::STUCK_ASSERTED)
                return {Detectability::MONITORING, true};
            if ((c == C::RECEIVER_A || c == C::RECEIVER_B) && s == S::STUCK_UNBLOCK)
                return {Detectability::MONITORING, false};
            break;
        case K::POTT:
            if ((c == C::FWD_DETECTOR_A || c == C::FWD_DETECTOR_B) && s == S::STUCK_ASSERTED)
                return {Detectability::MONITORING, true};
            if ((c == C::RECEIVER_A || c == C::RECEIVER_B) && s == S::STUCK_UNBLOCK)
                return {Detectability::MONITORING, false};
            break;
        case K::ZONE123:
            if ((c == C::ZONE2_TIMER || c == C::ZONE3_TIMER) && s == S::STUCK_CLOSED)
                return {Detectability::UNDETECTABLE, true};
            break;
        case K::PHASE_COMPARISON:
            if ((c == C::FD_HIGH_A || c == C::FD_HIGH_B) && s == S::STUCK_ASSERTED)
                // A standing pickup is visible in relay metering.
                return {Detectability::MONITORING, true};
            if ((c == C::FD_LOW_A || c == C::FD_LOW_B) && s == S::STUCK_DEASSERTED)
                return {Detectability::UNDETECTABLE, true};
            if (c == C::CHANNEL && s == S::FAILED)
                return {Detectability::UNDETECTABLE, false};
            break;
        case K::DIRECTIONAL_GROUND:
            if (c == C::POLARIZING && s == S::LOST)
                // Loss of a polarizing quantity raises a loss-of-potential alarm.
                return {Detectability::MONITORING, false};
            break;
        case K::DIFFERENTIAL:
            if (c == C::RESTRAINT && s == S::SHORTED)
                return {Detectability::UNDETECTABLE, true};
            break;
        case K::BREAKER_FAILURE:
            if (c == C::STATUS_CONTACTS && s == S::SHORTED)
                // Contacts read consistently while the breaker sits closed.
                return {Detectability::UNDETECTABLE, false};
            break;
    }
    throw std::invalid_argument(std::string("not an enumerated hidden failure: ") +
                                std::string(to_string(k)) + "/" + std::string(to_string(c)) +
                                "=" + std::string(to_string(s)));
}

} // namespace

std::vector<HiddenFailureMode> enumerate_hidden_failures(SchemeKind k) {
    std::vector<HiddenFailureMode> out;
    for (const auto& spec : components_of(k)) {
        for (ComponentState s : spec.failure_states) {
            const auto e = catalog_entry(k, spec.component, s);
            out.push_back({k, spec.component, s, e.detectability, e.absent_in_digital});
        }
    }
    return out;
}

Detectability detectability(SchemeKind k, Component c, ComponentState s) {
    return catalog_entry(k, c, s).detectability;
}

std::vector<HiddenFailureMode> modes_for_profile(SchemeKind k, Profile p) {
    std::vector<HiddenFailureMode> out;
    for (const auto& m : enumerate_hidden_failures(k)) {
        if (p != Profile::ELECTROMECHANICAL) {
            if (m.absent_in_digital) continue;
            if (m.detectability == Detectability::SELF_TEST) continue;
        }
        if (p == Profile::DIGITAL_WITH_MONITORING &&
            m.detectability == Detectability::MONITORING)
            continue;
        out.push_back(m);
    }
    return out;
}

} // namespace hfsim::relay
