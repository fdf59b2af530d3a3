// Independent reference for the relay truth tables.
//
// oracle_decide() re-derives every scheme's trip logic per line end from the
// scheme descriptions, structured differently from the library (flat per-end
// geometry booleans instead of a shared view mapping).  relay_expectations()
// is a table of hand-worked cases frozen as literals; each was derived on
// paper before being written down here.
#pragma once

#include <vector>

#include "hfsim/relays.hpp"

namespace oracle {

struct RelayExpectation {
    hfsim::relay::SchemeKind scheme;
    struct Override {
        hfsim::relay::Component component;
        hfsim::relay::ComponentState state;
    };
    std::vector<Override> overrides;  // empty = all components healthy
    hfsim::relay::FaultLocation location;
    hfsim::relay::FaultCondition condition;
    bool trip_a;
    bool trip_b;
    hfsim::relay::Classification classification;
    bool transfer_a;  // breaker-failure spread ordered at end A
};

const std::vector<RelayExpectation>& relay_expectations();

hfsim::relay::TripDecision oracle_decide(hfsim::relay::SchemeKind k,
                                         const hfsim::relay::ComponentHealth& health,
                                         hfsim::relay::FaultStimulus stim);

}  // namespace oracle
