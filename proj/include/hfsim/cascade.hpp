#pragma once

#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "hfsim/dcflow.hpp"
#include "hfsim/netmodel.hpp"
#include "hfsim/relays.hpp"

namespace hfsim::cascade {

struct LatentFailure {
    int branch = 0;
    relay::Component component = relay::Component::CHANNEL;
    relay::ComponentState state = relay::ComponentState::OK;
    auto operator<=>(const LatentFailure&) const = default;
};

struct ScenarioSpec {
    ElementRef initiating_fault;
    std::vector<LatentFailure> hidden_failures;
    int rov_depth = 1;
    double overload_trip_factor = 1.25;
    int max_steps = 50;
    // Accepted for schema fidelity; the engine itself draws no randomness.
    unsigned long long seed = 0;
};

enum class EventCause {
    INITIATING_FAULT,
    CORRECT_CLEARING,
    REMOTE_BACKUP,
    MISOPERATION,
    BREAKER_FAILURE_SPREAD,
    OVERLOAD_TRIP,
    ISLAND_SHED,
    ISLAND_BLACKOUT,
};

std::string_view to_string(EventCause c);

struct CascadeEvent {
    int step = 0;
    EventCause cause = EventCause::INITIATING_FAULT;
    ElementRef element;
    double mw = 0.0;      // shed, lost or overload magnitude where that applies
    std::string detail;
};

struct CascadeTrace {
    std::vector<CascadeEvent> events;
    double load_lost_mw = 0.0;
    int lines_tripped = 0;
    int depth = 0;                 // balance/re-solve iterations executed
    bool truncated = false;        // max_steps hit with trips still pending
    std::set<int> tripped_branches;
    GridCase terminal;             // statuses, served load, final dispatch
    std::vector<dc::FlowSolution> island_flows;  // by island, ascending lowest bus
};

// Fault -> protection response (own scheme, latent misoperations in reach,
// breaker-failure spread) -> island balancing -> DC re-solve -> overload
// trips, repeated to a fixed point or max_steps.
CascadeTrace run_cascade(const GridCase& c, const ScenarioSpec& spec);

// Several simultaneous faulted elements, each drawing its own protection
// response; latent failures baked into the case health are exposed too.
CascadeTrace run_fault_set(const GridCase& c, const std::vector<ElementRef>& faults,
                           const ScenarioSpec& options);

// Plain simultaneous outage: listed branches open with no relay modeling,
// then the same propagation loop runs.
CascadeTrace run_outage(const GridCase& c, const std::vector<int>& outage_branches,
                        const ScenarioSpec& options);

// Maps a fault location to what `protected_branch`'s relays see: IN_ZONE on
// the branch itself, FORWARD_EXTERNAL one element hop out (side resolved
// toward the nearer end, ties to the to_bus side), REVERSE within region
// reach beyond that, NONE outside the region.
relay::FaultStimulus enumerate_stimulus(const GridCase& c, ElementRef fault_element,
                                        int protected_branch, int rov_depth);

// One JSON object per event, stable field order.
std::string events_ndjson(const CascadeTrace& t);
std::string summary_json(const CascadeTrace& t);

} // namespace hfsim::cascade
