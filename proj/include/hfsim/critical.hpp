#pragma once

#include <cstdint>
#include <vector>

#include "hfsim/cascade.hpp"
#include "hfsim/dcflow.hpp"
#include "hfsim/netmodel.hpp"
#include "hfsim/relays.hpp"

namespace hfsim::critical {

// Aggregate cascade exposure of one protected branch over every
// (credible hidden-failure mode x initiating fault in reach) scenario.
struct RelayImpact {
    int branch = 0;
    relay::SchemeKind scheme = relay::SchemeKind::ZONE123;
    int scenarios = 0;
    double worst_load_lost_mw = 0.0;
    double expected_load_lost_mw = 0.0;  // prior-weighted mean over scenarios
    int flagged_by_criteria = 0;         // scenarios the screening criteria would flag
};

struct RankOptions {
    double prior_misop = 0.10;
    int rov_depth = 1;
    double overload_trip_factor = 1.25;
    int max_steps = 50;
    dc::CriteriaThresholds thresholds;
    int threads = 1;
};

// One row per protection group, expected loss descending, ties by branch id.
// Groups whose profile prunes every failure mode still get a (zero) row.
std::vector<RelayImpact> rank_relays(const GridCase& c, const RankOptions& options = {});

struct MinimalSet {
    std::vector<int> elements;  // branch ids, ascending
    double load_lost_mw = 0.0;
    bool minimal = true;        // re-verified by single-removal re-simulation
};

struct ChemistryOptions {
    // Loss at or above this counts as a blackout; negative means
    // "10% of total system load".
    double blackout_threshold_mw = -1.0;
    int k0 = 4;                 // sample size per trial
    int trials = 1000;
    std::uint64_t seed = 1;
    double overload_trip_factor = 1.25;
    int max_steps = 50;
};

// Random-chemistry search: sample k0 branch outages, keep blackout-causing
// samples, shrink until no single removal preserves the blackout, then
// de-duplicate.  Deterministic for a given seed.
std::vector<MinimalSet> minimal_cascading_sets(const GridCase& c,
                                               const ChemistryOptions& options = {});

struct NMinusKRow {
    std::vector<int> branches;      // the k-subset, ascending
    double direct_shed_mw = 0.0;    // minimum shed with emergency ratings, no cascade
    double cascade_loss_mw = 0.0;   // loss once protection responses propagate
};

struct NMinusKOptions {
    double overload_trip_factor = 1.25;
    int max_steps = 50;
    int rov_depth = 1;
    long enumeration_cap = 200000;  // refuse larger k-subset enumerations
};

// Exhaustive k-subset table contrasting optimal-redispatch loss with
// cascade loss; sorted by (cascade - direct) descending.
std::vector<NMinusKRow> n_minus_k_distinction_report(const GridCase& c, int k,
                                                     const NMinusKOptions& options = {});

} // namespace hfsim::critical
