#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "hfsim/critical.hpp"
#include "hfsim/netmodel.hpp"
#include "hfsim/relays.hpp"

namespace hfsim::mitigate {

// Redundant relays voting k-of-n.  Relays are treated as independent;
// common_cause_beta is the fraction of failures shared by all units
// (0 keeps the pure independence model).
struct VotingConfig {
    int n = 3;
    int k = 2;
    double p_misop = 0.0;
    double q_fail = 0.0;
    double common_cause_beta = 0.0;
};

// P(scheme misoperates) = P(at least k of n relays misoperate).
double k_of_n_misoperation(const VotingConfig& cfg);

// P(scheme fails to trip) = P(fewer than k relays operate).
double k_of_n_failure_to_trip(const VotingConfig& cfg);

struct SupervisedPair {
    double misoperation = 0.0;
    double failure_to_trip = 0.0;
};

// Supervisor contacts in series with the relay output: both must close to
// trip, so security multiplies and dependability degrades by union.
SupervisedPair supervisory_and(double p_relay, double p_super, double q_relay, double q_super);

// Copy of the case under the given relay technology: the profile is set
// and baked-in component failures that technology cannot harbor (or that
// its monitoring would have flagged) are healed.  Idempotent.
GridCase apply_monitoring(const GridCase& c, relay::Profile profile);

enum class MeasurementKind { BRANCH_FLOW, BUS_INJECTION };

std::string_view to_string(MeasurementKind k);

struct Measurement {
    MeasurementKind kind = MeasurementKind::BRANCH_FLOW;
    ElementRef element;       // the measured branch or bus
    double value_mw = 0.0;
    double sigma_mw = 1.0;    // must be positive
};

struct EstimationResult {
    std::map<int, double> theta;        // radians per bus, slack buses at 0
    std::vector<std::size_t> rejected;  // input indexes, in rejection order
    double chi2 = 0.0;
    int dof = 0;
    double chi2_threshold = 0.0;
    bool passed = false;
    std::string detail;                 // diagnostic when the test cannot certify
};

// Weighted least squares on the DC measurement model with iterative
// bad-data rejection: while the chi-squared statistic exceeds the quantile
// for the current degrees of freedom, drop the measurement with the
// largest normalized residual, provided observability survives.
// Unobservability (initial, or forced mid-loop) comes back as
// passed = false with a diagnostic, not an exception.
EstimationResult dc_state_estimate(const GridCase& c,
                                   const std::vector<Measurement>& measurements,
                                   double confidence = 0.99);

struct ComparisonRow {
    std::string strategy;
    double total_expected_load_lost_mw = 0.0;
};

// Expected-load-lost totals per mitigation strategy: each relay technology
// profile, plus 2-of-3 voting applied to the case as loaded (its baseline
// total scaled by k_of_n_misoperation(prior) / prior).
std::vector<ComparisonRow> mitigation_comparison(const GridCase& c, double prior,
                                                 const critical::RankOptions& rank_options = {});

} // namespace hfsim::mitigate
