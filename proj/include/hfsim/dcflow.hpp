#pragma once

#include <array>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "hfsim/netmodel.hpp"

namespace hfsim::dc {

// Reduced nodal susceptance system for one island: B' theta = P with the
// slack row/column removed.  Carries enough of the case to turn angles
// back into branch flows.
struct SusceptanceSystem {
    int slack_bus = 0;
    std::vector<int> bus_order;            // non-slack island buses, ascending
    std::map<int, int> bus_index;          // bus id -> row in bprime
    Eigen::MatrixXd bprime;                // per-unit
    Eigen::VectorXd injections;            // per-unit net injection, bus_order
    std::vector<int> island_branches;      // in-service branch ids inside the island
    double base_mw = 100.0;
    // branch id -> (from, to, susceptance) for flow recovery
    std::map<int, std::array<double, 3>> branch_terms;
};

// Assembles B' for the island containing exactly one slack bus.
// Throws std::invalid_argument when the island has no slack or is empty.
SusceptanceSystem build_system(const GridCase& c, const std::vector<int>& island_buses);

struct FlowSolution {
    std::map<int, double> theta;     // radians per solved bus, slack = 0
    std::map<int, double> flow_mw;   // signed from->to per solved in-service branch
    bool converged = false;
    std::string detail;              // reason when !converged
};

// Solves B' theta = injections.  A singular system (disconnected island)
// comes back with converged = false, not an exception.
FlowSolution solve_dc(const SusceptanceSystem& sys);

// Convenience: solve every equipped island of the case and merge.  Islands
// carrying neither generation nor load contribute zero angles and flows.
FlowSolution solve_case(const GridCase& c);

// Core used by the cascade engine as well: angles and flows for one island
// with explicit per-bus net injections (MW), any reference bus.
FlowSolution solve_island_custom(const GridCase& c, const std::vector<int>& island_buses,
                                 int reference_bus, const std::map<int, double>& injection_mw);

struct CriteriaThresholds {
    double c1 = 0.10;
    double c2 = 1.00;
    double c3 = 0.05;
    double c4 = 0.10;
};

struct CriteriaReport {
    double c1 = 0.0;   // normalized |det| change of B'
    double c2 = 0.0;   // max branch loading fraction after re-solve
    double c3 = 0.0;   // max |delta theta| of the first linear iteration
    double c4 = 0.0;   // 2-norm of the same deviation vector
    bool flag_c1 = false, flag_c2 = false, flag_c3 = false, flag_c4 = false;
    std::vector<int> stranded_buses;  // buses the contingency cut off from the slack
};

// Cascade-risk screening of one contingency set against a solved base.
// The four figures: determinant change of B', post-contingency loading,
// and the infinity/2-norms of one mismatch solve started from the base
// angles.  Buses islanded away from the slack are reported, not solved.
CriteriaReport screening_criteria(const GridCase& c, const FlowSolution& base,
                                  const std::vector<int>& contingency,
                                  const CriteriaThresholds& thresholds = {});

struct ShedPlan {
    std::vector<double> shed_mw;   // parallel to case.loads
    double total_shed_mw = 0.0;
    bool feasible = false;
};

// Minimum total load shed restoring a within-ratings DC flow after the
// given outages.  Exact LP optimum; always feasible (shedding everything
// satisfies every constraint).  Generators redispatch freely in [0, p_max]
// per island.
ShedPlan min_load_shed(const GridCase& c, const std::vector<int>& outage_branches);

} // namespace hfsim::dc
