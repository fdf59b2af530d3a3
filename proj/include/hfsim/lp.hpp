#pragma once

#include <Eigen/Dense>

namespace hfsim::lp {

enum class Status { OPTIMAL, INFEASIBLE, UNBOUNDED };

struct Solution {
    Status status = Status::INFEASIBLE;
    Eigen::VectorXd x;
    double objective = 0.0;
};

// Minimize c'x subject to A x = b, x >= 0.  Dense two-phase tableau
// simplex with Bland's rule, so it terminates on degenerate problems and
// pivots identically on every run.  Meant for the small load-shed
// programs this project builds, not for large systems.
Solution solve_equality_form(const Eigen::MatrixXd& a, const Eigen::VectorXd& b,
                             const Eigen::VectorXd& c);

} // namespace hfsim::lp
