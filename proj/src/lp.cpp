#include "hfsim/lp.hpp"

#include <limits>
#include <stdexcept>
#include <vector>

namespace hfsim::lp {

namespace {

constexpr double kEps = 1e-9;

// One simplex phase on the prepared tableau.  Columns in [0, limit) may
// enter the basis.  Returns false when the objective is unbounded below.
bool iterate(Eigen::MatrixXd& t, std::vector<Eigen::Index>& basis, Eigen::Index limit) {
    const Eigen::Index m = t.rows() - 1;
    const Eigen::Index rhs = t.cols() - 1;
    for (;;) {
        // Bland: first column with a negative reduced cost.
        Eigen::Index enter = -1;
        for (Eigen::Index j = 0; j < limit; ++j) {
            if (t(m, j) < -kEps) {
                enter = j;
                break;
            }
        }
        if (enter < 0) return true;

        // Ratio test; ties resolved toward the smallest basic variable index.
        Eigen::Index leave = -1;
        double best = std::numeric_limits<double>::infinity();
        for (Eigen::Index i = 0; i < m; ++i) {
            if (t(i, enter) <= kEps) continue;
            const double ratio = t(i, rhs) / t(i, enter);
            if (ratio < best - kEps || (ratio < best + kEps && (leave < 0 || basis[i] < basis[leave]))) {
                best = ratio;
                leave = i;
            }
        }
        if (leave < 0) return false;

        t.row(leave) /= t(leave, enter);
        for (Eigen::Index i = 0; i <= m; ++i) {
            if (i == leave) continue;
            const double f = t(i, enter);
            if (f != 0.0) t.row(i) -= f * t.row(leave);
        }
        basis[leave] = enter;
    }
}

} // namespace

Solution solve_equality_form(const Eigen::MatrixXd& a, const Eigen::VectorXd& b,
                             const Eigen::VectorXd& c) {
    const Eigen::Index m = a.rows();
    const Eigen::Index n = a.cols();
    if (b.size() != m || c.size() != n)
        throw std::invalid_argument("lp: inconsistent problem dimensions");

    // Tableau: original columns, one artificial per row, rhs.
    Eigen::MatrixXd t(m + 1, n + m + 1);
    t.setZero();
    t.block(0, 0, m, n) = a;
    t.col(n + m).head(m) = b;
    for (Eigen::Index i = 0; i < m; ++i) {
        if (t(i, n + m) < 0) t.row(i) = -t.row(i);
        t(i, n + i) = 1.0;
    }

    std::vector<Eigen::Index> basis(m);
    for (Eigen::Index i = 0; i < m; ++i) basis[i] = n + i;

    // Phase 1: minimize the artificial sum.
    for (Eigen::Index j = 0; j < n + m; ++j) t(m, j) = j >= n ? 1.0 : 0.0;
    t(m, n + m) = 0.0;
    for (Eigen::Index i = 0; i < m; ++i) t.row(m) -= t.row(i);

    if (!iterate(t, basis, n + m))
        throw std::logic_error("lp: phase 1 unbounded");
    if (t(m, n + m) < -1e-7) return {Status::INFEASIBLE, {}, 0.0};

    // Push leftover artificials out of the basis where possible; rows that
    // offer no pivot are redundant and stay inert at zero.
    for (Eigen::Index i = 0; i < m; ++i) {
        if (basis[i] < n) continue;
        for (Eigen::Index j = 0; j < n; ++j) {
            if (std::abs(t(i, j)) > kEps) {
                t.row(i) /= t(i, j);
                for (Eigen::Index r = 0; r <= m; ++r) {
                    if (r == i) continue;
                    const double f = t(r, j);
                    if (f != 0.0) t.row(r) -= f * t.row(i);
                }
                basis[i] = j;
                break;
            }
        }
    }

    // Phase 2 on the real objective; artificial columns may not re-enter.
    t.row(m).setZero();
    for (Eigen::Index j = 0; j < n; ++j) t(m, j) = c(j);
    for (Eigen::Index i = 0; i < m; ++i)
        if (basis[i] < n) t.row(m) -= c(basis[i]) * t.row(i);

    if (!iterate(t, basis, n)) return {Status::UNBOUNDED, {}, 0.0};

    Solution s;
    s.status = Status::OPTIMAL;
    s.x = Eigen::VectorXd::Zero(n);
    for (Eigen::Index i = 0; i < m; ++i)
        if (basis[i] < n) s.x(basis[i]) = t(i, n + m);
    s.objective = c.dot(s.x);
    return s;
}

} // namespace hfsim::lp
