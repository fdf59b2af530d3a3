#include "hfsim/dcflow.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "hfsim/lp.hpp"

namespace hfsim::dc {

namespace {

SusceptanceSystem assemble(const GridCase& c, const std::vector<int>& island_buses,
                           int reference_bus, const std::map<int, double>& injection_mw) {
    SusceptanceSystem sys;
    sys.slack_bus = reference_bus;
    sys.base_mw = c.base_mw;

    const std::set<int> in_island(island_buses.begin(), island_buses.end());
    for (int bus : island_buses)
        if (bus != reference_bus) sys.bus_order.push_back(bus);
    std::sort(sys.bus_order.begin(), sys.bus_order.end());
    for (size_t i = 0; i < sys.bus_order.size(); ++i)
        sys.bus_index[sys.bus_order[i]] = static_cast<int>(i);

    const auto n = static_cast<Eigen::Index>(sys.bus_order.size());
    sys.bprime = Eigen::MatrixXd::Zero(n, n);
    for (const auto& br : c.branches) {
        if (!br.in_service) continue;
        if (!in_island.count(br.from_bus) || !in_island.count(br.to_bus)) continue;
        const double b = 1.0 / br.reactance;
        sys.island_branches.push_back(br.id);
        sys.branch_terms[br.id] = {static_cast<double>(br.from_bus),
                                   static_cast<double>(br.to_bus), b};
        const auto fi = sys.bus_index.find(br.from_bus);
        const auto ti = sys.bus_index.find(br.to_bus);
        if (fi != sys.bus_index.end()) sys.bprime(fi->second, fi->second) += b;
        if (ti != sys.bus_index.end()) sys.bprime(ti->second, ti->second) += b;
        if (fi != sys.bus_index.end() && ti != sys.bus_index.end()) {
            sys.bprime(fi->second, ti->second) -= b;
            sys.bprime(ti->second, fi->second) -= b;
        }
    }
    std::sort(sys.island_branches.begin(), sys.island_branches.end());

    sys.injections = Eigen::VectorXd::Zero(n);
    for (const auto& [bus, mw] : injection_mw) {
        auto it = sys.bus_index.find(bus);
        if (it != sys.bus_index.end()) sys.injections(it->second) = mw / c.base_mw;
    }
    return sys;
}

std::map<int, double> case_injections(const GridCase& c) {
    std::map<int, double> inj;
    for (const auto& g : c.generators) inj[g.bus] += g.p_mw;
    for (const auto& l : c.loads) inj[l.bus] -= l.p_mw;
    return inj;
}

// log|det|; -inf signals a singular matrix.
double log_abs_det(const Eigen::MatrixXd& m) {
    if (m.rows() == 0) return 0.0;
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(m);
    return lu.matrixLU().diagonal().array().abs().log().sum();
}

} // namespace

SusceptanceSystem build_system(const GridCase& c, const std::vector<int>& island_buses) {
    if (island_buses.empty()) throw std::invalid_argument("build_system: empty island");
    int slack = 0, slack_count = 0;
    for (int bus : island_buses) {
        const Bus* b = c.find_bus(bus);
        if (!b) throw std::invalid_argument("build_system: unknown bus " + std::to_string(bus));
        if (b->slack) {
            slack = bus;
            ++slack_count;
        }
    }
    if (slack_count == 0) throw std::invalid_argument("build_system: no slack bus in island");
    if (slack_count > 1) throw std::invalid_argument("build_system: island has several slack buses");
    return assemble(c, island_buses, slack, case_injections(c));
}

FlowSolution solve_dc(const SusceptanceSystem& sys) {
    FlowSolution f;
    const auto n = sys.bprime.rows();
    Eigen::VectorXd theta(n);
    if (n > 0) {
        Eigen::FullPivLU<Eigen::MatrixXd> lu(sys.bprime);
        if (!lu.isInvertible()) {
            f.detail = "singular susceptance system (island not connected)";
            return f;
        }
        theta = lu.solve(sys.injections);
        const double residual = (sys.bprime * theta - sys.injections).cwiseAbs().maxCoeff();
        if (!(residual <= 1e-10)) {
            std::ostringstream ss;
            ss << "dc solve residual " << residual << " p.u. above tolerance";
            f.detail = ss.str();
            return f;
        }
    }
    f.theta[sys.slack_bus] = 0.0;
    for (size_t i = 0; i < sys.bus_order.size(); ++i)
        f.theta[sys.bus_order[i]] = theta(static_cast<Eigen::Index>(i));
    for (int id : sys.island_branches) {
        const auto& t = sys.branch_terms.at(id);
        const double tf = f.theta.at(static_cast<int>(t[0]));
        const double tt = f.theta.at(static_cast<int>(t[1]));
        f.flow_mw[id] = sys.base_mw * t[2] * (tf - tt);
    }
    f.converged = true;
    return f;
}

FlowSolution solve_island_custom(const GridCase& c, const std::vector<int>& island_buses,
                                 int reference_bus, const std::map<int, double>& injection_mw) {
    return solve_dc(assemble(c, island_buses, reference_bus, injection_mw));
}

FlowSolution solve_case(const GridCase& c) {
    FlowSolution merged;
    merged.converged = true;
    for (const auto& island : islands(c)) {
        const bool equipped =
            std::any_of(c.generators.begin(), c.generators.end(),
                        [&](const Generator& g) {
                            return std::binary_search(island.begin(), island.end(), g.bus);
                        }) ||
            std::any_of(c.loads.begin(), c.loads.end(), [&](const Load& l) {
                return std::binary_search(island.begin(), island.end(), l.bus);
            });
        if (!equipped) {
            // Dead equipment: zero angles and flows by convention.
            for (int bus : island) merged.theta[bus] = 0.0;
            const std::set<int> in_island(island.begin(), island.end());
            for (const auto& br : c.branches)
                if (br.in_service && in_island.count(br.from_bus) && in_island.count(br.to_bus))
                    merged.flow_mw[br.id] = 0.0;
            continue;
        }
        FlowSolution part = solve_dc(build_system(c, island));
        if (!part.converged) {
            merged.converged = false;
            if (!merged.detail.empty()) merged.detail += "; ";
            merged.detail += part.detail;
            continue;
        }
        merged.theta.insert(part.theta.begin(), part.theta.end());
        merged.flow_mw.insert(part.flow_mw.begin(), part.flow_mw.end());
    }
    return merged;
}

CriteriaReport screening_criteria(const GridCase& c, const FlowSolution& base,
                                  const std::vector<int>& contingency,
                                  const CriteriaThresholds& thresholds) {
    if (!base.converged)
        throw std::invalid_argument("screening_criteria: base solution not converged");
    for (int id : contingency) {
        const Branch* br = c.find_branch(id);
        if (!br) throw std::invalid_argument("screening_criteria: unknown branch " + std::to_string(id));
        if (!br->in_service)
            throw std::invalid_argument("screening_criteria: branch " + std::to_string(id) +
                                        " already out of service");
    }

    // Work on the island of the lowest-id slack bus.
    int slack = 0;
    bool have_slack = false;
    for (const auto& b : c.buses)
        if (b.slack && (!have_slack || b.id < slack)) {
            slack = b.id;
            have_slack = true;
        }
    if (!have_slack) throw std::invalid_argument("screening_criteria: case has no slack bus");

    const auto find_island = [](const std::vector<std::vector<int>>& all, int bus) {
        for (const auto& island : all)
            if (std::binary_search(island.begin(), island.end(), bus)) return island;
        return std::vector<int>{};
    };

    const auto base_island = find_island(islands(c), slack);
    const auto base_sys = build_system(c, base_island);

    CriteriaReport r;
    if (contingency.empty()) {
        // Unchanged network: the determinant ratio and the first-iteration
        // deviation are identically zero; only the loading figure is live.
        const FlowSolution f = solve_dc(base_sys);
        for (int id : base_sys.island_branches)
            r.c2 = std::max(r.c2, std::abs(f.flow_mw.at(id)) / c.find_branch(id)->rating_mw);
        r.flag_c2 = r.c2 > thresholds.c2;
        return r;
    }

    GridCase post = c;
    for (int id : contingency) post.find_branch(id)->in_service = false;

    const auto post_island = find_island(islands(post), slack);
    for (int bus : base_island)
        if (!std::binary_search(post_island.begin(), post_island.end(), bus))
            r.stranded_buses.push_back(bus);

    const auto post_sys = build_system(post, post_island);

    const double log_base = log_abs_det(base_sys.bprime);
    const double log_post = log_abs_det(post_sys.bprime);
    r.c1 = std::isfinite(log_post) ? std::abs(std::exp(log_post - log_base) - 1.0) : 1.0;

    const FlowSolution post_flow = solve_dc(post_sys);
    if (post_flow.converged)
        for (int id : post_sys.island_branches)
            r.c2 = std::max(r.c2, std::abs(post_flow.flow_mw.at(id)) / c.find_branch(id)->rating_mw);

    // One linear iteration from the base angles: delta = B'^-1 (P - B' theta0).
    const auto n = post_sys.bprime.rows();
    if (n > 0) {
        Eigen::VectorXd theta0(n);
        for (size_t i = 0; i < post_sys.bus_order.size(); ++i)
            theta0(static_cast<Eigen::Index>(i)) = base.theta.at(post_sys.bus_order[i]);
        const Eigen::VectorXd mismatch = post_sys.injections - post_sys.bprime * theta0;
        Eigen::FullPivLU<Eigen::MatrixXd> lu(post_sys.bprime);
        if (lu.isInvertible()) {
            const Eigen::VectorXd delta = lu.solve(mismatch);
            r.c3 = delta.size() ? delta.cwiseAbs().maxCoeff() : 0.0;
            r.c4 = delta.norm();
        }
    }

    r.flag_c1 = r.c1 > thresholds.c1;
    r.flag_c2 = r.c2 > thresholds.c2;
    r.flag_c3 = r.c3 > thresholds.c3;
    r.flag_c4 = r.c4 > thresholds.c4;
    return r;
}

ShedPlan min_load_shed(const GridCase& c, const std::vector<int>& outage_branches) {
    for (int id : outage_branches) {
        const Branch* br = c.find_branch(id);
        if (!br) throw std::invalid_argument("min_load_shed: unknown branch " + std::to_string(id));
        if (!br->in_service)
            throw std::invalid_argument("min_load_shed: branch " + std::to_string(id) +
                                        " already out of service");
    }
    GridCase post = c;
    for (int id : outage_branches) post.find_branch(id)->in_service = false;

    ShedPlan plan;
    plan.shed_mw.assign(c.loads.size(), 0.0);

    for (const auto& island : islands(post)) {
        std::vector<size_t> load_idx, gen_idx;
        for (size_t i = 0; i < c.loads.size(); ++i)
            if (std::binary_search(island.begin(), island.end(), c.loads[i].bus))
                load_idx.push_back(i);
        for (size_t i = 0; i < c.generators.size(); ++i)
            if (std::binary_search(island.begin(), island.end(), c.generators[i].bus))
                gen_idx.push_back(i);
        if (load_idx.empty()) continue;
        if (gen_idx.empty()) {
            // Dead island: everything on it sheds.
            for (size_t i : load_idx) plan.shed_mw[i] = c.loads[i].p_mw;
            continue;
        }

        // Reference: island slack if present, else the lowest bus.
        int ref = island.front();
        for (int bus : island)
            if (post.find_bus(bus)->slack) {
                ref = bus;
                break;
            }

        std::vector<int> nonref;
        for (int bus : island)
            if (bus != ref) nonref.push_back(bus);
        std::map<int, int> theta_col;
        for (size_t i = 0; i < nonref.size(); ++i) theta_col[nonref[i]] = static_cast<int>(i);

        struct Term {
            int from, to;
            double b;
            double cap_pu;
        };
        std::vector<Term> brs;
        const std::set<int> in_island(island.begin(), island.end());
        for (const auto& br : post.branches)
            if (br.in_service && in_island.count(br.from_bus) && in_island.count(br.to_bus))
                brs.push_back({br.from_bus, br.to_bus, 1.0 / br.reactance,
                               br.rating_mw / c.base_mw});

        const int nb = static_cast<int>(island.size());
        const int nt = static_cast<int>(nonref.size());
        const int ng = static_cast<int>(gen_idx.size());
        const int nl = static_cast<int>(load_idx.size());
        const int nbr = static_cast<int>(brs.size());

        // Columns: theta+ theta- | g | s | flow slacks (2 per branch) |
        // gen headroom | shed headroom.
        const int col_tp = 0, col_tm = nt, col_g = 2 * nt, col_s = 2 * nt + ng;
        const int col_fu = col_s + nl, col_fv = col_fu + nbr;
        const int col_gu = col_fv + nbr, col_su = col_gu + ng;
        const int ncols = col_su + nl;
        const int nrows = nb + 2 * nbr + ng + nl;

        Eigen::MatrixXd a = Eigen::MatrixXd::Zero(nrows, ncols);
        Eigen::VectorXd b = Eigen::VectorXd::Zero(nrows);
        Eigen::VectorXd cost = Eigen::VectorXd::Zero(ncols);

        std::map<int, int> bus_row;
        for (int i = 0; i < nb; ++i) bus_row[island[static_cast<size_t>(i)]] = i;

        // Bus balance: sum(g) + sum(s) - B theta = total load at bus.
        for (size_t gi = 0; gi < gen_idx.size(); ++gi)
            a(bus_row[c.generators[gen_idx[gi]].bus], col_g + static_cast<int>(gi)) = 1.0;
        for (size_t li = 0; li < load_idx.size(); ++li) {
            const auto& load = c.loads[load_idx[li]];
            a(bus_row[load.bus], col_s + static_cast<int>(li)) = 1.0;
            b(bus_row[load.bus]) += load.p_mw / c.base_mw;
        }
        const auto add_theta = [&](int row, int bus, double coeff) {
            auto it = theta_col.find(bus);
            if (it == theta_col.end()) return;  // reference angle is zero
            a(row, col_tp + it->second) += coeff;
            a(row, col_tm + it->second) -= coeff;
        };
        for (const auto& t : brs) {
            // Flow b(theta_f - theta_t) leaves `from` and enters `to`.
            add_theta(bus_row[t.from], t.from, -t.b);
            add_theta(bus_row[t.from], t.to, t.b);
            add_theta(bus_row[t.to], t.from, t.b);
            add_theta(bus_row[t.to], t.to, -t.b);
        }

        for (int bi = 0; bi < nbr; ++bi) {
            const auto& t = brs[static_cast<size_t>(bi)];
            const int up = nb + 2 * bi, down = nb + 2 * bi + 1;
            add_theta(up, t.from, t.b);
            add_theta(up, t.to, -t.b);
            a(up, col_fu + bi) = 1.0;
            b(up) = t.cap_pu;
            add_theta(down, t.from, -t.b);
            add_theta(down, t.to, t.b);
            a(down, col_fv + bi) = 1.0;
            b(down) = t.cap_pu;
        }
        for (int gi = 0; gi < ng; ++gi) {
            const int row = nb + 2 * nbr + gi;
            a(row, col_g + gi) = 1.0;
            a(row, col_gu + gi) = 1.0;
            b(row) = c.generators[gen_idx[static_cast<size_t>(gi)]].p_max_mw / c.base_mw;
        }
        for (int li = 0; li < nl; ++li) {
            const int row = nb + 2 * nbr + ng + li;
            a(row, col_s + li) = 1.0;
            a(row, col_su + li) = 1.0;
            b(row) = c.loads[load_idx[static_cast<size_t>(li)]].p_mw / c.base_mw;
        }
        for (int li = 0; li < nl; ++li) cost(col_s + li) = 1.0;

        const auto sol = lp::solve_equality_form(a, b, cost);
        if (sol.status != lp::Status::OPTIMAL)
            throw std::runtime_error("min_load_shed: load-shed program did not reach an optimum");
        for (int li = 0; li < nl; ++li)
            plan.shed_mw[load_idx[static_cast<size_t>(li)]] = sol.x(col_s + li) * c.base_mw;
    }

    for (double s : plan.shed_mw) plan.total_shed_mw += s;
    plan.feasible = true;
    return plan;
}

} // namespace hfsim::dc
