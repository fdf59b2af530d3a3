#include "hfsim/mitigate.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

#include <Eigen/Dense>
#include <boost/math/distributions/chi_squared.hpp>

#include "hfsim/dcflow.hpp"

namespace hfsim::mitigate {

namespace {

void check_probability(double v, const char* name) {
    if (!(v >= 0.0 && v <= 1.0))
        throw std::invalid_argument(std::string(name) + " must lie in [0, 1]");
}

void check_voting(const VotingConfig& cfg) {
    if (cfg.n < 1 || cfg.k < 1 || cfg.k > cfg.n)
        throw std::invalid_argument("voting needs 1 <= k <= n");
    check_probability(cfg.p_misop, "p_misop");
    check_probability(cfg.q_fail, "q_fail");
    check_probability(cfg.common_cause_beta, "common_cause_beta");
}

// Sum of the binomial tail P(X >= from) for X ~ B(n, p).
double binomial_tail(int n, int from, double p) {
    if (from <= 0) return 1.0;
    if (from > n) return 0.0;
    double sum = 0.0;
    double choose = 1.0;
    for (int j = 0; j <= n; ++j) {
        if (j >= from) sum += choose * std::pow(p, j) * std::pow(1.0 - p, n - j);
        choose = choose * (n - j) / (j + 1);
    }
    return sum;
}

} // namespace

double k_of_n_misoperation(const VotingConfig& cfg) {
    check_voting(cfg);
    double independent = binomial_tail(cfg.n, cfg.k, cfg.p_misop);
    return cfg.common_cause_beta * cfg.p_misop +
           (1.0 - cfg.common_cause_beta) * independent;
}

double k_of_n_failure_to_trip(const VotingConfig& cfg) {
    check_voting(cfg);
    // Fails to trip when fewer than k relays operate, i.e. more than n-k fail.
    double independent = binomial_tail(cfg.n, cfg.n - cfg.k + 1, cfg.q_fail);
    return cfg.common_cause_beta * cfg.q_fail +
           (1.0 - cfg.common_cause_beta) * independent;
}

SupervisedPair supervisory_and(double p_relay, double p_super, double q_relay, double q_super) {
    check_probability(p_relay, "p_relay");
    check_probability(p_super, "p_super");
    check_probability(q_relay, "q_relay");
    check_probability(q_super, "q_super");
    SupervisedPair out;
    out.misoperation = p_relay * p_super;
    out.failure_to_trip = q_relay + q_super - q_relay * q_super;
    return out;
}

GridCase apply_monitoring(const GridCase& c, relay::Profile profile) {
    GridCase out = c;
    out.profile = profile;
    for (auto& group : out.protection) {
        const auto credible = relay::modes_for_profile(group.scheme, profile);
        relay::ComponentHealth healed(group.scheme);
        for (const auto& [component, state] : group.health.overrides()) {
            bool survives = std::any_of(credible.begin(), credible.end(),
                                        [&](const relay::HiddenFailureMode& m) {
                                            return m.component == component && m.state == state;
                                        });
            if (survives) healed.set(component, state);
        }
        group.health = healed;
    }
    return out;
}

std::string_view to_string(MeasurementKind k) {
    return k == MeasurementKind::BRANCH_FLOW ? "BRANCH_FLOW" : "BUS_INJECTION";
}

namespace {

struct Model {
    Eigen::MatrixXd h;      // rows follow `active`
    Eigen::VectorXd z;
    Eigen::VectorXd sigma;
};

Model build_model(const GridCase& c, const std::vector<Measurement>& all,
                  const std::vector<std::size_t>& active,
                  const std::map<int, int>& column_of) {
    Model m;
    const int n = static_cast<int>(column_of.size());
    m.h = Eigen::MatrixXd::Zero(static_cast<int>(active.size()), n);
    m.z.resize(static_cast<int>(active.size()));
    m.sigma.resize(static_cast<int>(active.size()));

    auto add = [&](int row, int bus, double coeff) {
        auto it = column_of.find(bus);
        if (it != column_of.end()) m.h(row, it->second) += coeff;
    };

    for (int row = 0; row < static_cast<int>(active.size()); ++row) {
        const Measurement& meas = all[active[row]];
        m.z(row) = meas.value_mw;
        m.sigma(row) = meas.sigma_mw;
        if (meas.kind == MeasurementKind::BRANCH_FLOW) {
            const Branch* br = c.find_branch(meas.element.id);
            double t = c.base_mw / br->reactance;
            add(row, br->from_bus, t);
            add(row, br->to_bus, -t);
        } else {
            for (const auto& br : c.branches) {
                if (!br.in_service) continue;
                if (br.from_bus != meas.element.id && br.to_bus != meas.element.id) continue;
                double t = c.base_mw / br.reactance;
                if (br.from_bus == meas.element.id) {
                    add(row, br.from_bus, t);
                    add(row, br.to_bus, -t);
                } else {
                    add(row, br.to_bus, t);
                    add(row, br.from_bus, -t);
                }
            }
        }
    }
    return m;
}

int model_rank(const Eigen::MatrixXd& h) {
    if (h.rows() == 0 || h.cols() == 0) return 0;
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(h);
    return static_cast<int>(qr.rank());
}

} // namespace

EstimationResult dc_state_estimate(const GridCase& c,
                                   const std::vector<Measurement>& measurements,
                                   double confidence) {
    if (!(confidence > 0.0 && confidence < 1.0))
        throw std::invalid_argument("confidence must lie in (0, 1)");
    for (const auto& m : measurements) {
        if (m.sigma_mw <= 0.0) throw std::invalid_argument("measurement sigma must be positive");
        if (m.kind == MeasurementKind::BRANCH_FLOW) {
            const Branch* br = c.find_branch(m.element.id);
            if (m.element.kind != ElementKind::BRANCH || !br || !br->in_service)
                throw std::invalid_argument("flow measurement on unknown or open branch " +
                                            std::to_string(m.element.id));
        } else {
            if (m.element.kind != ElementKind::BUS || !c.find_bus(m.element.id))
                throw std::invalid_argument("injection measurement on unknown bus " +
                                            std::to_string(m.element.id));
        }
    }

    EstimationResult result;
    std::map<int, int> column_of;  // non-slack bus -> state column
    for (const auto& bus : c.buses) {
        result.theta[bus.id] = 0.0;
        if (!bus.slack) {
            int col = static_cast<int>(column_of.size());
            column_of[bus.id] = col;
        }
    }
    const int n_states = static_cast<int>(column_of.size());

    std::vector<std::size_t> active(measurements.size());
    for (std::size_t i = 0; i < active.size(); ++i) active[i] = i;

    for (;;) {
        Model model = build_model(c, measurements, active, column_of);
        if (model_rank(model.h) < n_states) {
            result.passed = false;
            result.detail = "measurement set does not observe every bus angle";
            return result;
        }

        Eigen::VectorXd w = model.sigma.array().square().inverse();
        Eigen::MatrixXd gain = model.h.transpose() * w.asDiagonal() * model.h;
        Eigen::LDLT<Eigen::MatrixXd> gain_ldlt(gain);
        Eigen::VectorXd theta = gain_ldlt.solve(model.h.transpose() * (w.asDiagonal() * model.z));
        Eigen::VectorXd residual = model.z - model.h * theta;

        for (const auto& [bus, col] : column_of) result.theta[bus] = theta(col);
        result.chi2 = (residual.array() / model.sigma.array()).square().sum();
        result.dof = static_cast<int>(active.size()) - n_states;

        if (result.dof <= 0) {
            result.chi2_threshold = 0.0;
            result.passed = false;
            result.detail = "no redundancy: zero degrees of freedom, bad data cannot be detected";
            return result;
        }
        boost::math::chi_squared dist(result.dof);
        result.chi2_threshold = boost::math::quantile(dist, confidence);
        if (result.chi2 <= result.chi2_threshold) {
            result.passed = true;
            return result;
        }

        // Residual covariance diagonal; a (near-)zero entry marks a critical
        // measurement whose removal would lose observability.
        Eigen::MatrixXd hg = model.h * gain_ldlt.solve(model.h.transpose());
        int best = -1;
        double best_score = 0.0;
        for (int i = 0; i < residual.size(); ++i) {
            double omega = model.sigma(i) * model.sigma(i) - hg(i, i);
            if (omega <= 1e-8 * model.sigma(i) * model.sigma(i)) continue;
            double score = std::abs(residual(i)) / std::sqrt(omega);
            if (score > best_score) {
                best_score = score;
                best = i;
            }
        }
        if (best < 0) {
            result.passed = false;
            result.detail = "rejection would break observability; bad data stays unresolved";
            return result;
        }
        result.rejected.push_back(active[best]);
        active.erase(active.begin() + best);
    }
}

std::vector<ComparisonRow> mitigation_comparison(const GridCase& c, double prior,
                                                 const critical::RankOptions& rank_options) {
    check_probability(prior, "prior");
    critical::RankOptions options = rank_options;
    options.prior_misop = prior;

    auto total_expected = [&](const GridCase& variant) {
        double sum = 0.0;
        for (const auto& row : critical::rank_relays(variant, options))
            sum += row.expected_load_lost_mw;
        return sum;
    };

    std::vector<ComparisonRow> rows;
    for (relay::Profile profile : {relay::Profile::ELECTROMECHANICAL, relay::Profile::DIGITAL,
                                   relay::Profile::DIGITAL_WITH_MONITORING}) {
        rows.push_back({std::string(relay::to_string(profile)),
                        total_expected(apply_monitoring(c, profile))});
    }

    VotingConfig voting;
    voting.p_misop = prior;
    double scale = prior > 0.0 ? k_of_n_misoperation(voting) / prior : 0.0;
    rows.push_back({"VOTING_2OO3", total_expected(c) * scale});
    return rows;
}

} // namespace hfsim::mitigate
