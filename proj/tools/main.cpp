// hfsim: batch front end for grid protection cascade studies.
//
// Every subcommand reads one relaycase-1 JSON file and emits CSV or JSON.
// Output is byte-deterministic for a fixed (case, flags, seed) triple, so
// runs can be diffed directly.

#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "hfsim/cascade.hpp"
#include "hfsim/critical.hpp"
#include "hfsim/dcflow.hpp"
#include "hfsim/mitigate.hpp"
#include "hfsim/netmodel.hpp"
#include "hfsim/textio.hpp"

using ordered_json = nlohmann::ordered_json;
using namespace hfsim;

namespace {

// Command-line mistakes (exit 1), as opposed to bad data files (exit 2).
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct CommonArgs {
    std::string case_path;
    std::string format = "csv";
    std::string out_dir;
    unsigned long long seed = 0;
    int threads = 1;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--case", args.case_path, "relaycase-1 JSON file")->required();
    cmd->add_option("--format", args.format, "output format")
        ->check(CLI::IsMember({"csv", "json"}))
        ->capture_default_str();
    cmd->add_option("--out", args.out_dir, "directory to write outputs to instead of stdout");
    cmd->add_option("--seed", args.seed, "seed for randomized subcommands")
        ->capture_default_str();
    cmd->add_option("--threads", args.threads, "worker threads for scenario sweeps")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
}

GridCase load_case(const CommonArgs& args) { return parse_case(read_file(args.case_path)); }

void emit(const CommonArgs& args, const std::string& stem, const std::string& ext,
          const std::string& content) {
    if (args.out_dir.empty()) {
        std::cout << content;
        return;
    }
    std::filesystem::create_directories(args.out_dir);
    write_file(args.out_dir + "/" + stem + ext, content);
}

std::string join_ints(const std::vector<int>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) s += ';';
        s += std::to_string(v[i]);
    }
    return s;
}

ElementRef parse_element_arg(const std::string& text, const char* flag) {
    try {
        return parse_element(text);
    } catch (const std::invalid_argument& e) {
        throw UsageError(std::string(flag) + ": " + e.what());
    }
}

cascade::LatentFailure parse_hidden_arg(const std::string& text) {
    auto colon = text.find(':');
    auto eq = text.find('=');
    if (colon == std::string::npos || eq == std::string::npos || eq < colon)
        throw UsageError("--hidden must look like BRANCH:component=STATE, got: " + text);
    cascade::LatentFailure lf;
    try {
        lf.branch = std::stoi(text.substr(0, colon));
        lf.component = relay::parse_component(text.substr(colon + 1, eq - colon - 1));
        lf.state = relay::parse_state(text.substr(eq + 1));
    } catch (const std::exception& e) {
        throw UsageError("--hidden " + text + ": " + e.what());
    }
    return lf;
}

// ---------------------------------------------------------------- validate

int run_validate(const CommonArgs& args) {
    GridCase c = load_case(args);  // throws on any violation
    if (args.format == "json") {
        ordered_json doc;
        doc["valid"] = true;
        doc["buses"] = c.buses.size();
        doc["branches"] = c.branches.size();
        doc["generators"] = c.generators.size();
        doc["loads"] = c.loads.size();
        doc["protection_groups"] = c.protection.size();
        emit(args, "validate", ".json", doc.dump(2) + "\n");
    } else {
        std::string out = csv_row({"buses", "branches", "generators", "loads",
                                   "protection_groups"});
        out += csv_row({std::to_string(c.buses.size()), std::to_string(c.branches.size()),
                        std::to_string(c.generators.size()), std::to_string(c.loads.size()),
                        std::to_string(c.protection.size())});
        emit(args, "validate", ".csv", out);
    }
    return 0;
}

// -------------------------------------------------------------------- flow

int run_flow(const CommonArgs& args) {
    GridCase c = load_case(args);
    dc::FlowSolution sol = dc::solve_case(c);
    if (!sol.converged) throw std::runtime_error("flow did not converge: " + sol.detail);

    if (args.format == "json") {
        ordered_json doc;
        doc["converged"] = sol.converged;
        ordered_json theta = ordered_json::object();
        for (const auto& [bus, rad] : sol.theta) theta[std::to_string(bus)] = rad;
        doc["theta_rad"] = theta;
        ordered_json flows = ordered_json::array();
        for (const auto& [id, mw] : sol.flow_mw) {
            const Branch* br = c.find_branch(id);
            ordered_json row;
            row["branch"] = id;
            row["from_bus"] = br->from_bus;
            row["to_bus"] = br->to_bus;
            row["flow_mw"] = mw;
            row["flow_pu"] = mw / c.base_mw;
            row["rating_mw"] = br->rating_mw;
            row["loading"] = std::abs(mw) / br->rating_mw;
            flows.push_back(row);
        }
        doc["flows"] = flows;
        emit(args, "flow", ".json", doc.dump(2) + "\n");
    } else {
        std::string out = csv_row(
            {"branch", "from_bus", "to_bus", "flow_mw", "flow_pu", "rating_mw", "loading"});
        for (const auto& [id, mw] : sol.flow_mw) {
            const Branch* br = c.find_branch(id);
            out += csv_row({std::to_string(id), std::to_string(br->from_bus),
                            std::to_string(br->to_bus), format_double(mw),
                            format_double(mw / c.base_mw), format_double(br->rating_mw),
                            format_double(std::abs(mw) / br->rating_mw)});
        }
        emit(args, "flow", ".csv", out);
    }
    return 0;
}

// ------------------------------------------------------------------ screen

int run_screen(const CommonArgs& args, const dc::CriteriaThresholds& thresholds) {
    GridCase c = load_case(args);
    dc::FlowSolution base = dc::solve_case(c);
    if (!base.converged) throw std::runtime_error("base flow did not converge: " + base.detail);

    std::vector<int> ids;
    for (const auto& br : c.branches)
        if (br.in_service) ids.push_back(br.id);
    std::sort(ids.begin(), ids.end());

    if (args.format == "json") {
        ordered_json rows = ordered_json::array();
        for (int id : ids) {
            dc::CriteriaReport rep = dc::screening_criteria(c, base, {id}, thresholds);
            ordered_json row;
            row["branch"] = id;
            row["c1"] = rep.c1;
            row["c2"] = rep.c2;
            row["c3"] = rep.c3;
            row["c4"] = rep.c4;
            row["flag_c1"] = rep.flag_c1;
            row["flag_c2"] = rep.flag_c2;
            row["flag_c3"] = rep.flag_c3;
            row["flag_c4"] = rep.flag_c4;
            row["stranded_buses"] = rep.stranded_buses;
            rows.push_back(row);
        }
        emit(args, "screen", ".json", rows.dump(2) + "\n");
    } else {
        std::string out = csv_row({"branch", "c1", "c2", "c3", "c4", "flag_c1", "flag_c2",
                                   "flag_c3", "flag_c4", "stranded_buses"});
        for (int id : ids) {
            dc::CriteriaReport rep = dc::screening_criteria(c, base, {id}, thresholds);
            out += csv_row({std::to_string(id), format_double(rep.c1), format_double(rep.c2),
                            format_double(rep.c3), format_double(rep.c4),
                            rep.flag_c1 ? "true" : "false", rep.flag_c2 ? "true" : "false",
                            rep.flag_c3 ? "true" : "false", rep.flag_c4 ? "true" : "false",
                            join_ints(rep.stranded_buses)});
        }
        emit(args, "screen", ".csv", out);
    }
    return 0;
}

// ----------------------------------------------------------------- cascade

int run_cascade_cmd(const CommonArgs& args, const std::string& fault_text,
                    const std::vector<std::string>& hidden_texts,
                    cascade::ScenarioSpec spec) {
    GridCase c = load_case(args);
    spec.initiating_fault = parse_element_arg(fault_text, "--fault");
    for (const auto& h : hidden_texts) spec.hidden_failures.push_back(parse_hidden_arg(h));
    spec.seed = args.seed;

    cascade::CascadeTrace trace = cascade::run_cascade(c, spec);
    if (!args.out_dir.empty()) {
        std::filesystem::create_directories(args.out_dir);
        write_file(args.out_dir + "/events.ndjson", cascade::events_ndjson(trace));
        write_file(args.out_dir + "/summary.json", cascade::summary_json(trace));
        return 0;
    }
    if (args.format == "json") {
        std::cout << cascade::summary_json(trace);
    } else {
        std::string out = csv_row(
            {"load_lost_mw", "lines_tripped", "depth", "truncated", "tripped_branches"});
        out += csv_row({format_double(trace.load_lost_mw), std::to_string(trace.lines_tripped),
                        std::to_string(trace.depth), trace.truncated ? "true" : "false",
                        join_ints({trace.tripped_branches.begin(), trace.tripped_branches.end()})});
        std::cout << out;
    }
    return 0;
}

// -------------------------------------------------------------------- rank

int run_rank(const CommonArgs& args, const critical::RankOptions& options) {
    GridCase c = load_case(args);
    std::vector<critical::RelayImpact> rows = critical::rank_relays(c, options);

    if (args.format == "json") {
        ordered_json doc = ordered_json::array();
        for (const auto& r : rows) {
            ordered_json row;
            row["branch"] = r.branch;
            row["scheme"] = relay::to_string(r.scheme);
            row["scenarios"] = r.scenarios;
            row["worst_load_lost_mw"] = r.worst_load_lost_mw;
            row["expected_load_lost_mw"] = r.expected_load_lost_mw;
            row["flagged_by_criteria"] = r.flagged_by_criteria;
            doc.push_back(row);
        }
        emit(args, "rank", ".json", doc.dump(2) + "\n");
    } else {
        std::string out = csv_row({"branch", "scheme", "scenarios", "worst_load_lost_mw",
                                   "expected_load_lost_mw", "flagged_by_criteria"});
        for (const auto& r : rows)
            out += csv_row({std::to_string(r.branch), std::string(relay::to_string(r.scheme)),
                            std::to_string(r.scenarios), format_double(r.worst_load_lost_mw),
                            format_double(r.expected_load_lost_mw),
                            std::to_string(r.flagged_by_criteria)});
        emit(args, "rank", ".csv", out);
    }
    return 0;
}

// ----------------------------------------------------------- minimal-sets

int run_minimal_sets(const CommonArgs& args, critical::ChemistryOptions options) {
    GridCase c = load_case(args);
    options.seed = args.seed;
    std::vector<critical::MinimalSet> sets = critical::minimal_cascading_sets(c, options);

    if (args.format == "json") {
        ordered_json doc = ordered_json::array();
        for (const auto& s : sets) {
            ordered_json row;
            row["elements"] = s.elements;
            row["load_lost_mw"] = s.load_lost_mw;
            row["minimal"] = s.minimal;
            doc.push_back(row);
        }
        emit(args, "minimal_sets", ".json", doc.dump(2) + "\n");
    } else {
        std::string out = csv_row({"size", "elements", "load_lost_mw", "minimal"});
        for (const auto& s : sets)
            out += csv_row({std::to_string(s.elements.size()), join_ints(s.elements),
                            format_double(s.load_lost_mw), s.minimal ? "true" : "false"});
        emit(args, "minimal_sets", ".csv", out);
    }
    return 0;
}

// ---------------------------------------------------------------- mitigate

int run_mitigate(const CommonArgs& args, double prior, int voting_n, int voting_k,
                 const critical::RankOptions& rank_options) {
    GridCase c = load_case(args);
    std::vector<mitigate::ComparisonRow> rows =
        mitigate::mitigation_comparison(c, prior, rank_options);

    if (voting_n != 3 || voting_k != 2) {
        // The case-as-loaded total is the row for its own profile.
        double baseline = 0.0;
        for (const auto& r : rows)
            if (r.strategy == relay::to_string(c.profile)) baseline = r.total_expected_load_lost_mw;
        mitigate::VotingConfig cfg;
        cfg.n = voting_n;
        cfg.k = voting_k;
        cfg.p_misop = prior;
        double scale = prior > 0.0 ? mitigate::k_of_n_misoperation(cfg) / prior : 0.0;
        rows.push_back({"VOTING_" + std::to_string(voting_k) + "OO" + std::to_string(voting_n),
                        baseline * scale});
    }

    if (args.format == "json") {
        ordered_json doc = ordered_json::array();
        for (const auto& r : rows) {
            ordered_json row;
            row["strategy"] = r.strategy;
            row["total_expected_load_lost_mw"] = r.total_expected_load_lost_mw;
            doc.push_back(row);
        }
        emit(args, "mitigate", ".json", doc.dump(2) + "\n");
    } else {
        std::string out = csv_row({"strategy", "total_expected_load_lost_mw"});
        for (const auto& r : rows)
            out += csv_row({r.strategy, format_double(r.total_expected_load_lost_mw)});
        emit(args, "mitigate", ".csv", out);
    }
    return 0;
}

// ---------------------------------------------------------------- estimate

std::vector<mitigate::Measurement> load_measurements(const std::string& path) {
    ordered_json doc;
    try {
        doc = ordered_json::parse(read_file(path));
    } catch (const nlohmann::json::parse_error& e) {
        throw std::runtime_error("measurements file: " + std::string(e.what()));
    }
    if (!doc.is_array()) throw std::runtime_error("measurements file must hold a JSON array");
    std::vector<mitigate::Measurement> out;
    for (const auto& item : doc) {
        if (!item.is_object()) throw std::runtime_error("each measurement must be an object");
        for (const auto& [key, value] : item.items()) {
            (void)value;
            if (key != "kind" && key != "element" && key != "value_mw" && key != "sigma_mw")
                throw std::runtime_error("unknown measurement field \"" + key + "\"");
        }
        mitigate::Measurement m;
        std::string kind = item.at("kind").get<std::string>();
        if (kind == "BRANCH_FLOW")
            m.kind = mitigate::MeasurementKind::BRANCH_FLOW;
        else if (kind == "BUS_INJECTION")
            m.kind = mitigate::MeasurementKind::BUS_INJECTION;
        else
            throw std::runtime_error("unknown measurement kind \"" + kind + "\"");
        m.element = parse_element(item.at("element").get<std::string>());
        m.value_mw = item.at("value_mw").get<double>();
        m.sigma_mw = item.at("sigma_mw").get<double>();
        out.push_back(m);
    }
    return out;
}

int run_estimate(const CommonArgs& args, const std::string& measurements_path,
                 double confidence) {
    GridCase c = load_case(args);
    std::vector<mitigate::Measurement> measurements = load_measurements(measurements_path);
    mitigate::EstimationResult res = mitigate::dc_state_estimate(c, measurements, confidence);

    ordered_json doc;
    ordered_json theta = ordered_json::object();
    for (const auto& [bus, rad] : res.theta) theta[std::to_string(bus)] = rad;
    doc["theta_rad"] = theta;
    doc["rejected"] = res.rejected;
    doc["chi2"] = res.chi2;
    doc["dof"] = res.dof;
    doc["chi2_threshold"] = res.chi2_threshold;
    doc["passed"] = res.passed;
    doc["detail"] = res.detail;
    emit(args, "estimate", ".json", doc.dump(2) + "\n");
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"transmission protection hidden-failure cascade toolkit"};
    app.require_subcommand(1);

    CommonArgs args;

    auto* validate_cmd = app.add_subcommand("validate", "parse and cross-check a case file");
    add_common(validate_cmd, args);

    auto* flow_cmd = app.add_subcommand("flow", "DC power flow for the base case");
    add_common(flow_cmd, args);

    dc::CriteriaThresholds thresholds;
    auto add_thresholds = [&](CLI::App* cmd) {
        cmd->add_option("--threshold-c1", thresholds.c1, "determinant-change flag level")
            ->capture_default_str();
        cmd->add_option("--threshold-c2", thresholds.c2, "post-contingency loading flag level")
            ->capture_default_str();
        cmd->add_option("--threshold-c3", thresholds.c3, "max angle-deviation flag level (rad)")
            ->capture_default_str();
        cmd->add_option("--threshold-c4", thresholds.c4, "angle-deviation 2-norm flag level")
            ->capture_default_str();
    };

    auto* screen_cmd =
        app.add_subcommand("screen", "screening criteria for every single-branch contingency");
    add_common(screen_cmd, args);
    add_thresholds(screen_cmd);

    auto* cascade_cmd = app.add_subcommand("cascade", "simulate one fault scenario");
    add_common(cascade_cmd, args);
    std::string fault_text;
    std::vector<std::string> hidden_texts;
    cascade::ScenarioSpec scenario;
    cascade_cmd->add_option("--fault", fault_text, "initiating fault, bus:N or branch:N")
        ->required();
    cascade_cmd->add_option("--hidden", hidden_texts,
                            "latent defect BRANCH:component=STATE (repeatable)");
    cascade_cmd->add_option("--rov-depth", scenario.rov_depth, "region-of-vulnerability depth")
        ->capture_default_str();
    cascade_cmd
        ->add_option("--overload-factor", scenario.overload_trip_factor,
                     "emergency rating multiple that trips a line")
        ->capture_default_str();
    cascade_cmd->add_option("--max-steps", scenario.max_steps, "propagation iteration cap")
        ->capture_default_str();

    auto* rank_cmd = app.add_subcommand("rank", "rank protection groups by cascade exposure");
    add_common(rank_cmd, args);
    critical::RankOptions rank_options;
    rank_cmd->add_option("--prior", rank_options.prior_misop, "per-scenario misoperation prior")
        ->capture_default_str();
    rank_cmd->add_option("--rov-depth", rank_options.rov_depth, "region-of-vulnerability depth")
        ->capture_default_str();
    rank_cmd
        ->add_option("--overload-factor", rank_options.overload_trip_factor,
                     "emergency rating multiple that trips a line")
        ->capture_default_str();
    rank_cmd->add_option("--max-steps", rank_options.max_steps, "propagation iteration cap")
        ->capture_default_str();
    add_thresholds(rank_cmd);

    auto* minimal_cmd =
        app.add_subcommand("minimal-sets", "random-chemistry search for minimal cascading sets");
    add_common(minimal_cmd, args);
    critical::ChemistryOptions chemistry;
    minimal_cmd
        ->add_option("--blackout-threshold", chemistry.blackout_threshold_mw,
                     "loss (MW) counting as blackout; default 10% of total load")
        ->capture_default_str();
    minimal_cmd->add_option("--k0", chemistry.k0, "outage sample size per trial")
        ->capture_default_str();
    minimal_cmd->add_option("--trials", chemistry.trials, "number of sampling trials")
        ->capture_default_str();
    minimal_cmd
        ->add_option("--overload-factor", chemistry.overload_trip_factor,
                     "emergency rating multiple that trips a line")
        ->capture_default_str();
    minimal_cmd->add_option("--max-steps", chemistry.max_steps, "propagation iteration cap")
        ->capture_default_str();

    auto* mitigate_cmd =
        app.add_subcommand("mitigate", "compare mitigation strategies by expected loss");
    add_common(mitigate_cmd, args);
    critical::RankOptions mitigate_rank;
    double mitigate_prior = 0.10;
    int voting_n = 3, voting_k = 2;
    mitigate_cmd->add_option("--prior", mitigate_prior, "per-scenario misoperation prior")
        ->capture_default_str();
    mitigate_cmd->add_option("--voting-n", voting_n, "voting group size")->capture_default_str();
    mitigate_cmd->add_option("--voting-k", voting_k, "votes required to trip")
        ->capture_default_str();
    mitigate_cmd->add_option("--rov-depth", mitigate_rank.rov_depth,
                             "region-of-vulnerability depth")
        ->capture_default_str();
    mitigate_cmd
        ->add_option("--overload-factor", mitigate_rank.overload_trip_factor,
                     "emergency rating multiple that trips a line")
        ->capture_default_str();
    mitigate_cmd->add_option("--max-steps", mitigate_rank.max_steps, "propagation iteration cap")
        ->capture_default_str();

    auto* estimate_cmd =
        app.add_subcommand("estimate", "DC state estimation with bad-data rejection");
    add_common(estimate_cmd, args);
    std::string measurements_path;
    double confidence = 0.99;
    estimate_cmd->add_option("--measurements", measurements_path, "JSON measurement list")
        ->required();
    estimate_cmd->add_option("--confidence", confidence, "chi-squared test confidence")
        ->capture_default_str();

    try {
        app.parse(argc, argv);
        if (voting_n < 1 || voting_k < 1 || voting_k > voting_n)
            throw UsageError("--voting-k/--voting-n need 1 <= k <= n");
        rank_options.threads = args.threads;
        mitigate_rank.threads = args.threads;
        if (validate_cmd->parsed()) return run_validate(args);
        if (flow_cmd->parsed()) return run_flow(args);
        if (screen_cmd->parsed()) return run_screen(args, thresholds);
        if (cascade_cmd->parsed()) return run_cascade_cmd(args, fault_text, hidden_texts, scenario);
        if (rank_cmd->parsed()) return run_rank(args, rank_options);
        if (minimal_cmd->parsed()) return run_minimal_sets(args, chemistry);
        if (mitigate_cmd->parsed())
            return run_mitigate(args, mitigate_prior, voting_n, voting_k, mitigate_rank);
        if (estimate_cmd->parsed()) return run_estimate(args, measurements_path, confidence);
        return 0;
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // help requested
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const ParseError& e) {
        std::cerr << "error: " << args.case_path << ": " << e.what();
        if (e.line > 0) std::cerr << " (line " << e.line << ", column " << e.column << ")";
        std::cerr << "\n";
        return 2;
    } catch (const SemanticError& e) {
        for (const auto& v : e.violations)
            std::cerr << "error: " << v.rule << " at " << to_string(v.element) << ": " << v.detail
                      << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
