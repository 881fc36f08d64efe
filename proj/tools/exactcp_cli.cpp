// exactcp: exact Bayesian change-point posteriors and cross-series comparison.
//
// All locations are 1-based; tau_k is reported as the first location of
// segment k+1.

#include <fstream>
#include <iostream>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "exactcp/reports.hpp"
#include "exactcp/series_io.hpp"

using namespace exactcp;

namespace {

struct ModelOptions {
    std::string model = "poisson";
    double phi = 0.0;
    bool estimate_phi = false;
    double sigma2 = 0.0;
    std::vector<double> prior;
};

struct CommonOptions {
    ModelOptions model;
    std::vector<std::string> inputs;
    std::vector<std::size_t> segments;
    std::vector<std::size_t> indices;
    std::vector<std::string> prior_e0;
    double level = 0.95;
    std::string out;
    std::string format = "json";
};

void add_model_options(CLI::App* cmd, ModelOptions& m) {
    cmd->add_option("--model", m.model, "Emission family")
        ->check(CLI::IsMember({"nb", "poisson", "gauss-known-var", "gauss-hetero"}));
    cmd->add_option("--phi", m.phi, "Known NB dispersion phi");
    cmd->add_flag("--estimate-phi", m.estimate_phi, "Estimate phi per series (NB)");
    cmd->add_option("--sigma2", m.sigma2, "Known variance (gauss-known-var)");
    cmd->add_option("--prior", m.prior,
                    "Hyperparameters: nb alpha,beta | poisson shape,rate | "
                    "gauss-known-var mean,scale | gauss-hetero mean,scale,shape,rate")
        ->delimiter(',')
        ->allow_extra_args(false);
}

void add_common(CLI::App* cmd, CommonOptions& o, bool with_k, bool with_p0) {
    add_model_options(cmd, o.model);
    cmd->add_option("inputs", o.inputs, "Series files (one value per line, or TSV with header)")
        ->required();
    // Repeatable options take one value per occurrence so that positional
    // inputs are never swallowed.
    cmd->add_option("--K", o.segments, "Number of segments, once or once per series")
        ->required()
        ->allow_extra_args(false);
    if (with_k)
        cmd->add_option("--k", o.indices, "Change-point index, once or once per series")
            ->allow_extra_args(false);
    if (with_p0)
        cmd->add_option("--p0", o.prior_e0, "Prior P(E0): one value, one per compared k, or 'q0'")
            ->allow_extra_args(false);
    cmd->add_option("--level", o.level, "Credibility level")->check(CLI::Range(0.0, 1.0));
    cmd->add_option("--out", o.out, "Output path (default: stdout)");
    cmd->add_option("--format", o.format, "Output format")->check(CLI::IsMember({"json", "csv"}));
}

AnalysisRequest to_request(const CommonOptions& o, const CLI::App* cmd) {
    AnalysisRequest r;
    r.family = *parse_family(o.model.model);
    if (cmd->count("--phi") > 0) r.phi = o.model.phi;
    r.estimate_phi = o.model.estimate_phi;
    if (cmd->count("--sigma2") > 0) r.sigma2 = o.model.sigma2;
    r.prior = o.model.prior;
    r.segments = o.segments;
    r.indices = o.indices;
    r.prior_e0 = o.prior_e0;
    r.level = o.level;
    r.format = o.format == "csv" ? OutputFormat::Csv : OutputFormat::Json;
    return r;
}

std::vector<CountSeries> load_all(const std::vector<std::string>& paths) {
    std::vector<CountSeries> all;
    for (const auto& p : paths) {
        auto series = read_series_file(p);
        all.insert(all.end(), series.begin(), series.end());
    }
    return all;
}

void emit(const std::string& text, const std::string& out) {
    if (out.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream file(out, std::ios::binary);
    if (!file) throw InvalidInput("cannot write output file '" + out + "'");
    file << text;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Exact Bayesian change-point posteriors and change-point comparison"};
    app.require_subcommand(1);

    CommonOptions seg_opts;
    auto* seg = app.add_subcommand("segment", "Posterior of every change-point of each series");
    add_common(seg, seg_opts, false, false);

    CommonOptions shift_opts;
    auto* shift = app.add_subcommand("compare-shift", "Posterior of the shift between two change-points");
    add_common(shift, shift_opts, true, false);
    shift->get_option("--k")->required();

    CommonOptions common_opts;
    auto* common = app.add_subcommand("compare-common",
                                      "Posterior probability of a common change-point");
    add_common(common, common_opts, true, true);

    std::vector<std::string> phi_inputs;
    std::size_t window = 15;
    std::string phi_out;
    auto* phi = app.add_subcommand("estimate-phi", "Sliding-window moments estimate of NB phi");
    phi->add_option("inputs", phi_inputs, "Series files")->required();
    phi->add_option("--window", window, "Initial window size")->check(CLI::PositiveNumber);
    phi->add_option("--out", phi_out, "Output path (default: stdout)");

    SimulationConfig sim;
    std::string sim_model = "nb";
    std::string sim_out;
    bool no_control = false;
    auto* simulate = app.add_subcommand("simulate", "Three-profile simulation study (CSV)");
    simulate->add_option("--model", sim_model, "Emission family")
        ->check(CLI::IsMember({"nb", "poisson"}));
    simulate->add_option("--base", sim.base_level, "p0 (nb) or lambda0 (poisson)")->required();
    simulate->add_option("--s", sim.odds_ratio, "Odds ratio s")->required();
    simulate->add_option("--phi", sim.phi, "True NB dispersion");
    simulate->add_option("--replicates", sim.replicates, "Replicates");
    simulate->add_option("--seed", sim.seed, "Random seed");
    simulate->add_flag("--use-true-phi", sim.use_true_phi, "Analyse with the true phi");
    simulate->add_flag("--no-control", no_control, "Skip the d=0 control profiles");
    simulate->add_option("--p0", sim.prior_e0, "Prior P(E0)");
    simulate->add_option("--window", sim.initial_window, "Initial dispersion window");
    simulate->add_option("--out", sim_out, "Output path (default: stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitInputError;
    }

    try {
        CommandOutput result;
        std::string out;
        if (*seg) {
            result = cmd_segment(to_request(seg_opts, seg), load_all(seg_opts.inputs));
            out = seg_opts.out;
        } else if (*shift) {
            result = cmd_compare_shift(to_request(shift_opts, shift), load_all(shift_opts.inputs));
            out = shift_opts.out;
        } else if (*common) {
            result = cmd_compare_common(to_request(common_opts, common), load_all(common_opts.inputs));
            out = common_opts.out;
        } else if (*phi) {
            result = cmd_estimate_phi(load_all(phi_inputs), window);
            out = phi_out;
        } else if (*simulate) {
            sim.family = *parse_family(sim_model);
            sim.include_control = !no_control;
            result = cmd_simulate(sim);
            out = sim_out;
        }
        emit(result.text, out);
        return result.exit_code;
    } catch (const InvalidInput& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitInputError;
    } catch (const NumericalDegeneracy& e) {
        std::cerr << "degenerate: " << e.what() << '\n';
        return kExitDegenerate;
    } catch (const std::exception& e) {
        std::cerr << "fatal: " << e.what() << '\n';
        return kExitFailure;
    }
}
