#include "exactcp/reports.hpp"

#include <cmath>
#include <iomanip>
#include <numbers>
#include <sstream>

#include <json.hpp>

#include "exactcp/comparison.hpp"
#include "exactcp/dispersion.hpp"
#include "exactcp/parallel.hpp"
#include "exactcp/segmentation.hpp"

namespace exactcp {

using nlohmann::json;

namespace {

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json log10_or_null(double p) { return p > 0.0 ? json(std::log10(p)) : json(nullptr); }

std::string dump(const json& j) { return j.dump(2) + "\n"; }

std::size_t per_series(const std::vector<std::size_t>& values, std::size_t i, std::size_t count,
                       const char* flag) {
    if (values.empty()) throw InvalidInput(std::string("missing required option ") + flag);
    if (values.size() == 1) return values.front();
    if (values.size() != count) {
        std::ostringstream ss;
        ss << flag << " must be given once or once per series (" << count << "), got "
           << values.size();
        throw InvalidInput(ss.str());
    }
    return values[i];
}

void require_count(const std::vector<CountSeries>& series, std::size_t min, std::size_t max,
                   const char* command) {
    if (series.size() < min || series.size() > max) {
        std::ostringstream ss;
        ss << command << " needs ";
        if (min == max) {
            ss << min;
        } else {
            ss << "at least " << min;
        }
        ss << " series, got " << series.size();
        throw InvalidInput(ss.str());
    }
}

void require_equal_lengths(const std::vector<CountSeries>& series) {
    for (const auto& s : series) {
        if (s.size() != series.front().size()) {
            std::ostringstream ss;
            ss << "series '" << s.label << "' has length " << s.size() << " but '"
               << series.front().label << "' has length " << series.front().size();
            throw InvalidInput(ss.str());
        }
    }
}

json model_json(const EmissionModel& model) {
    json j;
    j["family"] = std::string(family_name(model.family()));
    std::visit(
        [&](const auto& p) {
            using P = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<P, BetaPrior>) {
                j["prior"] = {{"alpha", p.alpha}, {"beta", p.beta}};
                j["phi"] = model.dispersion();
            } else if constexpr (std::is_same_v<P, GammaPrior>) {
                j["prior"] = {{"shape", p.shape}, {"rate", p.rate}};
            } else if constexpr (std::is_same_v<P, NormalPrior>) {
                j["prior"] = {{"mean", p.mean}, {"scale", p.scale}};
                j["sigma2"] = model.variance();
            } else {
                j["prior"] = {
                    {"mean", p.mean}, {"scale", p.scale}, {"shape", p.shape}, {"rate", p.rate}};
            }
        },
        model.hyper());
    return j;
}

json interval_json(const CredibleInterval& ci) {
    return {{"level", ci.level}, {"lo", ci.lo}, {"hi", ci.hi}, {"mass", ci.attained_mass}};
}

struct FittedSeries {
    EmissionModel model;
    std::optional<double> phi_hat;
    PowerTables tables;
};

std::vector<FittedSeries> fit_all(const AnalysisRequest& request,
                                  const std::vector<CountSeries>& series) {
    std::vector<std::optional<FittedSeries>> slots(series.size());
    parallel_for(series.size(), [&](std::size_t i) {
        const std::size_t K = per_series(request.segments, i, series.size(), "--K");
        std::optional<double> phi_hat;
        EmissionModel model = model_for(request, series[i], &phi_hat);
        slots[i].emplace(FittedSeries{model, phi_hat, PowerTables(SegmentMatrix(series[i], model), K)});
    });
    std::vector<FittedSeries> out;
    out.reserve(series.size());
    for (auto& s : slots) out.push_back(std::move(*s));
    return out;
}

double parse_prior_e0(const std::string& text, double q0) {
    if (text == "q0") return q0;
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(text, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used != text.size() || used == 0) throw InvalidInput("--p0 expects a number or 'q0', got '" + text + "'");
    return v;
}

}  // namespace

EmissionModel model_for(const AnalysisRequest& request, const CountSeries& series,
                        std::optional<double>* phi_hat) {
    const auto& pr = request.prior;
    auto want = [&](std::size_t count, const char* names) {
        if (!pr.empty() && pr.size() != count) {
            throw InvalidInput(std::string("--prior for this model expects ") + names);
        }
        return !pr.empty();
    };
    switch (request.family) {
    case Family::NegativeBinomial: {
        BetaPrior prior;
        if (want(2, "alpha,beta")) prior = {pr[0], pr[1]};
        double phi = 0.0;
        if (request.estimate_phi) {
            const DispersionEstimate est = estimate_dispersion(series);
            if (!est.phi_hat) {
                throw NumericalDegeneracy("series '" + series.label +
                                          "': dispersion estimate exhausted the series; the data "
                                          "look Poisson-like, use --model poisson");
            }
            phi = *est.phi_hat;
            if (phi_hat) *phi_hat = phi;
        } else if (request.phi) {
            phi = *request.phi;
        } else {
            throw InvalidInput("--model nb needs --phi or --estimate-phi");
        }
        return EmissionModel::negative_binomial(phi, prior);
    }
    case Family::Poisson: {
        GammaPrior prior;
        if (want(2, "shape,rate")) prior = {pr[0], pr[1]};
        return EmissionModel::poisson(prior);
    }
    case Family::GaussianKnownVariance: {
        NormalPrior prior;
        if (want(2, "mean,scale")) prior = {pr[0], pr[1]};
        if (!request.sigma2) throw InvalidInput("--model gauss-known-var needs --sigma2");
        return EmissionModel::gaussian_known_variance(*request.sigma2, prior);
    }
    case Family::GaussianHeteroscedastic: {
        NormalInverseGammaPrior prior;
        if (want(4, "mean,scale,shape,rate")) prior = {pr[0], pr[1], pr[2], pr[3]};
        return EmissionModel::gaussian_heteroscedastic(prior);
    }
    }
    throw InvalidInput("unknown emission family");
}

CommandOutput cmd_segment(const AnalysisRequest& request, const std::vector<CountSeries>& series) {
    require_count(series, 1, series.size() + 1, "segment");
    const auto fitted = fit_all(request, series);

    json reports = json::array();
    std::ostringstream csv;
    csv << std::setprecision(17) << "label,k,location,probability\n";
    for (std::size_t i = 0; i < series.size(); ++i) {
        const auto& f = fitted[i];
        const LogEvidence ev = log_evidence(f.tables);
        json r;
        r["label"] = series[i].label;
        r["n"] = series[i].size();
        r["K"] = f.tables.segments();
        r["model"] = model_json(f.model);
        r["log_evidence"] = ev.value();
        r["log_partition_sum"] = ev.log_partition_sum;
        r["log_partition_count"] = ev.log_partition_count;
        if (f.phi_hat) r["phi_hat"] = *f.phi_hat;
        json cps = json::array();
        for (std::size_t k = 1; k < f.tables.segments(); ++k) {
            const ChangePointPosterior post = changepoint_posterior(f.tables, k);
            json probs = json::array();
            for (std::size_t t = 1; t <= post.probs.size(); ++t) {
                const double p = post.probs[t - 1];
                if (p == 0.0) continue;
                probs.push_back({{"location", t}, {"probability", p}, {"log10_probability", std::log10(p)}});
                csv << series[i].label << ',' << k << ',' << t << ',' << p << '\n';
            }
            cps.push_back({{"k", k},
                           {"mode", post.mode()},
                           {"posterior", probs},
                           {"credible_interval", interval_json(credible_interval(post, request.level))}});
        }
        r["changepoints"] = cps;
        reports.push_back(r);
    }
    if (request.format == OutputFormat::Csv) return {csv.str(), kExitOk};
    return {dump({{"command", "segment"}, {"series", reports}}), kExitOk};
}

CommandOutput cmd_compare_shift(const AnalysisRequest& request,
                                const std::vector<CountSeries>& series) {
    require_count(series, 2, 2, "compare-shift");
    require_equal_lengths(series);
    const auto fitted = fit_all(request, series);
    const std::size_t k1 = per_series(request.indices, 0, 2, "--k");
    const std::size_t k2 = per_series(request.indices, 1, 2, "--k");
    const ShiftDistribution delta = shift_posterior(changepoint_posterior(fitted[0].tables, k1),
                                                    changepoint_posterior(fitted[1].tables, k2));
    const ShiftInterval ci = shift_credible_interval(delta, request.level);

    if (request.format == OutputFormat::Csv) {
        std::ostringstream csv;
        csv << std::setprecision(17) << "d,probability\n";
        for (long d = delta.min_shift(); d <= delta.max_shift(); ++d) {
            if (delta.at(d) > 0.0) csv << d << ',' << delta.at(d) << '\n';
        }
        return {csv.str(), kExitOk};
    }
    json shift = json::array();
    for (long d = delta.min_shift(); d <= delta.max_shift(); ++d) {
        const double p = delta.at(d);
        if (p == 0.0) continue;
        shift.push_back({{"d", d}, {"probability", p}, {"log10_probability", std::log10(p)}});
    }
    json interval = interval_json(ci.interval);
    interval["contains_zero"] = ci.contains_zero;
    json out = {{"command", "compare-shift"},
                {"series", {series[0].label, series[1].label}},
                {"K", {fitted[0].tables.segments(), fitted[1].tables.segments()}},
                {"k", {k1, k2}},
                {"models", {model_json(fitted[0].model), model_json(fitted[1].model)}},
                {"shift", shift},
                {"credible_interval", interval}};
    return {dump(out), kExitOk};
}

CommandOutput cmd_compare_common(const AnalysisRequest& request,
                                 const std::vector<CountSeries>& series) {
    require_count(series, 2, series.size() + 1, "compare-common");
    require_equal_lengths(series);
    const auto fitted = fit_all(request, series);
    const std::size_t I = series.size();
    const std::size_t n = series.front().size();

    std::vector<std::vector<ChangePointSpec>> comparisons;
    if (request.indices.empty()) {
        const std::size_t K = fitted.front().tables.segments();
        for (const auto& f : fitted) {
            if (f.tables.segments() != K) {
                throw InvalidInput("without --k every series needs the same K");
            }
        }
        for (std::size_t k = 1; k < K; ++k) comparisons.emplace_back(I, ChangePointSpec{K, k});
    } else {
        std::vector<ChangePointSpec> specs;
        for (std::size_t l = 0; l < I; ++l)
            specs.push_back({fitted[l].tables.segments(), per_series(request.indices, l, I, "--k")});
        comparisons.push_back(specs);
    }
    if (request.prior_e0.size() > 1 && request.prior_e0.size() != comparisons.size()) {
        std::ostringstream ss;
        ss << "--p0 must be given once or once per compared change-point (" << comparisons.size()
           << "), got " << request.prior_e0.size();
        throw InvalidInput(ss.str());
    }

    std::vector<const PowerTables*> tables;
    for (const auto& f : fitted) tables.push_back(&f.tables);

    json results = json::array();
    std::ostringstream csv;
    csv << std::setprecision(17) << "indices,p0,q0,posterior_E0,bayes_factor\n";
    for (std::size_t c = 0; c < comparisons.size(); ++c) {
        const auto& specs = comparisons[c];
        const double q0 = q0_prior(n, specs);
        const std::string p0_text = request.prior_e0.empty()
                                        ? "0.5"
                                        : request.prior_e0[request.prior_e0.size() == 1 ? 0 : c];
        CommonChangePointQuery query{specs, parse_prior_e0(p0_text, q0)};
        const ComparisonResult res = posterior_common(query, tables);

        json idx = json::array();
        std::string idx_text;
        for (const auto& s : specs) {
            idx.push_back(s.index);
            idx_text += (idx_text.empty() ? "" : ";") + std::to_string(s.index);
        }
        results.push_back({{"k", idx},
                           {"p0", res.prior_e0},
                           {"q0", res.q0},
                           {"posterior_E0", res.posterior_e0},
                           {"log10_posterior_E0", log10_or_null(res.posterior_e0)},
                           {"bayes_factor", finite_or_null(res.bayes_factor)},
                           {"log10_bayes_factor",
                            finite_or_null(res.log_bayes_factor / std::numbers::ln10)},
                           {"bayes_factor_infinite", res.bayes_factor_infinite()},
                           {"log_Q_joint", res.log_q_joint},
                           {"log_Q_marginal", res.log_q_marginal}});
        csv << idx_text << ',' << res.prior_e0 << ',' << res.q0 << ',' << res.posterior_e0 << ','
            << res.bayes_factor << '\n';
    }
    if (request.format == OutputFormat::Csv) return {csv.str(), kExitOk};

    json labels = json::array();
    json segs = json::array();
    json models = json::array();
    for (std::size_t l = 0; l < I; ++l) {
        labels.push_back(series[l].label);
        segs.push_back(fitted[l].tables.segments());
        models.push_back(model_json(fitted[l].model));
    }
    return {dump({{"command", "compare-common"},
                  {"series", labels},
                  {"K", segs},
                  {"models", models},
                  {"comparisons", results}}),
            kExitOk};
}

CommandOutput cmd_estimate_phi(const std::vector<CountSeries>& series,
                               std::size_t initial_window) {
    json reports = json::array();
    int code = kExitOk;
    for (const auto& s : series) {
        const DispersionEstimate est = estimate_dispersion(s, initial_window);
        json r = {{"label", s.label},
                  {"phi_hat", est.phi_hat ? json(*est.phi_hat) : json(nullptr)},
                  {"window_used", est.window_used},
                  {"windows_evaluated", est.windows_evaluated},
                  {"windows_undefined", est.windows_undefined},
                  {"fallback_applied", est.fallback_applied}};
        if (est.fallback_applied) {
            r["recommendation"] = "poisson";
            code = kExitDegenerate;
        }
        reports.push_back(r);
    }
    return {dump({{"command", "estimate-phi"}, {"initial_window", initial_window}, {"series", reports}}),
            code};
}

CommandOutput cmd_simulate(const SimulationConfig& config) {
    std::ostringstream out;
    write_abacus_csv(out, run_abacus(config));
    return {out.str(), kExitOk};
}

}  // namespace exactcp
