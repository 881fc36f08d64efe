// Acceptance run: one PASS/FAIL line per criterion, followed by the numbers
// behind it. Exit status is non-zero when any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <map>
#include <memory>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "exactcp/comparison.hpp"
#include "exactcp/dispersion.hpp"
#include "exactcp/reports.hpp"
#include "exactcp/series_io.hpp"
#include "exactcp/simulation.hpp"
#include "oracle/oracle.hpp"
#include "oracle/quadrature.hpp"

using namespace exactcp;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

int failures = 0;

void report(const std::string& id, bool pass, const std::string& summary) {
    std::printf("%s  criterion %-3s %s\n", pass ? "PASS" : "FAIL", id.c_str(), summary.c_str());
    std::fflush(stdout);
    if (!pass) ++failures;
}

void detail(const char* fmt, ...) __attribute__((format(printf, 1, 2)));
void detail(const char* fmt, ...) {
    std::printf("      ");
    va_list args;
    va_start(args, fmt);
    std::vprintf(fmt, args);
    va_end(args);
    std::printf("\n");
}

// |a - b| / max(|a|, |b|), zero when both are zero.
double rel_err(double a, double b) {
    if (a == b) return 0.0;
    return std::fabs(a - b) / std::max(std::fabs(a), std::fabs(b));
}

// Relative error of exp(a) against exp(b).
double rel_err_of_logs(double a, double b) {
    if (a == b) return 0.0;
    return std::fabs(std::expm1(a - b));
}

double median(std::vector<double> v) {
    if (v.empty()) return std::nan("");
    std::sort(v.begin(), v.end());
    const std::size_t m = v.size() / 2;
    return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

CountSeries random_data(std::mt19937_64& rng, std::size_t n, const EmissionModel& model) {
    CountSeries s;
    s.label = "case";
    if (model.is_count_family()) {
        std::uniform_int_distribution<int> level(0, 12);
        for (std::size_t t = 0; t < n; ++t) s.values.push_back(level(rng));
    } else {
        std::normal_distribution<double> z(0.0, 2.0);
        for (std::size_t t = 0; t < n; ++t) s.values.push_back(z(rng));
    }
    return s;
}

// ---------------------------------------------------------------------------

void oracle_equivalence() {
    const auto start = Clock::now();
    const std::vector<EmissionModel> families{
        EmissionModel::negative_binomial(0.5), EmissionModel::negative_binomial(2.0),
        EmissionModel::negative_binomial(10.0), EmissionModel::poisson(),
        EmissionModel::gaussian_known_variance(1.0)};
    std::map<std::string, double> worst{{"evidence", 0.0},   {"posterior", 0.0}, {"shift", 0.0},
                                        {"q0", 0.0},         {"Q_joint", 0.0},   {"posterior_E0", 0.0},
                                        {"bayes_factor", 0.0}};
    std::mt19937_64 rng(20240601);
    std::size_t degenerate = 0, degeneracy_mismatch = 0, common_cases = 0;
    const double tol = 1e-8;

    for (std::size_t c = 0; c < 200; ++c) {
        const std::size_t I = 1 + c % 3;
        const EmissionModel& model = families[(c / 3) % families.size()];
        const std::size_t n = std::uniform_int_distribution<std::size_t>(4, 10)(rng);
        const std::size_t k_min = I == 1 ? 1 : 2;

        std::vector<CountSeries> ys;
        std::vector<EmissionModel> ms;
        std::vector<std::unique_ptr<PowerTables>> tables;
        std::vector<const PowerTables*> table_ptrs;
        std::vector<ChangePointSpec> specs;
        for (std::size_t l = 0; l < I; ++l) {
            const std::size_t K = std::uniform_int_distribution<std::size_t>(k_min, std::min<std::size_t>(4, n))(rng);
            ys.push_back(random_data(rng, n, model));
            ms.push_back(model);
            tables.push_back(std::make_unique<PowerTables>(SegmentMatrix(ys.back(), model), K));
            table_ptrs.push_back(tables.back().get());
            if (K >= 2) specs.push_back({K, std::uniform_int_distribution<std::size_t>(1, K - 1)(rng)});
        }

        for (std::size_t l = 0; l < I; ++l) {
            const std::size_t K = tables[l]->segments();
            worst["evidence"] = std::max(worst["evidence"],
                                         rel_err_of_logs(log_evidence(*tables[l]).value(),
                                                         oracle::brute_evidence(ys[l], model, K)));
            for (std::size_t k = 1; k < K; ++k) {
                const auto post = changepoint_posterior(*tables[l], k);
                const auto brute = oracle::brute_changepoint_posterior(ys[l], model, K, k);
                for (std::size_t t = 0; t < brute.size(); ++t)
                    worst["posterior"] = std::max(worst["posterior"], rel_err(post.probs[t], brute[t]));
            }
        }
        if (specs.size() != I) continue;  // a single series with K = 1

        if (I >= 2) {
            const auto d = shift_posterior(changepoint_posterior(*tables[0], specs[0].index),
                                           changepoint_posterior(*tables[1], specs[1].index));
            const auto brute = oracle::brute_shift_posterior(ys[0], model, specs[0], ys[1], model, specs[1]);
            for (std::size_t i = 0; i < brute.size(); ++i)
                worst["shift"] = std::max(worst["shift"], rel_err(d.probs[i], brute[i]));
        }

        const auto brute = oracle::brute_common_posterior(ys, ms, specs, 0.5);
        worst["q0"] = std::max(worst["q0"], rel_err(q0_prior(n, specs), brute.q0));
        worst["Q_joint"] = std::max(worst["Q_joint"],
                                    rel_err_of_logs(log_joint_e0(table_ptrs, specs), brute.log_joint_sum));
        if (I == 1) continue;

        const double p0 = std::uniform_real_distribution<double>(0.05, 0.95)(rng);
        const auto brute_p = oracle::brute_common_posterior(ys, ms, specs, p0);
        const bool brute_degenerate = brute_p.q0 == 0.0 || brute_p.q0 == 1.0;
        try {
            const auto res = posterior_common({specs, p0}, table_ptrs);
            ++common_cases;
            if (brute_degenerate) ++degeneracy_mismatch;
            worst["posterior_E0"] = std::max(worst["posterior_E0"], rel_err(res.posterior_e0, brute_p.posterior_e0));
            worst["bayes_factor"] = std::max(worst["bayes_factor"],
                                             rel_err(res.bayes_factor, std::exp(brute_p.log_bayes_factor)));
        } catch (const NumericalDegeneracy&) {
            ++degenerate;
            if (!brute_degenerate) ++degeneracy_mismatch;
        }
    }
    const double elapsed = seconds_since(start);
    double max_err = 0.0;
    for (const auto& [name, err] : worst) max_err = std::max(max_err, err);
    std::ostringstream s;
    s << "oracle equivalence: 200 cases, max rel err " << max_err << " (tol 1e-8), " << elapsed
      << " s (limit 60 s)";
    report("1", max_err <= tol && degeneracy_mismatch == 0 && elapsed < 60.0, s.str());
    for (const auto& [name, err] : worst) detail("%-13s max rel err %.3g", name.c_str(), err);
    detail("posterior_common compared on %zu cases; %zu degenerate (q0 in {0,1}) flagged, %zu "
           "disagreements with the enumeration",
           common_cases, degenerate, degeneracy_mismatch);
}

// ---------------------------------------------------------------------------

void marginal_quadrature() {
    const auto start = Clock::now();
    std::mt19937_64 rng(77);
    std::uniform_int_distribution<int> len(1, 8);
    std::uniform_int_distribution<int> count(0, 25);
    std::normal_distribution<double> real(0.0, 3.0);
    std::uniform_real_distribution<double> hyper(0.3, 3.0);
    const double phis[] = {0.5, 2.0, 10.0};

    const char* names[] = {"nb", "poisson", "gauss-known-var", "gauss-hetero"};
    double worst_all = 0.0;
    std::vector<double> worst(4, 0.0);
    for (int f = 0; f < 4; ++f) {
        for (int rep = 0; rep < 100; ++rep) {
            EmissionModel model = EmissionModel::poisson();
            switch (f) {
            case 0: model = EmissionModel::negative_binomial(phis[rep % 3], {hyper(rng), hyper(rng)}); break;
            case 1: model = EmissionModel::poisson({hyper(rng), hyper(rng)}); break;
            case 2: model = EmissionModel::gaussian_known_variance(hyper(rng), {real(rng), hyper(rng)}); break;
            default:
                model = EmissionModel::gaussian_heteroscedastic({real(rng), hyper(rng), hyper(rng), hyper(rng)});
            }
            std::vector<double> seg(len(rng));
            for (double& v : seg) v = model.is_count_family() ? count(rng) : real(rng);
            CountSeries y{seg, "segment"};
            if (y.size() == 1) y.values.push_back(0.0);  // a series needs two points
            const double closed = log_segment_marginal(y, 1, seg.size() + 1, model);
            const double quad = oracle::quadrature_log_marginal(seg, model);
            const double err = std::fabs(closed - quad) / std::max(1.0, std::fabs(quad));
            worst[f] = std::max(worst[f], err);
            worst_all = std::max(worst_all, err);
        }
    }
    const double elapsed = seconds_since(start);
    std::ostringstream s;
    s << "marginals vs quadrature: 4 x 100 segments, max |dlog|/max(1,|log|) " << worst_all
      << " (tol 1e-8), " << elapsed << " s (limit 30 s)";
    report("2", worst_all <= 1e-8 && elapsed < 30.0, s.str());
    for (int f = 0; f < 4; ++f) detail("%-16s %.3g", names[f], worst[f]);
}

// ---------------------------------------------------------------------------

struct Cell {
    Family family;
    double base;
    double phi;
    double s;
    std::string name() const {
        char buf[96];
        if (family == Family::Poisson)
            std::snprintf(buf, sizeof buf, "poisson lambda0=%.2f s=%2.0f", base, s);
        else
            std::snprintf(buf, sizeof buf, "nb p0=%.1f phi=%.4f s=%2.0f", base, phi, s);
        return buf;
    }
};

struct CellMedians {
    std::map<std::size_t, double> by_d;  // d -> median posterior_E0
    std::size_t fallbacks = 0;
};

constexpr std::size_t kReplicates = 50;
constexpr std::uint64_t kSeed = 2024;

CellMedians run_cell(const Cell& cell, bool use_true_phi) {
    SimulationConfig config;
    config.family = cell.family;
    config.base_level = cell.base;
    config.odds_ratio = cell.s;
    config.phi = cell.family == Family::Poisson ? 1.0 : cell.phi;
    config.replicates = kReplicates;
    config.seed = kSeed;
    config.use_true_phi = use_true_phi;
    const auto rows = run_abacus(config);

    std::map<std::size_t, std::vector<double>> by_d;
    CellMedians out;
    for (const auto& r : rows) {
        by_d[r.d].push_back(r.posterior_e0);
        for (bool f : r.fallback) out.fallbacks += f;
    }
    for (auto& [d, v] : by_d) out.by_d[d] = median(v);
    return out;
}

std::vector<Cell> design_cells() {
    std::vector<Cell> cells;
    for (double s : {4.0, 8.0, 16.0}) {
        for (double lambda0 : {1.25, 0.73}) cells.push_back({Family::Poisson, lambda0, 0.0, s});
        for (double phi : {5.0, std::sqrt(5.0), 0.8, 0.64}) cells.push_back({Family::NegativeBinomial, 0.8, phi, s});
        for (double phi : {std::pow(0.08, 1.0 / 8), std::pow(0.08, 1.0 / 4), std::pow(0.08, 1.0 / 2), 0.08})
            cells.push_back({Family::NegativeBinomial, 0.5, phi, s});
    }
    return cells;
}

void simulation_claims() {
    const auto start = Clock::now();
    const auto cells = design_cells();
    std::vector<CellMedians> results;
    for (const auto& cell : cells) results.push_back(run_cell(cell, false));
    const double elapsed = seconds_since(start);

    std::printf("      median posterior_E0 over %zu replicates, estimated phi, seed %llu\n", kReplicates,
                static_cast<unsigned long long>(kSeed));
    std::printf("      %-34s %10s %10s %10s %10s %10s %10s %10s  %s\n", "cell", "d=0", "d=1", "d=2",
                "d=4", "d=8", "d=16", "d=32", "fallbacks");
    for (std::size_t i = 0; i < cells.size(); ++i) {
        std::printf("      %-34s", cells[i].name().c_str());
        for (const auto& [d, m] : results[i].by_d) std::printf(" %10.3g", m);
        std::printf("  %zu\n", results[i].fallbacks);
    }

    // (a) the clean Poisson regime
    bool pass_a = false;
    double a0 = 0, a32 = 0;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (cells[i].family == Family::Poisson && cells[i].base == 0.73 && cells[i].s == 16.0) {
            a0 = results[i].by_d.at(0);
            a32 = results[i].by_d.at(32);
            pass_a = a0 > 0.9 && a32 < 0.1;
        }
    }
    char buf[256];
    std::snprintf(buf, sizeof buf,
                  "Poisson lambda0=0.73 s=16: median d=0 %.4g (> 0.9), d=32 %.3g (< 0.1)", a0, a32);
    report("3a", pass_a, buf);

    // (b) d = 0 above d = 32 in every cell
    std::size_t ok_b = 0;
    std::string bad_b;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (results[i].by_d.at(0) > results[i].by_d.at(32)) {
            ++ok_b;
        } else {
            bad_b += " [" + cells[i].name() + "]";
        }
    }
    std::snprintf(buf, sizeof buf, "median d=0 > median d=32 in %zu/%zu cells", ok_b, cells.size());
    report("3b", ok_b == cells.size(), std::string(buf) + (bad_b.empty() ? "" : ", failing:" + bad_b));

    // (c) least dispersed p0 = 0.5 row adequate from d = 16
    bool pass_c = true;
    std::string c_text;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (cells[i].family != Family::NegativeBinomial || cells[i].base != 0.5 ||
            cells[i].phi != std::pow(0.08, 1.0 / 8))
            continue;
        for (std::size_t d : {16u, 32u}) {
            const double m = results[i].by_d.at(d);
            pass_c = pass_c && m < 0.5;
            std::snprintf(buf, sizeof buf, " s=%g,d=%zu:%.3g", cells[i].s, d, m);
            c_text += buf;
        }
    }
    report("3c", pass_c, "NB p0=0.5 phi=0.08^(1/8), median < 0.5 at d >= 16 for every s:" + c_text);

    std::snprintf(buf, sizeof buf, "simulation runtime %.1f s for %zu cells x %zu replicates (limit 600 s)",
                  elapsed, cells.size(), kReplicates);
    report("3t", elapsed < 600.0, buf);

    // Properties of the design beyond the numbered criteria; reported, not scored.
    std::vector<std::string> not_monotone;
    std::vector<std::string> not_adequate;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (cells[i].s != 4.0) continue;
        for (std::size_t j = 0; j < cells.size(); ++j) {
            if (cells[j].s != 8.0 || cells[j].family != cells[i].family ||
                cells[j].base != cells[i].base || cells[j].phi != cells[i].phi)
                continue;
            for (std::size_t h = 0; h < cells.size(); ++h) {
                if (cells[h].s != 16.0 || cells[h].family != cells[i].family ||
                    cells[h].base != cells[i].base || cells[h].phi != cells[i].phi)
                    continue;
                for (std::size_t d : {16u, 32u}) {
                    const double m4 = results[i].by_d.at(d), m8 = results[j].by_d.at(d),
                                 m16 = results[h].by_d.at(d);
                    if (!(m4 >= m8 && m8 >= m16)) {
                        std::snprintf(buf, sizeof buf, "%s d=%zu: %.3g, %.3g, %.3g",
                                      cells[i].name().c_str(), d, m4, m8, m16);
                        not_monotone.push_back(buf);
                    }
                }
            }
        }
    }
    for (std::size_t i = 0; i < cells.size(); ++i) {
        const bool most_dispersed = cells[i].phi == 0.64 || cells[i].phi == 0.08;
        if (cells[i].family != Family::NegativeBinomial || most_dispersed) continue;
        for (std::size_t d : {16u, 32u}) {
            if (results[i].by_d.at(d) >= 0.5) {
                std::snprintf(buf, sizeof buf, "%s d=%zu: %.3g", cells[i].name().c_str(), d,
                              results[i].by_d.at(d));
                not_adequate.push_back(buf);
            }
        }
    }
    std::printf("INFO  property    median posterior_E0 non-increasing in s at d >= 16: %s\n",
                not_monotone.empty() ? "holds" : "violated");
    for (const auto& l : not_monotone) detail("s = 4, 8, 16 for %s", l.c_str());
    std::printf("INFO  property    NB cells outside the most dispersed rows have median < 0.5 at "
                "d >= 16: %s\n",
                not_adequate.empty() ? "holds" : "violated");
    for (const auto& l : not_adequate) detail("%s", l.c_str());

    // Criterion 4 reuses the s = 16 estimated-phi runs.
    const auto start4 = Clock::now();
    bool pass4 = true;
    std::vector<std::string> lines;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (cells[i].family != Family::NegativeBinomial || cells[i].s != 16.0) continue;
        const double est = results[i].by_d.at(16);
        const double truth = run_cell(cells[i], true).by_d.at(16);
        // Under E1 a lower posterior_E0 is the better result.
        const bool expected = cells[i].base == 0.8 ? truth < est : truth > est;
        pass4 = pass4 && expected;
        std::snprintf(buf, sizeof buf, "%-34s true phi %.3g  estimated phi %.3g  %s", cells[i].name().c_str(),
                      truth, est, expected ? "as expected" : "OPPOSITE");
        lines.push_back(buf);
    }
    std::snprintf(buf, sizeof buf,
                  "true vs estimated phi at s=16, d=16: true phi better for p0=0.8, worse for p0=0.5, "
                  "in every row (%.1f s)",
                  seconds_since(start4));
    report("4", pass4, buf);
    for (const auto& l : lines) detail("%s", l.c_str());
}

// ---------------------------------------------------------------------------

double time_full_analysis(std::size_t n, std::mt19937_64& rng) {
    CountSeries y;
    std::poisson_distribution<int> pois(3.0);
    for (std::size_t t = 0; t < n; ++t) y.values.push_back(pois(rng));
    double best = 1e300;
    for (int rep = 0; rep < 7; ++rep) {
        const auto start = Clock::now();
        const PowerTables p(SegmentMatrix(y, EmissionModel::negative_binomial(2.0)), 7);
        double sink = 0.0;
        for (std::size_t k = 1; k < 7; ++k) sink += changepoint_posterior(p, k).probs[n / 2];
        best = std::min(best, seconds_since(start));
        if (sink < 0.0) std::printf("unreachable\n");
    }
    return best;
}

void complexity() {
    setenv("EXACTCP_THREADS", "1", 1);
    std::mt19937_64 rng(5);
    const double t400 = time_full_analysis(400, rng);
    const double t800 = time_full_analysis(800, rng);
    const double t1600 = time_full_analysis(1600, rng);
    const double r1 = t800 / t400, r2 = t1600 / t800;
    const double e1 = std::log2(r1), e2 = std::log2(r2);

    char buf[256];
    std::snprintf(buf, sizeof buf,
                  "time ratio per doubling of n (K=7): %.2fx, %.2fx (literal bound 2.5x); "
                  "t = %.3g, %.3g, %.3g s",
                  r1, r2, t400, t800, t1600);
    report("5a", r1 <= 2.5 && r2 <= 2.5, buf);
    std::snprintf(buf, sizeof buf,
                  "scaling exponent per doubling %.2f, %.2f (quadratic contract: <= 2.5)", e1, e2);
    report("5b", e1 <= 2.5 && e2 <= 2.5, buf);

    // Three series of length 700, K = 7, single-threaded, from raw counts.
    std::array<CountSeries, 3> ys;
    std::poisson_distribution<int> pois(2.0);
    for (auto& y : ys)
        for (std::size_t t = 0; t < 700; ++t) y.values.push_back(pois(rng));
    const auto start = Clock::now();
    std::vector<std::unique_ptr<PowerTables>> tables;
    std::vector<const PowerTables*> ptrs;
    for (const auto& y : ys) {
        tables.push_back(std::make_unique<PowerTables>(SegmentMatrix(y, EmissionModel::negative_binomial(2.0)), 7));
        ptrs.push_back(tables.back().get());
    }
    const auto res = posterior_common({std::vector<ChangePointSpec>(3, {7, 3}), 0.5}, ptrs);
    const double elapsed = seconds_since(start);
    std::snprintf(buf, sizeof buf, "n=700, K=7, three-series posterior_common in %.3f s (limit 5 s), posterior_E0=%.3g",
                  elapsed, res.posterior_e0);
    report("5c", elapsed < 5.0, buf);
    unsetenv("EXACTCP_THREADS");
}

// ---------------------------------------------------------------------------

void dispersion_band() {
    std::vector<double> estimates;
    std::size_t fallbacks = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        std::mt19937_64 rng(1000 + seed);
        std::gamma_distribution<double> intensity(2.0, 1.0);  // (1 - p) / p = 1
        CountSeries y;
        for (int t = 0; t < 700; ++t) y.values.push_back(std::poisson_distribution<int>(intensity(rng))(rng));
        const auto est = estimate_dispersion(y);
        if (est.phi_hat) {
            estimates.push_back(*est.phi_hat);
        } else {
            ++fallbacks;
        }
    }
    const double m = median(estimates);
    char buf[256];
    std::snprintf(buf, sizeof buf,
                  "NB(p0=0.5, phi=2), 100 series of length 700: median phi_hat %.3f in [1, 4] "
                  "(%zu fallbacks)",
                  m, fallbacks);
    report("6", m >= 1.0 && m <= 4.0, buf);
}

// ---------------------------------------------------------------------------

void determinism() {
    SimulationConfig config;
    config.family = Family::NegativeBinomial;
    config.base_level = 0.5;
    config.odds_ratio = 8.0;
    config.phi = std::sqrt(5.0);
    config.replicates = 4;
    config.seed = 31337;
    auto csv = [&] {
        std::ostringstream out;
        write_abacus_csv(out, run_abacus(config));
        return out.str();
    };
    setenv("EXACTCP_THREADS", "1", 1);
    const std::string a = csv();
    setenv("EXACTCP_THREADS", "4", 1);
    const std::string b = csv();
    unsetenv("EXACTCP_THREADS");
    const std::string c = csv();

    const auto series = read_series_file(EXACTCP_FIXTURES "/gene_profiles.tsv");
    AnalysisRequest request;
    request.family = Family::NegativeBinomial;
    request.estimate_phi = false;
    request.phi = 2.0;
    request.segments = {5};
    const std::string j1 = cmd_segment(request, series).text + cmd_compare_common(request, series).text;
    const std::string j2 = cmd_segment(request, series).text + cmd_compare_common(request, series).text;
    request.indices = {2};
    const std::vector<CountSeries> two{series[0], series[1]};
    const std::string s1 = cmd_compare_shift(request, two).text;
    const std::string s2 = cmd_compare_shift(request, two).text;

    const bool csv_ok = a == b && b == c;
    const bool json_ok = j1 == j2 && s1 == s2;
    char buf[256];
    std::snprintf(buf, sizeof buf,
                  "byte-identical reruns: simulation CSV (%zu bytes, 1 vs 4 workers) %s, JSON reports %s",
                  a.size(), csv_ok ? "identical" : "DIFFER", json_ok ? "identical" : "DIFFER");
    report("7", csv_ok && json_ok, buf);
}

}  // namespace

int main() {
    oracle_equivalence();
    marginal_quadrature();
    complexity();
    dispersion_band();
    determinism();
    simulation_claims();
    std::printf("%d criterion line(s) failed\n", failures);
    return failures == 0 ? 0 : 1;
}
