#include "exactcp/simulation.hpp"

#include <cmath>
#include <iomanip>
#include <ostream>
#include <random>
#include <sstream>

#include "exactcp/comparison.hpp"
#include "exactcp/dispersion.hpp"
#include "exactcp/parallel.hpp"
#include "exactcp/segmentation.hpp"

namespace exactcp {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Independent stream per (replicate, profile slot); slot 3 is the control copy of profile 3.
std::mt19937_64 profile_engine(std::uint64_t seed, std::size_t replicate, std::size_t slot) {
    return std::mt19937_64(splitmix64(splitmix64(seed) ^ splitmix64(replicate * 4 + slot)));
}

CountSeries draw_profile(const SimulationConfig& c, const std::array<std::size_t, 8>& partition,
                         std::mt19937_64& rng, std::string label) {
    CountSeries series;
    series.label = std::move(label);
    series.values.reserve(kDesignLength);
    for (std::size_t seg = 1; seg <= kDesignSegments; ++seg) {
        const bool odd = seg % 2 == 1;
        const std::size_t len = partition[seg] - partition[seg - 1];
        if (c.family == Family::Poisson) {
            const double lambda =
                odd ? c.base_level : even_intensity(c.base_level, c.odds_ratio);
            std::poisson_distribution<long> pois(lambda);
            for (std::size_t t = 0; t < len; ++t) series.values.push_back(pois(rng));
        } else {
            const double p =
                odd ? c.base_level : even_success_probability(c.base_level, c.odds_ratio);
            // NB(p, phi) as a Poisson with Gamma(phi, (1-p)/p) intensity.
            std::gamma_distribution<double> intensity(c.phi, (1.0 - p) / p);
            for (std::size_t t = 0; t < len; ++t) {
                const double lambda = intensity(rng);
                if (lambda <= 0.0) {
                    series.values.push_back(0.0);
                    continue;
                }
                std::poisson_distribution<long> pois(lambda);
                series.values.push_back(static_cast<double>(pois(rng)));
            }
        }
    }
    return series;
}

struct FittedProfile {
    std::optional<double> phi_hat;
    bool fallback = false;
    PowerTables tables;
};

FittedProfile fit_profile(const SimulationConfig& c, const CountSeries& series) {
    if (c.family == Family::Poisson) {
        return {std::nullopt, false,
                PowerTables(SegmentMatrix(series, EmissionModel::poisson()), kDesignSegments)};
    }
    if (c.use_true_phi) {
        return {std::nullopt, false,
                PowerTables(SegmentMatrix(series, EmissionModel::negative_binomial(c.phi)),
                            kDesignSegments)};
    }
    DispersionEstimate est;
    try {
        est = estimate_dispersion(series, c.initial_window);
    } catch (const NumericalDegeneracy&) {
        est.fallback_applied = true;
    }
    // An exhausted estimator points at the Poisson limit.
    const EmissionModel model = est.phi_hat ? EmissionModel::negative_binomial(*est.phi_hat)
                                            : EmissionModel::poisson();
    return {est.phi_hat, est.fallback_applied,
            PowerTables(SegmentMatrix(series, model), kDesignSegments)};
}

void append_rows(const SimulationConfig& c, std::size_t replicate, Design design,
                 const std::array<const FittedProfile*, 3>& fitted, std::vector<AbacusRow>& out) {
    const std::array<const PowerTables*, 3> tables = {&fitted[0]->tables, &fitted[1]->tables,
                                                      &fitted[2]->tables};
    for (std::size_t k = 1; k < kDesignSegments; ++k) {
        CommonChangePointQuery query;
        query.specs.assign(3, ChangePointSpec{kDesignSegments, k});
        query.prior_e0 = c.prior_e0;
        const ComparisonResult res = posterior_common(query, tables);

        AbacusRow row;
        row.family = c.family;
        row.base_level = c.base_level;
        row.odds_ratio = c.odds_ratio;
        row.phi = c.phi;
        row.use_true_phi = c.use_true_phi;
        row.replicate = replicate;
        row.k = k;
        row.d = design_shift(k, design);
        row.posterior_e0 = res.posterior_e0;
        for (std::size_t l = 0; l < 3; ++l) {
            row.phi_hat[l] = fitted[l]->phi_hat;
            row.fallback[l] = fitted[l]->fallback;
        }
        out.push_back(row);
    }
}

void write_optional(std::ostream& out, const std::optional<double>& v) {
    if (v) {
        out << *v;
    } else {
        out << "NA";
    }
}

}  // namespace

std::array<std::size_t, kDesignSegments + 1> design_partition(Design design) {
    auto m = kDesignPartition;
    if (design == Design::Shifted) {
        for (std::size_t k = 1; k < kDesignSegments; ++k) m[k] += design_shift(k, design);
    }
    return m;
}

std::size_t design_shift(std::size_t k, Design design) {
    return design == Design::Control ? 0 : std::size_t{1} << (k - 1);
}

void validate(const SimulationConfig& c) {
    if (c.family != Family::NegativeBinomial && c.family != Family::Poisson)
        throw InvalidInput("simulation supports the nb and poisson families only");
    if (c.family == Family::NegativeBinomial && !(c.base_level > 0.0 && c.base_level < 1.0))
        throw InvalidInput("NB base success probability p0 must lie in (0, 1)");
    if (c.family == Family::Poisson && !(c.base_level > 0.0 && std::isfinite(c.base_level)))
        throw InvalidInput("Poisson base intensity lambda0 must be positive");
    if (!(c.odds_ratio > 0.0 && std::isfinite(c.odds_ratio)))
        throw InvalidInput("odds ratio s must be positive");
    if (c.family == Family::NegativeBinomial && !(c.phi > 0.0 && std::isfinite(c.phi)))
        throw InvalidInput("NB dispersion phi must be positive");
    if (c.replicates < 1) throw InvalidInput("at least one replicate is required");
    if (!(c.prior_e0 > 0.0 && c.prior_e0 < 1.0))
        throw InvalidInput("prior probability p0 must lie in (0, 1)");
}

double even_success_probability(double p0, double odds_ratio) {
    const double odds = p0 / (1.0 - p0) / odds_ratio;
    return odds / (1.0 + odds);
}

double even_intensity(double lambda0, double odds_ratio) { return lambda0 * odds_ratio; }

std::array<CountSeries, 3> generate_profiles(const SimulationConfig& config, std::size_t replicate,
                                             Design design) {
    validate(config);
    auto rng1 = profile_engine(config.seed, replicate, 0);
    auto rng2 = profile_engine(config.seed, replicate, 1);
    auto rng3 = profile_engine(config.seed, replicate, design == Design::Shifted ? 2 : 3);
    return {draw_profile(config, kDesignPartition, rng1, "profile1"),
            draw_profile(config, kDesignPartition, rng2, "profile2"),
            draw_profile(config, design_partition(design), rng3, "profile3")};
}

std::vector<AbacusRow> run_abacus(const SimulationConfig& config) {
    validate(config);
    std::vector<std::vector<AbacusRow>> per_replicate(config.replicates);
    parallel_for(config.replicates, [&](std::size_t r) {
        const auto shifted = generate_profiles(config, r, Design::Shifted);
        const FittedProfile p1 = fit_profile(config, shifted[0]);
        const FittedProfile p2 = fit_profile(config, shifted[1]);
        const FittedProfile p3 = fit_profile(config, shifted[2]);
        auto& rows = per_replicate[r];
        if (config.include_control) {
            auto rng = profile_engine(config.seed, r, 3);
            const FittedProfile control = fit_profile(
                config, draw_profile(config, kDesignPartition, rng, "profile3"));
            append_rows(config, r, Design::Control, {&p1, &p2, &control}, rows);
        }
        append_rows(config, r, Design::Shifted, {&p1, &p2, &p3}, rows);
    });
    std::vector<AbacusRow> rows;
    rows.reserve(config.replicates * 2 * (kDesignSegments - 1));
    for (auto& chunk : per_replicate) rows.insert(rows.end(), chunk.begin(), chunk.end());
    return rows;
}

void write_abacus_csv(std::ostream& out, const std::vector<AbacusRow>& rows) {
    std::ostringstream buf;
    buf << std::setprecision(17);
    buf << "family,p0_or_lambda0,s,phi,use_true_phi,replicate,k,d,posterior_E0,"
           "phi_hat_1,phi_hat_2,phi_hat_3,fallback_1,fallback_2,fallback_3\n";
    for (const auto& r : rows) {
        buf << family_name(r.family) << ',' << r.base_level << ',' << r.odds_ratio << ',';
        if (r.family == Family::Poisson) {
            buf << "NA";
        } else {
            buf << r.phi;
        }
        buf << ',' << (r.use_true_phi ? 1 : 0) << ',' << r.replicate << ',' << r.k << ',' << r.d
            << ',' << r.posterior_e0;
        for (const auto& v : r.phi_hat) {
            buf << ',';
            write_optional(buf, v);
        }
        for (bool f : r.fallback) buf << ',' << (f ? 1 : 0);
        buf << '\n';
    }
    out << buf.str();
}

}  // namespace exactcp
