#ifndef EXACTCP_EMISSION_HPP
#define EXACTCP_EMISSION_HPP

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace exactcp {

// Bad user input: malformed series, out-of-range indices, invalid parameters.
class InvalidInput : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// The requested quantity is mathematically degenerate for this input
// (trivial event space, exhausted estimator, ...).
class NumericalDegeneracy : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// One observed profile. Locations are 1-based: values[t-1] is y_t.
struct CountSeries {
    std::vector<double> values;
    std::string label;

    std::size_t size() const { return values.size(); }
};

enum class Family { NegativeBinomial, Poisson, GaussianKnownVariance, GaussianHeteroscedastic };

std::string_view family_name(Family family);
std::optional<Family> parse_family(std::string_view name);

/// Beta(alpha, beta) on the NB success probability p.
struct BetaPrior {
    double alpha = 0.5;
    double beta = 0.5;
};

/// Gamma(shape, rate) on the Poisson intensity.
struct GammaPrior {
    double shape = 0.5;
    double rate = 0.5;
};

/// mu ~ N(mean, scale * sigma^2) with sigma^2 known.
struct NormalPrior {
    double mean = 0.0;
    double scale = 1.0;
};

/// sigma^2 ~ InvGamma(shape, rate), mu | sigma^2 ~ N(mean, scale * sigma^2).
struct NormalInverseGammaPrior {
    double mean = 0.0;
    double scale = 1.0;
    double shape = 0.5;
    double rate = 0.5;
};

using HyperParams = std::variant<BetaPrior, GammaPrior, NormalPrior, NormalInverseGammaPrior>;

/// Emission family with its conjugate prior and fixed nuisance parameter.
///
/// NB pmf is C(y+phi-1, y) p^phi (1-p)^y, mean phi(1-p)/p. Construct through
/// the named factories; they validate every parameter and throw InvalidInput.
class EmissionModel {
public:
    static EmissionModel negative_binomial(double phi, BetaPrior prior = {});
    static EmissionModel poisson(GammaPrior prior = {});
    static EmissionModel gaussian_known_variance(double variance, NormalPrior prior = {});
    static EmissionModel gaussian_heteroscedastic(NormalInverseGammaPrior prior = {});

    Family family() const { return family_; }
    double dispersion() const { return dispersion_; }
    double variance() const { return variance_; }
    const HyperParams& hyper() const { return hyper_; }
    bool is_count_family() const {
        return family_ == Family::NegativeBinomial || family_ == Family::Poisson;
    }

private:
    EmissionModel(Family family, HyperParams hyper, double dispersion, double variance)
        : family_(family), hyper_(hyper), dispersion_(dispersion), variance_(variance) {}

    Family family_;
    HyperParams hyper_;
    double dispersion_;
    double variance_;
};

// Throws InvalidInput unless the series has length >= 2 and, for count
// families, only non-negative integers.
void validate_series(const CountSeries& series, const EmissionModel& model);

/// Sufficient statistics of one segment.
struct SegmentStatistics {
    double length = 0.0;
    double sum = 0.0;
    double sum_sq = 0.0;
    // Data-only log constant: sum log C(y+phi-1, y) for NB, -sum log y! for Poisson.
    double log_const = 0.0;
};

SegmentStatistics point_statistics(double y, const EmissionModel& model);

/// Prefix sums over a series so that any segment [i, j) is two lookups away.
class CumulativeStatistics {
public:
    CumulativeStatistics(const CountSeries& series, const EmissionModel& model);

    std::size_t size() const { return sum_.size() - 1; }

    /// Statistics of the half-open, 1-based segment [i, j); 1 <= i <= j <= n+1.
    SegmentStatistics segment(std::size_t i, std::size_t j) const;

private:
    std::vector<double> sum_;
    std::vector<double> sum_sq_;
    std::vector<double> log_const_;
};

// Closed-form log of the integral of P(Y_J | theta) P(theta) over theta.
double log_marginal(const SegmentStatistics& stats, const EmissionModel& model);

/// log P(Y_[i,j) | [i,j)) for 1 <= i < j <= n+1, computed directly from the
/// points of the segment. Validates the series and the indices.
double log_segment_marginal(const CountSeries& series, std::size_t i, std::size_t j,
                            const EmissionModel& model);

/// Evaluates segment marginals in O(1) each. Keeps per-length and, for count
/// series with a moderate total, per-sum log-gamma tables.
class SegmentScorer {
public:
    SegmentScorer(const CountSeries& series, const EmissionModel& model);

    std::size_t size() const { return stats_.size(); }
    const EmissionModel& model() const { return model_; }

    double operator()(std::size_t i, std::size_t j) const;

private:
    EmissionModel model_;
    CumulativeStatistics stats_;
    double log_prior_norm_ = 0.0;
    std::vector<double> by_length_;
    std::vector<double> by_sum_;
};

}  // namespace exactcp

#endif
