#include "exactcp/emission.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "exactcp/log_math.hpp"

namespace exactcp {

namespace {

constexpr double kLog2Pi = 1.8378770664093454835606594728112;

// Per-sum log-gamma tables are only kept below this total count.
constexpr double kMaxTabulatedSum = 1 << 24;

void require_positive(double value, const char* what) {
    if (!(value > 0.0) || !std::isfinite(value)) {
        std::ostringstream ss;
        ss << what << " must be a positive finite number, got " << value;
        throw InvalidInput(ss.str());
    }
}

void require_finite(double value, const char* what) {
    if (!std::isfinite(value)) {
        std::ostringstream ss;
        ss << what << " must be finite, got " << value;
        throw InvalidInput(ss.str());
    }
}

double prior_mean(const EmissionModel& model) {
    if (const auto* p = std::get_if<NormalPrior>(&model.hyper())) return p->mean;
    if (const auto* p = std::get_if<NormalInverseGammaPrior>(&model.hyper())) return p->mean;
    return 0.0;
}

// Residual sum of squares after integrating the mean out:
// sum z^2 - (sum z)^2 * scale / (1 + L * scale), with z = y - prior mean.
double integrated_rss(const SegmentStatistics& s, double scale) {
    const double rss = s.sum_sq - s.sum * s.sum * scale / (1.0 + s.length * scale);
    return rss > 0.0 ? rss : 0.0;
}

}  // namespace

std::string_view family_name(Family family) {
    switch (family) {
    case Family::NegativeBinomial: return "nb";
    case Family::Poisson: return "poisson";
    case Family::GaussianKnownVariance: return "gauss-known-var";
    case Family::GaussianHeteroscedastic: return "gauss-hetero";
    }
    return "unknown";
}

std::optional<Family> parse_family(std::string_view name) {
    for (Family f : {Family::NegativeBinomial, Family::Poisson, Family::GaussianKnownVariance,
                     Family::GaussianHeteroscedastic}) {
        if (family_name(f) == name) return f;
    }
    return std::nullopt;
}

EmissionModel EmissionModel::negative_binomial(double phi, BetaPrior prior) {
    require_positive(phi, "NB dispersion phi");
    require_positive(prior.alpha, "Beta prior alpha");
    require_positive(prior.beta, "Beta prior beta");
    return EmissionModel(Family::NegativeBinomial, prior, phi, 0.0);
}

EmissionModel EmissionModel::poisson(GammaPrior prior) {
    require_positive(prior.shape, "Gamma prior shape");
    require_positive(prior.rate, "Gamma prior rate");
    return EmissionModel(Family::Poisson, prior, 0.0, 0.0);
}

EmissionModel EmissionModel::gaussian_known_variance(double variance, NormalPrior prior) {
    require_positive(variance, "Gaussian variance sigma2");
    require_finite(prior.mean, "Normal prior mean");
    require_positive(prior.scale, "Normal prior scale");
    return EmissionModel(Family::GaussianKnownVariance, prior, 0.0, variance);
}

EmissionModel EmissionModel::gaussian_heteroscedastic(NormalInverseGammaPrior prior) {
    require_finite(prior.mean, "NIG prior mean");
    require_positive(prior.scale, "NIG prior scale");
    require_positive(prior.shape, "NIG prior shape");
    require_positive(prior.rate, "NIG prior rate");
    return EmissionModel(Family::GaussianHeteroscedastic, prior, 0.0, 0.0);
}

void validate_series(const CountSeries& series, const EmissionModel& model) {
    if (series.size() < 2) {
        throw InvalidInput("series '" + series.label + "' must contain at least 2 points");
    }
    for (std::size_t t = 0; t < series.size(); ++t) {
        const double y = series.values[t];
        if (!std::isfinite(y)) {
            std::ostringstream ss;
            ss << "series '" << series.label << "': value at location " << t + 1
               << " is not finite";
            throw InvalidInput(ss.str());
        }
        if (model.is_count_family() && (y < 0.0 || y != std::floor(y))) {
            std::ostringstream ss;
            ss << "series '" << series.label << "': value " << y << " at location " << t + 1
               << " is not a non-negative integer count";
            throw InvalidInput(ss.str());
        }
    }
}

SegmentStatistics point_statistics(double y, const EmissionModel& model) {
    SegmentStatistics s;
    s.length = 1.0;
    switch (model.family()) {
    case Family::NegativeBinomial: {
        const double phi = model.dispersion();
        s.sum = y;
        s.log_const = log_gamma(y + phi) - log_gamma(phi) - log_gamma(y + 1.0);
        break;
    }
    case Family::Poisson:
        s.sum = y;
        s.log_const = -log_gamma(y + 1.0);
        break;
    case Family::GaussianKnownVariance:
    case Family::GaussianHeteroscedastic: {
        // Gaussian statistics are centred on the prior mean.
        const double z = y - prior_mean(model);
        s.sum = z;
        s.sum_sq = z * z;
        break;
    }
    }
    return s;
}

CumulativeStatistics::CumulativeStatistics(const CountSeries& series, const EmissionModel& model)
    : sum_(series.size() + 1, 0.0),
      sum_sq_(series.size() + 1, 0.0),
      log_const_(series.size() + 1, 0.0) {
    validate_series(series, model);
    for (std::size_t t = 0; t < series.size(); ++t) {
        const SegmentStatistics p = point_statistics(series.values[t], model);
        sum_[t + 1] = sum_[t] + p.sum;
        sum_sq_[t + 1] = sum_sq_[t] + p.sum_sq;
        log_const_[t + 1] = log_const_[t] + p.log_const;
    }
}

SegmentStatistics CumulativeStatistics::segment(std::size_t i, std::size_t j) const {
    const std::size_t n = size();
    if (i < 1 || i > j || j > n + 1) {
        std::ostringstream ss;
        ss << "segment [" << i << ", " << j << ") out of range for series of length " << n;
        throw InvalidInput(ss.str());
    }
    SegmentStatistics s;
    s.length = static_cast<double>(j - i);
    s.sum = sum_[j - 1] - sum_[i - 1];
    s.sum_sq = sum_sq_[j - 1] - sum_sq_[i - 1];
    s.log_const = log_const_[j - 1] - log_const_[i - 1];
    return s;
}

double log_marginal(const SegmentStatistics& s, const EmissionModel& model) {
    const double L = s.length;
    switch (model.family()) {
    case Family::NegativeBinomial: {
        const auto& b = std::get<BetaPrior>(model.hyper());
        const double a = b.alpha + L * model.dispersion();
        return s.log_const + log_beta(a, b.beta + s.sum) - log_beta(b.alpha, b.beta);
    }
    case Family::Poisson: {
        const auto& g = std::get<GammaPrior>(model.hyper());
        return s.log_const + g.shape * std::log(g.rate) - log_gamma(g.shape) +
               log_gamma(g.shape + s.sum) - (g.shape + s.sum) * std::log(g.rate + L);
    }
    case Family::GaussianKnownVariance: {
        const auto& p = std::get<NormalPrior>(model.hyper());
        const double v = model.variance();
        return -0.5 * L * (kLog2Pi + std::log(v)) - 0.5 * std::log1p(L * p.scale) -
               0.5 * integrated_rss(s, p.scale) / v;
    }
    case Family::GaussianHeteroscedastic: {
        const auto& p = std::get<NormalInverseGammaPrior>(model.hyper());
        const double shape_post = p.shape + 0.5 * L;
        const double rate_post = p.rate + 0.5 * integrated_rss(s, p.scale);
        return -0.5 * L * kLog2Pi - 0.5 * std::log1p(L * p.scale) + log_gamma(shape_post) -
               log_gamma(p.shape) + p.shape * std::log(p.rate) -
               shape_post * std::log(rate_post);
    }
    }
    return kNegInf;
}

double log_segment_marginal(const CountSeries& series, std::size_t i, std::size_t j,
                            const EmissionModel& model) {
    validate_series(series, model);
    const std::size_t n = series.size();
    if (i < 1 || i >= j || j > n + 1) {
        std::ostringstream ss;
        ss << "segment [" << i << ", " << j << ") out of range for series of length " << n;
        throw InvalidInput(ss.str());
    }
    SegmentStatistics s;
    for (std::size_t t = i; t < j; ++t) {
        const SegmentStatistics p = point_statistics(series.values[t - 1], model);
        s.length += p.length;
        s.sum += p.sum;
        s.sum_sq += p.sum_sq;
        s.log_const += p.log_const;
    }
    return log_marginal(s, model);
}

SegmentScorer::SegmentScorer(const CountSeries& series, const EmissionModel& model)
    : model_(model), stats_(series, model) {
    const std::size_t n = stats_.size();
    by_length_.resize(n + 1);
    const double total = stats_.segment(1, n + 1).sum;

    switch (model_.family()) {
    case Family::NegativeBinomial: {
        const auto& b = std::get<BetaPrior>(model_.hyper());
        log_prior_norm_ = -log_beta(b.alpha, b.beta);
        for (std::size_t L = 0; L <= n; ++L)
            by_length_[L] = log_gamma(b.alpha + static_cast<double>(L) * model_.dispersion());
        if (total <= kMaxTabulatedSum) {
            by_sum_.resize(static_cast<std::size_t>(total) + 1);
            for (std::size_t S = 0; S < by_sum_.size(); ++S)
                by_sum_[S] = log_gamma(b.beta + static_cast<double>(S));
        }
        break;
    }
    case Family::Poisson: {
        const auto& g = std::get<GammaPrior>(model_.hyper());
        log_prior_norm_ = g.shape * std::log(g.rate) - log_gamma(g.shape);
        for (std::size_t L = 0; L <= n; ++L)
            by_length_[L] = std::log(g.rate + static_cast<double>(L));
        if (total <= kMaxTabulatedSum) {
            by_sum_.resize(static_cast<std::size_t>(total) + 1);
            for (std::size_t S = 0; S < by_sum_.size(); ++S)
                by_sum_[S] = log_gamma(g.shape + static_cast<double>(S));
        }
        break;
    }
    case Family::GaussianKnownVariance: {
        const auto& p = std::get<NormalPrior>(model_.hyper());
        const double v = model_.variance();
        for (std::size_t L = 0; L <= n; ++L) {
            const double len = static_cast<double>(L);
            by_length_[L] = -0.5 * len * (kLog2Pi + std::log(v)) - 0.5 * std::log1p(len * p.scale);
        }
        break;
    }
    case Family::GaussianHeteroscedastic: {
        const auto& p = std::get<NormalInverseGammaPrior>(model_.hyper());
        log_prior_norm_ = p.shape * std::log(p.rate) - log_gamma(p.shape);
        for (std::size_t L = 0; L <= n; ++L) {
            const double len = static_cast<double>(L);
            by_length_[L] = -0.5 * len * kLog2Pi - 0.5 * std::log1p(len * p.scale) +
                            log_gamma(p.shape + 0.5 * len);
        }
        break;
    }
    }
}

double SegmentScorer::operator()(std::size_t i, std::size_t j) const {
    const SegmentStatistics s = stats_.segment(i, j);
    const std::size_t L = j - i;
    switch (model_.family()) {
    case Family::NegativeBinomial: {
        const auto& b = std::get<BetaPrior>(model_.hyper());
        const double sum_term = by_sum_.empty()
                                    ? log_gamma(b.beta + s.sum)
                                    : by_sum_[static_cast<std::size_t>(s.sum)];
        const double a = b.alpha + s.length * model_.dispersion();
        return s.log_const + log_prior_norm_ + by_length_[L] + sum_term -
               log_gamma(a + b.beta + s.sum);
    }
    case Family::Poisson: {
        const auto& g = std::get<GammaPrior>(model_.hyper());
        const double sum_term = by_sum_.empty()
                                    ? log_gamma(g.shape + s.sum)
                                    : by_sum_[static_cast<std::size_t>(s.sum)];
        return s.log_const + log_prior_norm_ + sum_term - (g.shape + s.sum) * by_length_[L];
    }
    case Family::GaussianKnownVariance: {
        const auto& p = std::get<NormalPrior>(model_.hyper());
        return by_length_[L] - 0.5 * integrated_rss(s, p.scale) / model_.variance();
    }
    case Family::GaussianHeteroscedastic: {
        const auto& p = std::get<NormalInverseGammaPrior>(model_.hyper());
        const double shape_post = p.shape + 0.5 * s.length;
        return by_length_[L] + log_prior_norm_ -
               shape_post * std::log(p.rate + 0.5 * integrated_rss(s, p.scale));
    }
    }
    return kNegInf;
}

}  // namespace exactcp
