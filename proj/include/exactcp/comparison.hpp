#ifndef EXACTCP_COMPARISON_HPP
#define EXACTCP_COMPARISON_HPP

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "exactcp/segmentation.hpp"

namespace exactcp {

/// Posterior of Delta = tau^1_{k1} - tau^2_{k2} over d = -(n-1)..(n-1).
struct ShiftDistribution {
    std::size_t n = 0;
    std::size_t index1 = 0;
    std::size_t index2 = 0;
    std::vector<double> probs;  // probs[d + n - 1]

    long min_shift() const { return -static_cast<long>(n) + 1; }
    long max_shift() const { return static_cast<long>(n) - 1; }
    double at(long d) const {
        return d >= min_shift() && d <= max_shift() ? probs[d - min_shift()] : 0.0;
    }
};

ShiftDistribution shift_posterior(const ChangePointPosterior& first,
                                  const ChangePointPosterior& second);

struct ShiftInterval {
    CredibleInterval interval;
    bool contains_zero = false;
};

ShiftInterval shift_credible_interval(const ShiftDistribution& delta, double level);

/// Designates change-point `index` of a series segmented into `segments`.
struct ChangePointSpec {
    std::size_t segments = 0;
    std::size_t index = 0;
};

// log q0: prior probability, under independent uniform partitions, that all
// designated change-points share one location.
double log_q0_prior(std::size_t n, std::span<const ChangePointSpec> specs);

inline double q0_prior(std::size_t n, std::span<const ChangePointSpec> specs) {
    return std::exp(log_q0_prior(n, specs));
}

/// log Q(Y, E0 | K) = log sum_t prod_l [A_l^{k_l}]_{1,t} [A_l^{K_l-k_l}]_{t,n+1}.
/// Uses the same normalisation as the per-series partition sums, so that
/// exp(log_joint_e0 - sum_l log_partition_sum_l) = Q(E0 | Y, K).
double log_joint_e0(std::span<const PowerTables* const> tables,
                    std::span<const ChangePointSpec> specs);

struct CommonChangePointQuery {
    std::vector<ChangePointSpec> specs;
    double prior_e0 = 0.5;  // p0(K)
};

struct ComparisonResult {
    double posterior_e0 = 0.0;
    double bayes_factor = 0.0;      // +inf when Q(Y|K) - Q(Y,E0|K) underflows
    double log_bayes_factor = 0.0;
    double prior_e0 = 0.0;
    double q0 = 0.0;
    double log_q_joint = 0.0;       // log Q(Y, E0 | K)
    double log_q_marginal = 0.0;    // log Q(Y | K)

    bool bayes_factor_infinite() const { return std::isinf(bayes_factor); }
};

/// Posterior probability of a common change-point and the Bayes factor of E0
/// against E1. tables[l] must be built with K = query.specs[l].segments.
///
/// Throws NumericalDegeneracy when q0 is 0 or 1 (the event space is trivial),
/// InvalidInput on mismatched inputs.
ComparisonResult posterior_common(const CommonChangePointQuery& query,
                                  std::span<const PowerTables* const> tables);

}  // namespace exactcp

#endif
