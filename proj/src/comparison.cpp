#include "exactcp/comparison.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

#include "exactcp/log_math.hpp"

namespace exactcp {

namespace {

// Tolerated excess of Q(Y,E0|K) over Q(Y|K), in log units, before the two are
// declared inconsistent.
constexpr double kJointSlack = 1e-9;

// q0 closer than this to 1 leaves no room for E1.
constexpr double kDegenerateQ0 = 1e-12;

void validate_specs(std::size_t n, std::span<const ChangePointSpec> specs) {
    if (specs.empty()) throw InvalidInput("at least one series is required");
    for (std::size_t l = 0; l < specs.size(); ++l) {
        const auto& s = specs[l];
        if (s.segments < 2 || s.segments > n || s.index < 1 || s.index >= s.segments) {
            std::ostringstream ss;
            ss << "series " << l + 1 << ": invalid change-point selection (K=" << s.segments
               << ", k=" << s.index << ") for length n=" << n;
            throw InvalidInput(ss.str());
        }
    }
}

}  // namespace

ShiftDistribution shift_posterior(const ChangePointPosterior& first,
                                  const ChangePointPosterior& second) {
    if (first.n != second.n) {
        std::ostringstream ss;
        ss << "shift posterior needs series of equal length, got " << first.n << " and "
           << second.n;
        throw InvalidInput(ss.str());
    }
    ShiftDistribution delta;
    delta.n = first.n;
    delta.index1 = first.index;
    delta.index2 = second.index;
    delta.probs.assign(2 * first.n - 1, 0.0);

    const long lo1 = static_cast<long>(first.first_support());
    const long hi1 = static_cast<long>(first.last_support());
    const long lo2 = static_cast<long>(second.first_support());
    const long hi2 = static_cast<long>(second.last_support());
    // Accumulating in increasing first-series location makes swapping the
    // arguments mirror the result bit for bit.
    for (long d = lo1 - hi2; d <= hi1 - lo2; ++d) {
        double acc = 0.0;
        for (long t = std::max(lo1, lo2 + d); t <= std::min(hi1, hi2 + d); ++t)
            acc += first.at(t) * second.at(t - d);
        delta.probs[d - delta.min_shift()] = acc;
    }
    return delta;
}

ShiftInterval shift_credible_interval(const ShiftDistribution& delta, double level) {
    ShiftInterval out;
    out.interval = minimal_credible_window(delta.probs, delta.min_shift(), level);
    out.contains_zero = out.interval.lo <= 0 && out.interval.hi >= 0;
    return out;
}

double log_q0_prior(std::size_t n, std::span<const ChangePointSpec> specs) {
    validate_specs(n, specs);
    if (specs.size() == 1) return 0.0;

    const double len = static_cast<double>(n);
    std::vector<double> terms;
    terms.reserve(n);
    for (std::size_t t = 2; t <= n; ++t) {
        const double loc = static_cast<double>(t);
        double term = 0.0;
        for (const auto& s : specs) {
            const double K = static_cast<double>(s.segments);
            const double k = static_cast<double>(s.index);
            term += log_binomial(loc - 2.0, k - 1.0) + log_binomial(len - loc, K - k - 1.0) -
                    log_binomial(len - 1.0, K - 1.0);
        }
        terms.push_back(term);
    }
    return std::min(log_sum_exp(terms), 0.0);
}

double log_joint_e0(std::span<const PowerTables* const> tables,
                    std::span<const ChangePointSpec> specs) {
    if (tables.size() != specs.size() || tables.empty()) {
        throw InvalidInput("need exactly one set of power tables per change-point selection");
    }
    const std::size_t n = tables.front()->size();
    for (std::size_t l = 0; l < tables.size(); ++l) {
        if (tables[l]->size() != n) {
            std::ostringstream ss;
            ss << "series " << l + 1 << " has length " << tables[l]->size()
               << " but series 1 has length " << n;
            throw InvalidInput(ss.str());
        }
        if (tables[l]->segments() != specs[l].segments) {
            std::ostringstream ss;
            ss << "series " << l + 1 << ": tables built for K=" << tables[l]->segments()
               << " but the selection asks for K=" << specs[l].segments;
            throw InvalidInput(ss.str());
        }
    }
    validate_specs(n, specs);

    std::vector<double> terms(n + 1, 0.0);
    for (std::size_t t = 2; t <= n; ++t) {
        for (std::size_t l = 0; l < tables.size(); ++l) {
            const auto& s = specs[l];
            terms[t] += tables[l]->forward(s.index, t) +
                        tables[l]->backward(s.segments - s.index, t);
        }
    }
    return log_sum_exp(std::span<const double>(terms).subspan(2));
}

ComparisonResult posterior_common(const CommonChangePointQuery& query,
                                  std::span<const PowerTables* const> tables) {
    const double p0 = query.prior_e0;
    if (!(p0 > 0.0 && p0 < 1.0)) {
        std::ostringstream ss;
        ss << "prior probability p0 must lie in (0, 1), got " << p0;
        throw InvalidInput(ss.str());
    }
    ComparisonResult res;
    res.prior_e0 = p0;
    res.log_q_joint = log_joint_e0(tables, query.specs);

    const std::size_t n = tables.front()->size();
    const double log_q0 = log_q0_prior(n, query.specs);
    const double log_1m_q0 = log1m_exp(log_q0);
    res.q0 = std::exp(log_q0);
    if (log_q0 == kNegInf || res.q0 > 1.0 - kDegenerateQ0) {
        std::ostringstream ss;
        ss << "prior probability of a common change-point is degenerate (q0=" << res.q0
           << "); the event space is trivial for n=" << n;
        throw NumericalDegeneracy(ss.str());
    }

    res.log_q_marginal = 0.0;
    for (const PowerTables* t : tables) res.log_q_marginal += t->log_evidence_sum();

    double log_ratio = res.log_q_joint - res.log_q_marginal;  // log Q(E0 | Y, K)
    if (log_ratio > kJointSlack) {
        std::ostringstream ss;
        ss << "internal inconsistency: Q(Y,E0|K) exceeds Q(Y|K) by " << log_ratio << " log units";
        throw std::logic_error(ss.str());
    }
    log_ratio = std::min(log_ratio, 0.0);
    const double log_1m_ratio = log1m_exp(log_ratio);

    // P(Y,E0|K) and P(Y,E1|K) up to the common factor Q(Y|K).
    const double log_e0 = std::log(p0) - log_q0 + log_ratio;
    const double log_e1 = std::log1p(-p0) - log_1m_q0 + log_1m_ratio;
    if (log_e0 == kNegInf) {
        res.posterior_e0 = 0.0;
    } else {
        res.posterior_e0 = 1.0 / (1.0 + std::exp(log_e1 - log_e0));
    }
    res.log_bayes_factor = log_1m_q0 - log_q0 + log_ratio - log_1m_ratio;
    res.bayes_factor = std::exp(res.log_bayes_factor);
    return res;
}

}  // namespace exactcp
