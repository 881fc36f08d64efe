#ifndef EXACTCP_SEGMENTATION_HPP
#define EXACTCP_SEGMENTATION_HPP

#include <cstddef>
#include <span>
#include <vector>

#include "exactcp/emission.hpp"

namespace exactcp {

/// Log segment marginals log P(Y_[i,j) | [i,j)) for all 1 <= i < j <= n+1,
/// stored row by row in packed upper-triangular form.
class SegmentMatrix {
public:
    SegmentMatrix(const CountSeries& series, const EmissionModel& model);

    std::size_t size() const { return n_; }
    const EmissionModel& model() const { return model_; }

    double operator()(std::size_t i, std::size_t j) const {
        return log_a_[row_offset_[i] + (j - i - 1)];
    }

    // Entries (i, i+1), ..., (i, n+1).
    std::span<const double> row(std::size_t i) const {
        return {log_a_.data() + row_offset_[i], n_ + 1 - i};
    }

private:
    std::size_t n_;
    EmissionModel model_;
    std::vector<std::size_t> row_offset_;
    std::vector<double> log_a_;
};

inline SegmentMatrix build_segment_matrix(const CountSeries& series, const EmissionModel& model) {
    return SegmentMatrix(series, model);
}

/// Forward rows log [A^k]_{1,t} and backward rows log [A^j]_{t,n+1} for
/// k, j = 1..K. Only O(Kn) values are stored.
class PowerTables {
public:
    PowerTables(const SegmentMatrix& matrix, std::size_t segments);

    std::size_t size() const { return n_; }
    std::size_t segments() const { return segments_; }

    // log [A^k]_{1,t}; -inf when [1, t) cannot hold k non-empty segments.
    double forward(std::size_t k, std::size_t t) const { return forward_[(k - 1) * (n_ + 2) + t]; }
    // log [A^j]_{t,n+1}; -inf when [t, n+1) cannot hold j non-empty segments.
    double backward(std::size_t j, std::size_t t) const { return backward_[(j - 1) * (n_ + 2) + t]; }

    double log_evidence_sum() const { return forward(segments_, n_ + 1); }

private:
    std::size_t n_;
    std::size_t segments_;
    std::vector<double> forward_;
    std::vector<double> backward_;
};

inline PowerTables power_tables(const SegmentMatrix& matrix, std::size_t segments) {
    return PowerTables(matrix, segments);
}

/// log P(Y | K) split into the partition sum and the uniform-prior constant.
struct LogEvidence {
    double log_partition_sum;   // log sum over partitions of prod_J P(Y_J | J)
    double log_partition_count; // log C(n-1, K-1)

    double value() const { return log_partition_sum - log_partition_count; }
};

LogEvidence log_evidence(const PowerTables& tables);

/// Posterior of the k-th change-point, tau_k being the first location of
/// segment k+1.
struct ChangePointPosterior {
    std::size_t n = 0;
    std::size_t segments = 0;
    std::size_t index = 0;
    std::vector<double> probs;  // probs[t - 1] = P(tau_k = t), t = 1..n+1

    double at(long t) const {
        return t >= 1 && t <= static_cast<long>(probs.size()) ? probs[t - 1] : 0.0;
    }
    std::size_t first_support() const { return index + 1; }
    std::size_t last_support() const { return n - (segments - index) + 1; }
    std::size_t mode() const;
};

ChangePointPosterior changepoint_posterior(const PowerTables& tables, std::size_t index);

struct CredibleInterval {
    double level = 0.0;
    long lo = 0;
    long hi = 0;
    double attained_mass = 0.0;
};

// Smallest-width contiguous window of mass >= level over probs, whose first
// element sits at first_location; ties go to the smaller lo.
CredibleInterval minimal_credible_window(std::span<const double> probs, long first_location,
                                         double level);

CredibleInterval credible_interval(const ChangePointPosterior& posterior, double level);

}  // namespace exactcp

#endif
