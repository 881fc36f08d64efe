#include "exactcp/segmentation.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "exactcp/log_math.hpp"

namespace exactcp {

SegmentMatrix::SegmentMatrix(const CountSeries& series, const EmissionModel& model)
    : n_(series.size()), model_(model), row_offset_(series.size() + 2, 0) {
    const SegmentScorer score(series, model);
    for (std::size_t i = 1; i <= n_; ++i) row_offset_[i + 1] = row_offset_[i] + (n_ + 1 - i);
    log_a_.resize(row_offset_[n_ + 1]);
    for (std::size_t i = 1; i <= n_; ++i) {
        double* row = log_a_.data() + row_offset_[i];
        for (std::size_t j = i + 1; j <= n_ + 1; ++j) row[j - i - 1] = score(i, j);
    }
}

PowerTables::PowerTables(const SegmentMatrix& a, std::size_t segments)
    : n_(a.size()), segments_(segments) {
    if (segments < 1 || segments > n_) {
        std::ostringstream ss;
        ss << "segment count K=" << segments << " out of range [1, " << n_ << "]";
        throw InvalidInput(ss.str());
    }
    const std::size_t width = n_ + 2;
    forward_.assign(segments * width, kNegInf);
    backward_.assign(segments * width, kNegInf);

    for (std::size_t t = 2; t <= n_ + 1; ++t) forward_[t] = a(1, t);
    for (std::size_t t = 1; t <= n_; ++t) backward_[t] = a(t, n_ + 1);

    std::vector<double> top(width);
    std::vector<double> acc(width);
    for (std::size_t k = 2; k <= segments; ++k) {
        const double* prev = forward_.data() + (k - 2) * width;
        double* cur = forward_.data() + (k - 1) * width;

        // Streams over rows of A so both passes read contiguous memory.
        std::fill(top.begin(), top.end(), kNegInf);
        for (std::size_t s = k; s <= n_; ++s) {
            const double base = prev[s];
            if (base == kNegInf) continue;
            const auto row = a.row(s);
            double* out = top.data() + s + 1;
            for (std::size_t c = 0; c < row.size(); ++c) out[c] = std::max(out[c], base + row[c]);
        }
        std::fill(acc.begin(), acc.end(), 0.0);
        for (std::size_t s = k; s <= n_; ++s) {
            const double base = prev[s];
            if (base == kNegInf) continue;
            const auto row = a.row(s);
            const double* m = top.data() + s + 1;
            double* out = acc.data() + s + 1;
            for (std::size_t c = 0; c < row.size(); ++c) out[c] += std::exp(base + row[c] - m[c]);
        }
        for (std::size_t t = k + 1; t <= n_ + 1; ++t)
            cur[t] = top[t] == kNegInf ? kNegInf : top[t] + std::log(acc[t]);
    }

    for (std::size_t j = 2; j <= segments; ++j) {
        const double* prev = backward_.data() + (j - 2) * width;
        double* cur = backward_.data() + (j - 1) * width;
        // [A^j]_{t,n+1} = sum_{s=t+1}^{n+2-j} A(t, s) [A^{j-1}]_{s,n+1}
        for (std::size_t t = 1; t + j <= n_ + 1; ++t) {
            const auto row = a.row(t);
            const std::size_t last = n_ + 2 - j;
            double m = kNegInf;
            for (std::size_t s = t + 1; s <= last; ++s) m = std::max(m, row[s - t - 1] + prev[s]);
            if (m == kNegInf) continue;
            double sum = 0.0;
            for (std::size_t s = t + 1; s <= last; ++s) sum += std::exp(row[s - t - 1] + prev[s] - m);
            cur[t] = m + std::log(sum);
        }
    }
}

LogEvidence log_evidence(const PowerTables& tables) {
    const double n = static_cast<double>(tables.size());
    const double k = static_cast<double>(tables.segments());
    return {tables.log_evidence_sum(), log_binomial(n - 1.0, k - 1.0)};
}

std::size_t ChangePointPosterior::mode() const {
    const auto it = std::max_element(probs.begin(), probs.end());
    return static_cast<std::size_t>(it - probs.begin()) + 1;
}

ChangePointPosterior changepoint_posterior(const PowerTables& tables, std::size_t index) {
    const std::size_t K = tables.segments();
    if (index < 1 || index + 1 > K) {
        std::ostringstream ss;
        ss << "change-point index k=" << index << " out of range [1, " << K - 1 << "]";
        throw InvalidInput(ss.str());
    }
    const std::size_t n = tables.size();
    ChangePointPosterior post;
    post.n = n;
    post.segments = K;
    post.index = index;
    post.probs.assign(n + 1, 0.0);

    const double total = tables.log_evidence_sum();
    double mass = 0.0;
    for (std::size_t t = post.first_support(); t <= post.last_support(); ++t) {
        const double lp = tables.forward(index, t) + tables.backward(K - index, t) - total;
        post.probs[t - 1] = std::exp(lp);
        mass += post.probs[t - 1];
    }
    for (double& p : post.probs) p /= mass;
    return post;
}

CredibleInterval minimal_credible_window(std::span<const double> probs, long first_location,
                                         double level) {
    if (!(level > 0.0 && level < 1.0)) {
        std::ostringstream ss;
        ss << "credibility level must lie in (0, 1), got " << level;
        throw InvalidInput(ss.str());
    }
    if (probs.empty()) throw InvalidInput("credible interval over an empty support");

    std::vector<double> prefix(probs.size() + 1, 0.0);
    for (std::size_t i = 0; i < probs.size(); ++i) prefix[i + 1] = prefix[i] + probs[i];

    CredibleInterval best{level, first_location,
                          first_location + static_cast<long>(probs.size()) - 1, prefix.back()};
    std::size_t best_width = probs.size() + 1;
    std::size_t hi = 0;
    for (std::size_t lo = 0; lo < probs.size(); ++lo) {
        hi = std::max(hi, lo);
        while (hi < probs.size() && prefix[hi + 1] - prefix[lo] < level) ++hi;
        if (hi == probs.size()) break;
        const std::size_t width = hi - lo + 1;
        if (width < best_width) {
            best_width = width;
            best.lo = first_location + static_cast<long>(lo);
            best.hi = first_location + static_cast<long>(hi);
            best.attained_mass = prefix[hi + 1] - prefix[lo];
        }
    }
    return best;
}

CredibleInterval credible_interval(const ChangePointPosterior& posterior, double level) {
    return minimal_credible_window(posterior.probs, 1, level);
}

}  // namespace exactcp
