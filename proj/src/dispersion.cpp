#include "exactcp/dispersion.hpp"

#include <algorithm>
#include <cstdint>
#include <sstream>
#include <vector>

namespace exactcp {

namespace {

struct WindowPass {
    std::vector<double> values;
    std::size_t evaluated = 0;
    std::size_t undefined = 0;
};

WindowPass evaluate_windows(const std::vector<double>& y, std::size_t w) {
    WindowPass pass;
    // Integer running sums keep the s^2 == mean test exact.
    __int128 sum = 0;
    __int128 sum_sq = 0;
    const auto width = static_cast<__int128>(w);
    for (std::size_t t = 0; t < y.size(); ++t) {
        const auto v = static_cast<__int128>(y[t]);
        sum += v;
        sum_sq += v * v;
        if (t >= w) {
            const auto old = static_cast<__int128>(y[t - w]);
            sum -= old;
            sum_sq -= old * old;
        }
        if (t + 1 < w) continue;
        ++pass.evaluated;
        // w(w-1)(s^2 - mean) = w*sum_sq - sum^2 - (w-1)*sum
        const __int128 excess = width * sum_sq - sum * sum - (width - 1) * sum;
        if (excess == 0) {
            ++pass.undefined;
            continue;
        }
        const double mean = static_cast<double>(sum) / static_cast<double>(w);
        const double scaled = static_cast<double>(excess) / static_cast<double>(w * (w - 1));
        pass.values.push_back(mean * mean / scaled);
    }
    return pass;
}

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t m = v.size() / 2;
    return v.size() % 2 == 1 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

}  // namespace

DispersionEstimate estimate_dispersion(const CountSeries& series, std::size_t initial_window) {
    validate_series(series, EmissionModel::poisson());
    const std::size_t n = series.size();
    if (initial_window < 2) throw InvalidInput("dispersion window must hold at least 2 points");
    if (n < initial_window) {
        std::ostringstream ss;
        ss << "series '" << series.label << "' has " << n
           << " points, fewer than the initial window " << initial_window;
        throw InvalidInput(ss.str());
    }
    if (std::all_of(series.values.begin(), series.values.end(),
                    [&](double v) { return v == series.values.front(); })) {
        throw NumericalDegeneracy("series '" + series.label +
                                  "' is constant: no overdispersion, use the Poisson model");
    }

    DispersionEstimate est;
    for (std::size_t w = initial_window; w <= n; w *= 2) {
        const WindowPass pass = evaluate_windows(series.values, w);
        est.window_used = w;
        est.windows_evaluated = pass.evaluated;
        est.windows_undefined = pass.undefined;
        if (pass.values.empty()) continue;
        const double med = median(pass.values);
        if (med > 0.0) {
            est.phi_hat = med;
            return est;
        }
    }
    est.fallback_applied = true;
    return est;
}

}  // namespace exactcp
