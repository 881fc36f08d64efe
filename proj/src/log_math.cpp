#include "exactcp/log_math.hpp"

#include <algorithm>
#include <math.h>

namespace exactcp {

double log_gamma(double x) {
    int sign = 0;
    return ::lgamma_r(x, &sign);
}

double log_beta(double a, double b) {
    return log_gamma(a) + log_gamma(b) - log_gamma(a + b);
}

double log_binomial(double n, double k) {
    if (k < 0.0 || k > n) return kNegInf;
    return log_gamma(n + 1.0) - log_gamma(k + 1.0) - log_gamma(n - k + 1.0);
}

double log_sum_exp(std::span<const double> values) {
    if (values.empty()) return kNegInf;
    const double top = *std::max_element(values.begin(), values.end());
    if (top == kNegInf) return kNegInf;
    double sum = 0.0;
    for (double v : values) sum += std::exp(v - top);
    return top + std::log(sum);
}

}  // namespace exactcp
