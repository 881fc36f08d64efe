#ifndef EXACTCP_LOG_MATH_HPP
#define EXACTCP_LOG_MATH_HPP

#include <cmath>
#include <limits>
#include <span>

namespace exactcp {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Reentrant log|Gamma(x)|; std::lgamma touches the global signgam.
double log_gamma(double x);

double log_beta(double a, double b);

// log C(n, k) for real n >= k >= 0.
double log_binomial(double n, double k);

/* log(e^a + e^b) */
inline double log_add_exp(double a, double b) {
    if (a == kNegInf) return b;
    if (b == kNegInf) return a;
    return (a > b ? a : b) + std::log1p(std::exp(-std::fabs(a - b)));
}

/* log(1 - e^x) for x <= 0 */
inline double log1m_exp(double x) {
    if (x >= 0.0) return kNegInf;
    return x > -0.6931471805599453 ? std::log(-std::expm1(x))
                                   : std::log1p(-std::exp(x));
}

// Max-shifted log(sum_i exp(v_i)); -inf for an empty or all -inf input.
double log_sum_exp(std::span<const double> values);

}  // namespace exactcp

#endif
