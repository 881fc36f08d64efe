#ifndef EXACTCP_DISPERSION_HPP
#define EXACTCP_DISPERSION_HPP

#include <cstddef>
#include <optional>

#include "exactcp/emission.hpp"

namespace exactcp {

struct DispersionEstimate {
    // Unset when the doubling cascade ran out of series (fallback_applied);
    // the data then look Poisson-or-less dispersed.
    std::optional<double> phi_hat;
    std::size_t window_used = 0;
    std::size_t windows_evaluated = 0;
    std::size_t windows_undefined = 0;  // windows with s^2 == mean, left out of the median
    bool fallback_applied = false;
};

/// Sliding-window method-of-moments estimate of the NB dispersion.
///
/// Every window of the current size yields mean^2 / (s^2 - mean), with s^2 the
/// unbiased sample variance. Negative values take part in the median; windows
/// where s^2 == mean have no value and are skipped. While the median is not
/// positive the window doubles; once it would exceed n the estimate falls back.
///
/// Throws InvalidInput for non-count data or n < initial_window, and
/// NumericalDegeneracy for a constant series.
DispersionEstimate estimate_dispersion(const CountSeries& series, std::size_t initial_window = 15);

}  // namespace exactcp

#endif
