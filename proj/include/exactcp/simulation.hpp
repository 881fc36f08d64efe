#ifndef EXACTCP_SIMULATION_HPP
#define EXACTCP_SIMULATION_HPP

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

#include "exactcp/emission.hpp"

namespace exactcp {

// Three-profile benchmark: length 700, seven segments, profiles 1 and 2 on
// m = (1, 101, ..., 701), profile 3 with tau_k moved by 2^(k-1).
inline constexpr std::size_t kDesignLength = 700;
inline constexpr std::size_t kDesignSegments = 7;
inline constexpr std::array<std::size_t, kDesignSegments + 1> kDesignPartition = {
    1, 101, 201, 301, 401, 501, 601, 701};

enum class Design { Shifted, Control };

// Change-points (tau_0, ..., tau_K) of profile 3 under the given design.
std::array<std::size_t, kDesignSegments + 1> design_partition(Design design);

// Distance between tau_k of profile 3 and profile 1.
std::size_t design_shift(std::size_t k, Design design);

struct SimulationConfig {
    Family family = Family::NegativeBinomial;  // NegativeBinomial or Poisson
    double base_level = 0.5;                   // p0 (NB) or lambda0 (Poisson)
    double odds_ratio = 16.0;                  // s
    double phi = 1.0;                          // NB only
    std::size_t replicates = 100;
    std::uint64_t seed = 1;
    bool use_true_phi = false;
    bool include_control = true;
    double prior_e0 = 0.5;
    std::size_t initial_window = 15;
};

void validate(const SimulationConfig& config);

/// p1 with odds(p0) / odds(p1) = s.
double even_success_probability(double p0, double odds_ratio);

/// lambda1 = s * lambda0; for NB the mean phi(1-p)/p scales the same way.
double even_intensity(double lambda0, double odds_ratio);

/// Profiles 1, 2 and 3 of one replicate; odd segments from p0 (lambda0),
/// even segments from p1 (lambda1). Profiles 1 and 2 do not depend on design.
std::array<CountSeries, 3> generate_profiles(const SimulationConfig& config,
                                             std::size_t replicate = 0,
                                             Design design = Design::Shifted);

struct AbacusRow {
    Family family = Family::NegativeBinomial;
    double base_level = 0.0;
    double odds_ratio = 0.0;
    double phi = 0.0;
    bool use_true_phi = false;
    std::size_t replicate = 0;
    std::size_t k = 0;
    std::size_t d = 0;
    double posterior_e0 = 0.0;
    std::array<std::optional<double>, 3> phi_hat;
    std::array<bool, 3> fallback{};
};

/// Posterior probability of a common k-th change-point across the three
/// profiles, for k = 1..6 and every replicate. Control rows (d = 0) come
/// first within a replicate when config.include_control is set.
///
/// Replicates run on EXACTCP_THREADS workers (default: hardware threads).
/// Output depends on the seed only.
std::vector<AbacusRow> run_abacus(const SimulationConfig& config);

void write_abacus_csv(std::ostream& out, const std::vector<AbacusRow>& rows);

}  // namespace exactcp

#endif
