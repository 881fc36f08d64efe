#ifndef EXACTCP_REPORTS_HPP
#define EXACTCP_REPORTS_HPP

#include <optional>
#include <string>
#include <vector>

#include "exactcp/emission.hpp"
#include "exactcp/simulation.hpp"

namespace exactcp {

// Process exit codes shared by the command-line tool.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitInputError = 2;
inline constexpr int kExitDegenerate = 3;

enum class OutputFormat { Json, Csv };

/// Everything a command needs besides the series themselves. Locations in
/// every report are 1-based; tau_k is the first location of segment k+1.
struct AnalysisRequest {
    Family family = Family::Poisson;
    std::optional<double> phi;
    bool estimate_phi = false;
    std::optional<double> sigma2;
    std::vector<double> prior;             // family-specific hyperparameter override
    std::vector<std::size_t> segments;     // K, one value or one per series
    std::vector<std::size_t> indices;      // k, one value or one per series
    std::vector<std::string> prior_e0;     // p0 values, numbers or "q0"
    double level = 0.95;
    OutputFormat format = OutputFormat::Json;
};

struct CommandOutput {
    std::string text;
    int exit_code = kExitOk;
};

// Emission model for one series; estimates phi when requested.
EmissionModel model_for(const AnalysisRequest& request, const CountSeries& series,
                        std::optional<double>* phi_hat = nullptr);

CommandOutput cmd_segment(const AnalysisRequest& request, const std::vector<CountSeries>& series);
CommandOutput cmd_compare_shift(const AnalysisRequest& request,
                                const std::vector<CountSeries>& series);
CommandOutput cmd_compare_common(const AnalysisRequest& request,
                                 const std::vector<CountSeries>& series);
CommandOutput cmd_estimate_phi(const std::vector<CountSeries>& series,
                               std::size_t initial_window = 15);
CommandOutput cmd_simulate(const SimulationConfig& config);

}  // namespace exactcp

#endif
