#pragma once

#include "negurn/asymptotics.hpp"
#include "negurn/dynamics.hpp"
#include "negurn/experiment.hpp"
#include "negurn/montecarlo.hpp"

// Single-header nlohmann/json from vendor/.
#include "json.hpp"

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace negurn {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

using Json = nlohmann::json;

/// Parses and validates an experiment configuration document. Unknown keys
/// are rejected; errors carry the offending path.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);

Json config_to_json(const ExperimentConfig& config);

/// FNV-1a hash of the canonical serialized config, as 16 hex digits.
std::string config_hash(const ExperimentConfig& config);

/// Reproducibility header: tool version, config hash, base seed.
Json meta_json(const ExperimentConfig& config);
std::string csv_header_block(const ExperimentConfig& config);

Json report_to_json(const AsymptoticReport& report, const ExperimentConfig& config);
std::string report_to_csv(const AsymptoticReport& report, const ExperimentConfig& config);

std::string trajectory_to_csv(const Trajectory& trajectory);
Json trajectory_to_json(const Trajectory& trajectory);

Json summary_to_json(const EnsembleSummary& summary);
std::string summary_to_csv(const EnsembleSummary& summary);

// rho over a (theta, Re lambda_s) grid for a built-in family; a cached view
// of the closed-form analysis used by the `regions` command.
struct RegionGrid {
    std::string family;
    Eigen::Index k = 2;
    double alpha = 1.0;  // inverse_power only
    std::vector<double> theta_grid;
    std::vector<double> lambda_grid;
    Matrix rho;                    // theta index x lambda index
    std::vector<std::vector<Regime>> regimes;
    Eigen::Matrix<int, Eigen::Dynamic, Eigen::Dynamic> boundary_mask;  // 1 on rho = 1/2 cells
    std::vector<std::pair<double, double>> boundary;  // analytic (theta, lambda) polyline
};

RegionGrid region_grid(const std::string& family, Eigen::Index k, double theta_min,
                       double theta_max, int theta_points, double lambda_min,
                       double lambda_max, int lambda_points, double alpha = 1.0);

std::string region_to_csv(const RegionGrid& grid);
Json region_to_json(const RegionGrid& grid);

void write_text_file(const std::string& path, const std::string& content);

}  // namespace negurn
