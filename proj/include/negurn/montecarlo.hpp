#pragma once

#include "negurn/asymptotics.hpp"
#include "negurn/dynamics.hpp"
#include "negurn/experiment.hpp"
#include "negurn/types.hpp"

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace negurn {

struct CheckpointStats {
    std::int64_t n = 0;
    double scaling = 1.0;  // s(n) applied to deviations
    Vector mean_y;
    Vector mean_y_tilde;           // NaN at n = 0
    double mean_dist = 0.0;        // mean ||Y_n - y_limit||_2
    double mean_dist_tilde = 0.0;
    Matrix cov_scaled_y;           // sample covariance of s(n)(Y_n - y_limit)
    Matrix cov_scaled_y_tilde;
    Vector ks_y;        // per-coordinate KS against predicted marginals; NaN without prediction
    Vector ks_y_tilde;
};

struct EnsembleSummary {
    ExperimentConfig config;
    int replicas = 0;
    std::uint64_t base_seed = 0;
    std::vector<std::uint64_t> replica_seeds;
    Vector y_limit;
    Vector y_tilde_limit;
    Regime regime = Regime::degenerate;
    double rho = 0.0;
    int nu = 1;
    bool a2_verified = false;
    std::vector<CheckpointStats> checkpoints;
    Matrix final_y;        // replicas x k, final horizon
    Matrix final_y_tilde;
    std::vector<double> mahalanobis_levels;     // chi-squared levels probed
    std::vector<double> mahalanobis_fractions;  // observed exceedance fractions
    double max_mass_residual = 0.0;
    double max_linear_residual = 0.0;
    double max_martingale_norm2 = 0.0;
    bool accounting_ok = false;
    std::vector<std::string> notes;
};

/// Runs config.replicas independent trajectories (seeded per replica from
/// config.seed) and aggregates per-checkpoint statistics against the report's
/// limit vector and deviation scaling. Aggregation order is fixed, so the
/// summary is identical for any thread count. threads = 0 picks the hardware
/// concurrency.
EnsembleSummary run_ensemble(const ExperimentConfig& config, const AsymptoticReport& report,
                             int threads = 1);

struct ConvergenceDiagnostic {
    double final_mean_distance = 0.0;
    double fraction_within = 0.0;       // replicas with final ||Y - y_limit|| < epsilon
    double monotonicity_score = 0.0;    // consecutive checkpoint pairs with decreasing mean dist
    double last_decade_decreasing = 0.0;  // same, restricted to n >= n_max/10
    std::vector<std::pair<std::int64_t, double>> mean_distances;
};

ConvergenceDiagnostic convergence_diagnostic(const EnsembleSummary& summary,
                                             const Vector& y_limit, double epsilon);

enum class DeviationSeries { proportions, count_proportions };

struct CltDiagnostic {
    double covariance_rel_error = 0.0;  // tangent-space Frobenius, vs prediction
    Vector ks;                          // per-coordinate at the final horizon
    double max_ks = 0.0;
    double mean_scaled_norm = 0.0;      // ||mean of scaled deviations||
    double mean_norm_bound = 0.0;       // 4 sqrt(tr Sigma / replicas)
    std::vector<double> mahalanobis_levels;
    std::vector<double> mahalanobis_fractions;
    double covariance_threshold = 0.0;
    double ks_threshold = 0.0;
    bool covariance_pass = false;
    bool ks_pass = false;
};

/// Compares the final-horizon scaled deviations of the chosen series against
/// a predicted covariance. Comparisons are made after projecting out the
/// all-ones direction, where both sides are singular. A nonpositive
/// ks_threshold reports the KS distances without gating on them.
CltDiagnostic clt_diagnostic(const EnsembleSummary& summary, const Matrix& sigma_pred,
                             DeviationSeries series = DeviationSeries::proportions,
                             double covariance_threshold = 0.15, double ks_threshold = 0.05);

}  // namespace negurn
