#pragma once

#include "negurn/experiment.hpp"
#include "negurn/rng.hpp"
#include "negurn/types.hpp"

#include <cstdint>
#include <vector>

namespace negurn {

struct UrnState {
    std::int64_t n = 0;
    Vector colour_mass;   // U_n, sums to n+1
    IntVector draw_counts;  // N_n, sums to n
    int last_draw = -1;   // colour drawn at the previous step, -1 before any draw

    Vector proportions() const { return colour_mass / static_cast<double>(n + 1); }
    /// Draw-count proportions; defined for n >= 1.
    Vector count_proportions() const {
        return draw_counts.cast<double>() / static_cast<double>(n);
    }
};

struct TrajectoryCheckpoint {
    std::int64_t n = 0;
    Vector proportions;        // Y_n
    Vector count_proportions;  // NaN-filled at n = 0
};

struct Trajectory {
    ExperimentConfig config;
    std::uint64_t seed = 0;
    std::vector<TrajectoryCheckpoint> checkpoints;
    UrnState final_state;
    double max_martingale_norm2 = 0.0;  // max over steps of ||M R||^2
    double max_mass_residual = 0.0;     // max over checkpoints of |sum U - (n+1)|
    double max_linear_residual = 0.0;   // max over checkpoints of ||U - U0 - N R||_inf
};

struct AccountingReport {
    bool mass_ok = false;        // sum U_n = n+1
    bool counts_ok = false;      // sum N_n = n
    bool linear_ok = false;      // U_n = U_0 + N_n R
    bool martingale_ok = false;  // ||M_m R||^2 <= k(1+k) for all m
    double mass_residual = 0.0;
    double linear_residual = 0.0;
    Eigen::Index linear_residual_index = -1;  // component of the worst violation
    double martingale_norm2_max = 0.0;
    double mass_threshold = 0.0;
    double linear_threshold = 0.0;
    double martingale_bound = 0.0;

    bool all_ok() const { return mass_ok && counts_ok && linear_ok && martingale_ok; }
};

/// Selection probabilities (w(y_j)/S_w(y))_j for a proportion vector y.
/// Throws std::runtime_error("degenerate weight") when the normalizer
/// underflows.
Vector selection_distribution(const Eigen::Ref<const Vector>& y, const WeightFunction& w);

/// Inverse-CDF draw from a probability vector with a single uniform variate.
int sample_colour(const Eigen::Ref<const Vector>& probabilities, double u);

/// One transition of the urn. Value-returning; the simulation loop in
/// run_trajectory uses the same core in place.
UrnState step(const UrnState& state, const WeightFunction& w, const ReplacementMatrix& R,
              Xoshiro256pp& rng);

/// Simulates to config.n_max, recording the configured checkpoints. Fully
/// deterministic in (config, seed).
Trajectory run_trajectory(const ExperimentConfig& config, std::uint64_t seed);

/// Checks the mass, count and linear identities and the per-step martingale
/// bound. Residual thresholds scale as 1e-9 * n.
AccountingReport verify_accounting(const Trajectory& trajectory);

}  // namespace negurn
