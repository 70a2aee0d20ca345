#pragma once

#include "negurn/ode_analysis.hpp"
#include "negurn/replacement_matrix.hpp"
#include "negurn/types.hpp"
#include "negurn/weight_function.hpp"

#include <optional>
#include <string>
#include <vector>

namespace negurn {

/// Solves A X + X A^T = I by Kronecker vectorization. Requires the spectrum
/// of A strictly in the right half-plane; the result is symmetric with
/// max-norm residual at most 1e-10.
Matrix solve_lyapunov(const Eigen::Ref<const Matrix>& a);

// Limit covariances for the sqrt(n) regime (rho > 1/2): Lambda solves the
// Lyapunov equation for A = I/2 - b R^T; sigma_tilde scales it and sigma
// conjugates by R. For normal R the closed form (I - b(R + R^T))^-1 replaces
// the solve and the gap between the two routes is recorded.
struct CovarianceSqrtN {
    Matrix lambda;
    Matrix sigma;        // covariance of scaled colour-proportion deviations
    Matrix sigma_tilde;  // covariance for draw-count proportions
    bool used_closed_form = false;
    double closed_form_gap = 0.0;
};

CovarianceSqrtN sqrt_n_covariance(const WeightFunction& w, const ReplacementMatrix& R);

// Limit covariances at the critical boundary (rho = 1/2): Lambda is the
// normalized integral (1/T^(2 nu - 1)) int_0^T e^-u e^(buR^T) e^(buR) du,
// evaluated on a grid of horizons and extrapolated in 1/T.
struct CovarianceCritical {
    Matrix lambda;  // extrapolated limit
    Matrix sigma;
    Matrix sigma_tilde;
    std::vector<double> horizons;
    std::vector<Matrix> estimates;         // per-horizon normalized integrals
    std::vector<double> successive_gaps;   // max-norm differences along the grid
    double extrapolation_gap = 0.0;        // ||lambda - last estimate||_max
    bool converged = false;
};

CovarianceCritical critical_covariance(const WeightFunction& w, const ReplacementMatrix& R,
                                       std::vector<double> horizons = {});

enum class Regime {
    clt_sqrt_n,           // rho > 1/2
    clt_sqrt_n_over_log,  // rho = 1/2
    slow,                 // 0 < rho < 1/2
    degenerate,           // rho = 0
};

std::string regime_name(Regime regime);

struct AsymptoticReport {
    SpectralSummary spectral;
    StabilityVerdict stability;
    ContractionVerdict contraction;
    FixedPointResult fixed_point;
    Regime regime = Regime::degenerate;
    bool doubly_stochastic = false;
    bool a2_verified = false;  // almost-sure convergence to uniform supported
    Matrix gamma;              // R^T [(1/k)I - (1/k^2)J] R, martingale covariance
    Matrix gamma_tilde;        // (1/k)I - (1/k^2)J
    std::optional<CovarianceSqrtN> sqrt_n;
    std::optional<CovarianceCritical> critical;
    Vector y_limit;        // uniform for doubly stochastic R, else fixed point
    Vector y_tilde_limit;
    std::vector<std::string> notes;

    /// Deviation scaling s(n) for the classified regime.
    double scaling_factor(double n) const;
    std::string scaling_description() const;
    const Matrix* sigma() const;
    const Matrix* sigma_tilde() const;
};

/// Full analysis: spectrum, stability, contraction, fixed point, regime and
/// the covariance predictions applicable to the regime.
AsymptoticReport classify_regime(const WeightFunction& w, const ReplacementMatrix& R);

}  // namespace negurn
