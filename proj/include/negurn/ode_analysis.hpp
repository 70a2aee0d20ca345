#pragma once

#include "negurn/replacement_matrix.hpp"
#include "negurn/types.hpp"
#include "negurn/weight_function.hpp"

#include <complex>

namespace negurn {

/// The mean-field map F(y) = w(y) R / S_w(y) (row convention; vectors are
/// stored as columns, so this evaluates R^T applied to the selection
/// probabilities).
Vector mean_field_map(const Eigen::Ref<const Vector>& y, const WeightFunction& w,
                      const ReplacementMatrix& R);

/// Drift of the colour proportions: h(y) = F(y) - y. Components sum to zero
/// on the simplex.
Vector drift(const Eigen::Ref<const Vector>& y, const WeightFunction& w,
             const ReplacementMatrix& R);

/// Drift of the draw-count proportions: h~(y) = w(yR)/S_w(yR) - y.
Vector count_drift(const Eigen::Ref<const Vector>& y, const WeightFunction& w,
                   const ReplacementMatrix& R);

/// Slope coefficient b = w'(1/k) / (k w(1/k)); nonpositive for non-increasing
/// w. Every drift Jacobian eigenvalue at the uniform point is b*lambda - 1.
double drift_slope(const WeightFunction& w, Eigen::Index k);

/// Analytic Jacobian of the drift at the uniform point for a doubly
/// stochastic replacement: b R - (b/k) J - I, with entry (i,j) = dh_j / dy_i.
Matrix drift_jacobian(const WeightFunction& w, const ReplacementMatrix& R);

struct SpectralSummary {
    ComplexVector eigenvalues;       // of R, solver order
    Eigen::Index unit_index = -1;    // excluded copy of the maximal eigenvalue 1
    std::complex<double> lambda_s;   // minimal real part among the rest
    int nu = 1;                      // algebraic multiplicity of the Re(lambda_s) cluster
    double slope = 0.0;              // b
    double rho = 0.0;                // max{0, 1 - b Re(lambda_s)}
    double rho_unclipped = 0.0;
    ComplexVector jacobian_eigenvalues;  // {-1} and {b lambda_i - 1}
    bool derivative_approximate = false;
};

SpectralSummary spectral_summary(const WeightFunction& w, const ReplacementMatrix& R);

struct StabilityVerdict {
    bool stable = false;
    // Exact criterion: Re(b lambda_i - 1) < 0 for all non-maximal eigenvalues,
    // equivalently Re(lambda_i) > 1/b.
    bool eigenvalue_condition = false;
    // Spectrum-free sufficient bound k > -w'(1/k)/w(1/k).
    bool dimension_condition = false;
    enum class Binding { eigenvalue, dimension } binding = Binding::eigenvalue;
    double margin = 0.0;  // min_i Re(lambda_i) - 1/b; +inf when b = 0
};

StabilityVerdict check_stability(const WeightFunction& w, const ReplacementMatrix& R);

struct ContractionVerdict {
    enum class Case { lower_weight_bound, convexity_bound, none };
    bool contraction = false;   // a sufficient condition holds; never "certainly not"
    Case applied = Case::none;
    double factor = 0.0;        // M(1+sqrt k)/(k w_floor), NaN when inconclusive

    bool inconclusive() const { return !contraction; }
};

/// Sufficient contraction conditions for the mean-field map:
/// (i) w(1) > 0 and sqrt(k) > 2M/w(1); (ii) w convex and sqrt(k) w(1/k) > 2M.
ContractionVerdict check_contraction(const WeightFunction& w, const ReplacementMatrix& R);

struct FixedPointResult {
    Vector y;        // y*, last Picard iterate
    Vector y_tilde;  // w(y*)/S_w(y*)
    bool converged = false;
    int iterations = 0;
    double residual = 0.0;  // ||F(y) - y||_2 at exit
};

/// Picard iteration y <- F(y) from the uniform point (or `start`), with 0.5
/// damping should an iterate leave the simplex. Non-convergence is reported
/// in the result, not thrown.
FixedPointResult solve_fixed_point(const WeightFunction& w, const ReplacementMatrix& R,
                                   double tol = 1e-12, int max_iter = 10000,
                                   Vector start = Vector());

}  // namespace negurn
