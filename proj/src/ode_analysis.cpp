#include "negurn/ode_analysis.hpp"

#include "negurn/dynamics.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <limits>
#include <stdexcept>

namespace negurn {

namespace {
constexpr double kClusterTol = 1e-8;  // merge eigenvalues with equal real part
constexpr double kUnitTieTol = 1e-9;
}  // namespace

Vector mean_field_map(const Eigen::Ref<const Vector>& y, const WeightFunction& w,
                      const ReplacementMatrix& R) {
    return R.entries().transpose() * selection_distribution(y, w);
}

Vector drift(const Eigen::Ref<const Vector>& y, const WeightFunction& w,
             const ReplacementMatrix& R) {
    return mean_field_map(y, w, R) - y;
}

Vector count_drift(const Eigen::Ref<const Vector>& y, const WeightFunction& w,
                   const ReplacementMatrix& R) {
    const Vector mixed = R.entries().transpose() * y;  // yR in row convention
    return selection_distribution(mixed, w) - y;
}

double drift_slope(const WeightFunction& w, Eigen::Index k) {
    const double x = 1.0 / static_cast<double>(k);
    const double value = w.eval(x);
    if (!(value > 0.0))
        throw std::invalid_argument("drift slope: w(1/k) must be positive");
    return w.deriv1(x) / (static_cast<double>(k) * value);
}

Matrix drift_jacobian(const WeightFunction& w, const ReplacementMatrix& R) {
    const Eigen::Index k = R.k();
    const double b = drift_slope(w, k);
    return b * R.entries() - (b / static_cast<double>(k)) * ones_matrix(k) -
           Matrix::Identity(k, k);
}

SpectralSummary spectral_summary(const WeightFunction& w, const ReplacementMatrix& R) {
    const Eigen::Index k = R.k();
    SpectralSummary out;
    out.slope = drift_slope(w, k);
    out.derivative_approximate = w.derivative_approximate();

    Eigen::EigenSolver<Matrix> solver(R.entries(), true);
    if (solver.info() != Eigen::Success)
        throw std::runtime_error("spectral summary: eigensolver failed");
    out.eigenvalues = solver.eigenvalues();

    // The maximal eigenvalue 1: nearest to 1, ties broken by eigenvector
    // alignment with the all-ones direction.
    double best_distance = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < k; ++i)
        best_distance = std::min(best_distance, std::abs(out.eigenvalues[i] - 1.0));
    double best_alignment = -1.0;
    for (Eigen::Index i = 0; i < k; ++i) {
        if (std::abs(out.eigenvalues[i] - 1.0) > best_distance + kUnitTieTol) continue;
        const auto v = solver.eigenvectors().col(i);
        const double alignment = std::abs(v.sum()) / (v.norm() * std::sqrt(double(k)));
        if (alignment > best_alignment) {
            best_alignment = alignment;
            out.unit_index = i;
        }
    }

    // Minimal real part among the remaining eigenvalues; nu counts the
    // cluster with that real part (algebraic multiplicity).
    double min_re = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < k; ++i) {
        if (i == out.unit_index) continue;
        min_re = std::min(min_re, out.eigenvalues[i].real());
    }
    out.nu = 0;
    out.lambda_s = {min_re, 0.0};
    double best_im = -std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < k; ++i) {
        if (i == out.unit_index) continue;
        const auto lam = out.eigenvalues[i];
        if (lam.real() <= min_re + kClusterTol) {
            ++out.nu;
            if (lam.imag() > best_im) {
                best_im = lam.imag();
                out.lambda_s = lam;
            }
        }
    }

    out.rho_unclipped = 1.0 - out.slope * out.lambda_s.real();
    out.rho = std::max(0.0, out.rho_unclipped);

    out.jacobian_eigenvalues.resize(k);
    out.jacobian_eigenvalues[0] = {-1.0, 0.0};
    Eigen::Index at = 1;
    for (Eigen::Index i = 0; i < k; ++i) {
        if (i == out.unit_index) continue;
        out.jacobian_eigenvalues[at++] = out.slope * out.eigenvalues[i] - 1.0;
    }
    return out;
}

StabilityVerdict check_stability(const WeightFunction& w, const ReplacementMatrix& R) {
    const auto summary = spectral_summary(w, R);
    const Eigen::Index k = R.k();
    const double x = 1.0 / static_cast<double>(k);

    StabilityVerdict verdict;
    if (summary.slope == 0.0) {
        // Constant-like weight: every Jacobian eigenvalue is -1.
        verdict.stable = true;
        verdict.eigenvalue_condition = true;
        verdict.margin = std::numeric_limits<double>::infinity();
    } else {
        const double threshold = 1.0 / summary.slope;  // k w(1/k) / w'(1/k)
        double min_re = std::numeric_limits<double>::infinity();
        for (Eigen::Index i = 0; i < summary.eigenvalues.size(); ++i) {
            if (i == summary.unit_index) continue;
            min_re = std::min(min_re, summary.eigenvalues[i].real());
        }
        verdict.margin = min_re - threshold;
        verdict.stable = verdict.margin > 0.0;
        verdict.eigenvalue_condition = verdict.stable;
    }
    verdict.dimension_condition =
        static_cast<double>(k) > -w.deriv1(x) / w.eval(x);
    verdict.binding = verdict.dimension_condition ? StabilityVerdict::Binding::dimension
                                                  : StabilityVerdict::Binding::eigenvalue;
    return verdict;
}

ContractionVerdict check_contraction(const WeightFunction& w, const ReplacementMatrix& R) {
    const double k = static_cast<double>(R.k());
    const double sqrt_k = std::sqrt(k);
    const double lipschitz = w.lipschitz_bound();
    const double at_one = w.eval(1.0);
    const double at_uniform = w.eval(1.0 / k);

    ContractionVerdict verdict;
    verdict.factor = std::numeric_limits<double>::quiet_NaN();
    if (at_one > 0.0 && sqrt_k * at_one > 2.0 * lipschitz) {
        verdict.contraction = true;
        verdict.applied = ContractionVerdict::Case::lower_weight_bound;
        verdict.factor = lipschitz * (1.0 + sqrt_k) / (k * at_one);
    } else if (w.convex() && sqrt_k * at_uniform > 2.0 * lipschitz) {
        verdict.contraction = true;
        verdict.applied = ContractionVerdict::Case::convexity_bound;
        verdict.factor = lipschitz * (1.0 + sqrt_k) / (k * at_uniform);
    }
    return verdict;
}

FixedPointResult solve_fixed_point(const WeightFunction& w, const ReplacementMatrix& R,
                                   double tol, int max_iter, Vector start) {
    const Eigen::Index k = R.k();
    Vector y = start.size() == 0 ? uniform_vector(k) : std::move(start);

    FixedPointResult result;
    result.residual = std::numeric_limits<double>::infinity();
    for (int iter = 0; iter <= max_iter; ++iter) {
        const Vector image = mean_field_map(y, w, R);
        result.residual = (image - y).norm();
        result.iterations = iter;
        if (result.residual <= tol) {
            result.converged = true;
            break;
        }
        if (iter == max_iter) break;
        Vector candidate = image;
        if (candidate.minCoeff() < 0.0 || std::abs(candidate.sum() - 1.0) > 1e-12)
            candidate = y + 0.5 * (image - y);
        y = std::move(candidate);
    }
    result.y = y;
    result.y_tilde = selection_distribution(y, w);
    return result;
}

}  // namespace negurn
