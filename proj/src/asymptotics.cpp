#include "negurn/asymptotics.hpp"

#include "negurn/matrix_functions.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <stdexcept>

namespace negurn {

namespace {

constexpr double kLyapunovResidualTol = 1e-10;

double regime_tolerance(const SpectralSummary& summary) {
    // Finite-difference derivatives soften the regime boundary.
    return summary.derivative_approximate ? 1e-5 : 1e-9;
}

Matrix symmetrized(const Matrix& m) { return 0.5 * (m + m.transpose()); }

// Adaptive Simpson on a matrix-valued integrand, max-norm error control.
template <typename F>
Matrix simpson_recurse(const F& f, double a, double b, const Matrix& fa, const Matrix& fm,
                       const Matrix& fb, const Matrix& whole, double tol, int depth) {
    const double m = 0.5 * (a + b);
    const Matrix flm = f(0.5 * (a + m));
    const Matrix frm = f(0.5 * (m + b));
    const Matrix left = ((m - a) / 6.0) * (fa + 4.0 * flm + fm);
    const Matrix right = ((b - m) / 6.0) * (fm + 4.0 * frm + fb);
    const Matrix refined = left + right;
    const double err = (refined - whole).cwiseAbs().maxCoeff();
    if (depth <= 0 || err <= 15.0 * tol) return refined + (refined - whole) / 15.0;
    return simpson_recurse(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           simpson_recurse(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

template <typename F>
Matrix adaptive_simpson(const F& f, double a, double b, double tol) {
    const Matrix fa = f(a);
    const Matrix fm = f(0.5 * (a + b));
    const Matrix fb = f(b);
    const Matrix whole = ((b - a) / 6.0) * (fa + 4.0 * fm + fb);
    return simpson_recurse(f, a, b, fa, fm, fb, whole, tol, 48);
}

}  // namespace

Matrix solve_lyapunov(const Eigen::Ref<const Matrix>& a) {
    const Eigen::Index k = a.rows();
    if (a.cols() != k) throw std::invalid_argument("Lyapunov: square input required");

    Eigen::EigenSolver<Matrix> solver(a, false);
    if (solver.info() != Eigen::Success)
        throw std::runtime_error("Lyapunov: eigensolver failed");
    if (solver.eigenvalues().real().minCoeff() <= 0.0)
        throw std::runtime_error("Lyapunov unstable: rho <= 1/2");

    const Matrix identity = Matrix::Identity(k, k);
    const Matrix system = kronecker_product(identity, a) + kronecker_product(a, identity);
    Vector rhs(k * k);
    Eigen::Map<Matrix>(rhs.data(), k, k) = identity;
    const Vector solution = system.partialPivLu().solve(rhs);
    Matrix lambda = Eigen::Map<const Matrix>(solution.data(), k, k);
    lambda = symmetrized(lambda);

    const double residual =
        (a * lambda + lambda * a.transpose() - identity).cwiseAbs().maxCoeff();
    if (residual > kLyapunovResidualTol)
        throw std::runtime_error("Lyapunov: residual " + std::to_string(residual) +
                                 " exceeds tolerance");
    return lambda;
}

CovarianceSqrtN sqrt_n_covariance(const WeightFunction& w, const ReplacementMatrix& R) {
    const auto summary = spectral_summary(w, R);
    if (summary.rho <= 0.5 + regime_tolerance(summary))
        throw std::runtime_error("regime mismatch: rho <= 1/2");

    const Eigen::Index k = R.k();
    const double b = summary.slope;
    const Matrix identity = Matrix::Identity(k, k);

    CovarianceSqrtN out;
    out.lambda = solve_lyapunov(0.5 * identity - b * R.entries().transpose());
    if (R.normal_matrix()) {
        const Matrix closed =
            (identity - b * (R.entries() + R.entries().transpose())).inverse();
        out.closed_form_gap = (closed - out.lambda).cwiseAbs().maxCoeff();
        out.lambda = symmetrized(closed);
        out.used_closed_form = true;
    }

    const double kd = static_cast<double>(k);
    out.sigma_tilde =
        symmetrized((out.lambda - ones_matrix(k) / (kd * (1.0 - 2.0 * b))) / kd);
    out.sigma = symmetrized(R.entries().transpose() * out.sigma_tilde * R.entries());
    return out;
}

CovarianceCritical critical_covariance(const WeightFunction& w, const ReplacementMatrix& R,
                                       std::vector<double> horizons) {
    const auto summary = spectral_summary(w, R);
    if (std::abs(summary.rho - 0.5) > regime_tolerance(summary))
        throw std::runtime_error("regime mismatch: rho != 1/2");

    if (horizons.empty())
        horizons = {std::log(1e4), std::log(1e6), std::log(1e8), std::log(1e12)};

    const double b = summary.slope;
    const Matrix& r = R.entries();
    const auto integrand = [&](double u) -> Matrix {
        const Matrix e = matrix_exponential((b * u) * r);
        return std::exp(-u) * (e.transpose() * e);
    };

    CovarianceCritical out;
    out.horizons = horizons;
    const double norm_power = 2.0 * summary.nu - 1.0;
    Matrix integral = Matrix::Zero(R.k(), R.k());
    double from = 0.0;
    for (double horizon : horizons) {
        integral += adaptive_simpson(integrand, from, horizon, 1e-10);
        from = horizon;
        out.estimates.push_back(integral / std::pow(horizon, norm_power));
    }
    for (std::size_t i = 1; i < out.estimates.size(); ++i)
        out.successive_gaps.push_back(
            (out.estimates[i] - out.estimates[i - 1]).cwiseAbs().maxCoeff());

    // Richardson step for the 1/T transient: the limit of L + C/T from the
    // two largest horizons.
    const std::size_t last = out.estimates.size() - 1;
    if (last >= 1) {
        const double t1 = horizons[last - 1], t2 = horizons[last];
        out.lambda =
            symmetrized((t2 * out.estimates[last] - t1 * out.estimates[last - 1]) / (t2 - t1));
    } else {
        out.lambda = symmetrized(out.estimates[last]);
    }
    out.extrapolation_gap = (out.lambda - out.estimates[last]).cwiseAbs().maxCoeff();

    out.converged = true;
    for (std::size_t i = 1; i < out.successive_gaps.size(); ++i)
        if (out.successive_gaps[i] > out.successive_gaps[i - 1] + 1e-3) out.converged = false;
    if (!out.successive_gaps.empty() && out.successive_gaps.back() > 5e-2)
        out.converged = false;

    const double kd = static_cast<double>(R.k());
    out.sigma_tilde = out.lambda / kd;
    out.sigma = symmetrized(r.transpose() * out.sigma_tilde * r);
    return out;
}

std::string regime_name(Regime regime) {
    switch (regime) {
        case Regime::clt_sqrt_n: return "clt_sqrt_n";
        case Regime::clt_sqrt_n_over_log: return "clt_sqrt_n_over_log";
        case Regime::slow: return "slow_regime";
        case Regime::degenerate: return "degenerate";
    }
    return "unknown";
}

double AsymptoticReport::scaling_factor(double n) const {
    const double safe_log = n >= 2.0 ? std::log(n) : 1.0;
    switch (regime) {
        case Regime::clt_sqrt_n: return std::sqrt(n);
        case Regime::clt_sqrt_n_over_log:
            return std::sqrt(n) / std::pow(safe_log, spectral.nu - 0.5);
        case Regime::slow:
            return std::pow(n, spectral.rho) / std::pow(safe_log, spectral.nu - 1.0);
        case Regime::degenerate: return 1.0;
    }
    return 1.0;
}

std::string AsymptoticReport::scaling_description() const {
    switch (regime) {
        case Regime::clt_sqrt_n: return "sqrt(n)";
        case Regime::clt_sqrt_n_over_log: return "sqrt(n)/log(n)^(nu-1/2)";
        case Regime::slow: return "n^rho/log(n)^(nu-1)";
        case Regime::degenerate: return "1";
    }
    return "1";
}

const Matrix* AsymptoticReport::sigma() const {
    if (sqrt_n) return &sqrt_n->sigma;
    if (critical) return &critical->sigma;
    return nullptr;
}

const Matrix* AsymptoticReport::sigma_tilde() const {
    if (sqrt_n) return &sqrt_n->sigma_tilde;
    if (critical) return &critical->sigma_tilde;
    return nullptr;
}

AsymptoticReport classify_regime(const WeightFunction& w, const ReplacementMatrix& R) {
    AsymptoticReport report;
    report.spectral = spectral_summary(w, R);
    report.stability = check_stability(w, R);
    report.contraction = check_contraction(w, R);
    report.fixed_point = solve_fixed_point(w, R, 1e-12, 20000);
    report.doubly_stochastic = R.doubly_stochastic();

    const Eigen::Index k = R.k();
    report.gamma_tilde = simplex_tangent_projector(k) / static_cast<double>(k);
    report.gamma = R.entries().transpose() * report.gamma_tilde * R.entries();

    const double tol = regime_tolerance(report.spectral);
    const double rho = report.spectral.rho;
    if (rho <= tol)
        report.regime = Regime::degenerate;
    else if (std::abs(rho - 0.5) <= tol)
        report.regime = Regime::clt_sqrt_n_over_log;
    else if (rho > 0.5)
        report.regime = Regime::clt_sqrt_n;
    else
        report.regime = Regime::slow;

    if (report.doubly_stochastic) {
        report.y_limit = uniform_vector(k);
        report.y_tilde_limit = uniform_vector(k);
    } else {
        report.y_limit = report.fixed_point.y;
        report.y_tilde_limit = report.fixed_point.y_tilde;
        report.notes.push_back(
            "replacement not doubly stochastic: limit taken from the fixed-point solve");
        if (!report.fixed_point.converged)
            report.notes.push_back("fixed-point iteration did not converge");
    }

    report.a2_verified = report.doubly_stochastic && report.stability.stable;
    if (!report.a2_verified) report.notes.push_back("A2 unverified");

    if (report.doubly_stochastic) {
        try {
            if (report.regime == Regime::clt_sqrt_n)
                report.sqrt_n = sqrt_n_covariance(w, R);
            else if (report.regime == Regime::clt_sqrt_n_over_log) {
                report.critical = critical_covariance(w, R);
                if (!report.critical->converged)
                    report.notes.push_back("critical covariance quadrature flagged non-convergent");
            }
        } catch (const std::exception& e) {
            report.notes.push_back(std::string("covariance computation failed: ") + e.what());
        }
    } else if (report.regime == Regime::clt_sqrt_n ||
               report.regime == Regime::clt_sqrt_n_over_log) {
        report.notes.push_back(
            "covariance predictions require a doubly stochastic replacement; none computed");
    }

    if (report.regime == Regime::slow)
        report.notes.push_back("no Gaussian limit computed");
    if (report.regime == Regime::degenerate)
        report.notes.push_back("rho = 0: no scaling limit computed");
    return report;
}

}  // namespace negurn
