#include "negurn/montecarlo.hpp"

#include "negurn/stats.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <mutex>
#include <stdexcept>
#include <thread>

namespace negurn {

namespace {

const double kNaN = std::numeric_limits<double>::quiet_NaN();

Vector pairwise_mean_rows(const Matrix& rows) {
    const auto n = static_cast<std::size_t>(rows.rows());
    Vector total = pairwise_sum<Vector>(0, n, [&](std::size_t r) -> Vector {
        return rows.row(static_cast<Eigen::Index>(r)).transpose();
    });
    return total / static_cast<double>(n);
}

double pairwise_mean_distance(const Matrix& rows, const Vector& target) {
    const auto n = static_cast<std::size_t>(rows.rows());
    const double total = pairwise_sum<double>(0, n, [&](std::size_t r) {
        return (rows.row(static_cast<Eigen::Index>(r)).transpose() - target).norm();
    });
    return total / static_cast<double>(n);
}

// Sample covariance of scaled deviations s * (row - target), about the
// sample mean, pairwise-accumulated.
Matrix scaled_sample_covariance(const Matrix& rows, const Vector& target, double scale) {
    const auto n = static_cast<std::size_t>(rows.rows());
    const Eigen::Index k = rows.cols();
    if (n < 2) return Matrix::Zero(k, k);
    const Vector mean = pairwise_mean_rows(rows);
    const Matrix total = pairwise_sum<Matrix>(0, n, [&](std::size_t r) -> Matrix {
        const Vector d = rows.row(static_cast<Eigen::Index>(r)).transpose() - mean;
        return d * d.transpose();
    });
    return total * (scale * scale / static_cast<double>(n - 1));
}

Vector per_coordinate_ks(const Matrix& rows, const Vector& target, double scale,
                         const Matrix& sigma_pred) {
    const Eigen::Index k = rows.cols();
    Vector ks = Vector::Constant(k, kNaN);
    for (Eigen::Index j = 0; j < k; ++j) {
        const double var = sigma_pred(j, j);
        if (!(var > 0.0)) continue;
        const double inv_sd = 1.0 / std::sqrt(var);
        std::vector<double> standardized(static_cast<std::size_t>(rows.rows()));
        for (Eigen::Index r = 0; r < rows.rows(); ++r)
            standardized[static_cast<std::size_t>(r)] =
                scale * (rows(r, j) - target[j]) * inv_sd;
        ks[j] = ks_statistic(std::move(standardized), normal_cdf);
    }
    return ks;
}

// Pseudo-inverse of the prediction restricted to the simplex tangent space.
Matrix tangent_pseudo_inverse(const Matrix& sigma, Eigen::Index expected_rank) {
    const Eigen::Index k = sigma.rows();
    const Matrix projector = simplex_tangent_projector(k);
    const Matrix projected = projector * sigma * projector;
    Eigen::SelfAdjointEigenSolver<Matrix> solver(projected);
    const Vector values = solver.eigenvalues();
    const double cutoff = 1e-12 * std::max(values.cwiseAbs().maxCoeff(), 1e-300);
    Eigen::Index rank = 0;
    Matrix inv = Matrix::Zero(k, k);
    for (Eigen::Index i = 0; i < k; ++i) {
        if (values[i] > cutoff) {
            inv += solver.eigenvectors().col(i) * solver.eigenvectors().col(i).transpose() /
                   values[i];
            ++rank;
        }
    }
    if (rank < expected_rank)
        throw std::runtime_error("singular covariance prediction beyond the simplex kernel");
    return inv;
}

}  // namespace

EnsembleSummary run_ensemble(const ExperimentConfig& config, const AsymptoticReport& report,
                             int threads) {
    const Eigen::Index k = config.k();
    const int replicas = config.replicas;
    const auto n_checkpoints = config.checkpoints.size();

    EnsembleSummary summary{config};
    summary.replicas = replicas;
    summary.base_seed = config.seed;
    summary.y_limit = report.y_limit;
    summary.y_tilde_limit = report.y_tilde_limit;
    summary.regime = report.regime;
    summary.rho = report.spectral.rho;
    summary.nu = report.spectral.nu;
    summary.a2_verified = report.a2_verified;
    summary.notes = report.notes;
    if (report.regime == Regime::clt_sqrt_n_over_log)
        summary.notes.push_back(
            "critical regime: log-factor corrections converge slowly; use large n and loose "
            "covariance tolerances");

    summary.replica_seeds.resize(replicas);
    for (int r = 0; r < replicas; ++r)
        summary.replica_seeds[r] = derive_stream_seed(config.seed, static_cast<std::uint64_t>(r));

    std::vector<Matrix> ys(n_checkpoints, Matrix(replicas, k));
    std::vector<Matrix> ytildes(n_checkpoints, Matrix(replicas, k));
    std::vector<double> mass_residuals(replicas), linear_residuals(replicas),
        martingale_norms(replicas);
    std::vector<char> accounting_flags(replicas, 0);

    if (threads <= 0)
        threads = std::max(1u, std::thread::hardware_concurrency());
    threads = std::min<int>(threads, replicas);

    std::atomic<int> next_replica{0};
    std::string failure;
    std::mutex failure_mutex;
    auto worker = [&]() {
        for (;;) {
            const int r = next_replica.fetch_add(1);
            if (r >= replicas) return;
            try {
                const Trajectory traj = run_trajectory(config, summary.replica_seeds[r]);
                for (std::size_t c = 0; c < n_checkpoints; ++c) {
                    ys[c].row(r) = traj.checkpoints[c].proportions.transpose();
                    ytildes[c].row(r) = traj.checkpoints[c].count_proportions.transpose();
                }
                const AccountingReport acc = verify_accounting(traj);
                mass_residuals[r] = acc.mass_residual;
                linear_residuals[r] = acc.linear_residual;
                martingale_norms[r] = acc.martingale_norm2_max;
                accounting_flags[r] = acc.all_ok() ? 1 : 0;
            } catch (const std::exception& e) {
                std::lock_guard<std::mutex> lock(failure_mutex);
                if (failure.empty())
                    failure = "replica with seed " + std::to_string(summary.replica_seeds[r]) +
                              " failed: " + e.what();
                return;
            }
        }
    };

    if (threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(threads);
        for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    if (!failure.empty()) throw std::runtime_error(failure);

    summary.max_mass_residual = *std::max_element(mass_residuals.begin(), mass_residuals.end());
    summary.max_linear_residual =
        *std::max_element(linear_residuals.begin(), linear_residuals.end());
    summary.max_martingale_norm2 =
        *std::max_element(martingale_norms.begin(), martingale_norms.end());
    summary.accounting_ok =
        std::all_of(accounting_flags.begin(), accounting_flags.end(), [](char f) { return f; });

    const Matrix* sigma = report.sigma();
    const Matrix* sigma_tilde = report.sigma_tilde();

    summary.checkpoints.resize(n_checkpoints);
    for (std::size_t c = 0; c < n_checkpoints; ++c) {
        CheckpointStats& stats = summary.checkpoints[c];
        stats.n = config.checkpoints[c];
        stats.scaling = report.scaling_factor(static_cast<double>(stats.n));
        stats.mean_y = pairwise_mean_rows(ys[c]);
        stats.mean_dist = pairwise_mean_distance(ys[c], summary.y_limit);
        stats.cov_scaled_y = scaled_sample_covariance(ys[c], summary.y_limit, stats.scaling);
        stats.ks_y = sigma ? per_coordinate_ks(ys[c], summary.y_limit, stats.scaling, *sigma)
                           : Vector::Constant(k, kNaN);
        if (stats.n >= 1) {
            stats.mean_y_tilde = pairwise_mean_rows(ytildes[c]);
            stats.mean_dist_tilde = pairwise_mean_distance(ytildes[c], summary.y_tilde_limit);
            stats.cov_scaled_y_tilde =
                scaled_sample_covariance(ytildes[c], summary.y_tilde_limit, stats.scaling);
            stats.ks_y_tilde =
                sigma_tilde ? per_coordinate_ks(ytildes[c], summary.y_tilde_limit,
                                                stats.scaling, *sigma_tilde)
                            : Vector::Constant(k, kNaN);
        } else {
            stats.mean_y_tilde = Vector::Constant(k, kNaN);
            stats.mean_dist_tilde = kNaN;
            stats.cov_scaled_y_tilde = Matrix::Constant(k, k, kNaN);
            stats.ks_y_tilde = Vector::Constant(k, kNaN);
        }
    }

    summary.final_y = ys.back();
    summary.final_y_tilde = ytildes.back();

    if (sigma) {
        try {
            const double scale = summary.checkpoints.back().scaling;
            const Matrix inv = tangent_pseudo_inverse(*sigma, k - 1);
            const Matrix projector = simplex_tangent_projector(k);
            std::vector<double> d2(replicas);
            for (int r = 0; r < replicas; ++r) {
                const Vector z = projector * (scale * (summary.final_y.row(r).transpose() -
                                                       summary.y_limit));
                d2[r] = z.dot(inv * z);
            }
            summary.mahalanobis_levels = {0.5, 0.9, 0.95, 0.99};
            for (double level : summary.mahalanobis_levels) {
                const double q = chi_squared_quantile(level, static_cast<double>(k - 1));
                const auto exceed = std::count_if(d2.begin(), d2.end(),
                                                  [q](double v) { return v > q; });
                summary.mahalanobis_fractions.push_back(static_cast<double>(exceed) /
                                                        replicas);
            }
        } catch (const std::exception& e) {
            summary.notes.push_back(std::string("Mahalanobis check skipped: ") + e.what());
        }
    }
    return summary;
}

ConvergenceDiagnostic convergence_diagnostic(const EnsembleSummary& summary,
                                             const Vector& y_limit, double epsilon) {
    if (summary.checkpoints.size() < 3)
        throw std::invalid_argument("convergence diagnostic: at least 3 checkpoints required");

    ConvergenceDiagnostic diag;
    for (const auto& cp : summary.checkpoints)
        diag.mean_distances.emplace_back(cp.n, cp.mean_dist);
    diag.final_mean_distance = summary.checkpoints.back().mean_dist;

    int within = 0;
    for (Eigen::Index r = 0; r < summary.final_y.rows(); ++r)
        if ((summary.final_y.row(r).transpose() - y_limit).norm() < epsilon) ++within;
    diag.fraction_within = static_cast<double>(within) / summary.final_y.rows();

    int decreasing = 0, pairs = 0, late_decreasing = 0, late_pairs = 0;
    const auto late_from = summary.config.n_max / 10;
    for (std::size_t i = 1; i < summary.checkpoints.size(); ++i) {
        const bool drop =
            summary.checkpoints[i].mean_dist < summary.checkpoints[i - 1].mean_dist;
        ++pairs;
        decreasing += drop;
        if (summary.checkpoints[i - 1].n >= late_from) {
            ++late_pairs;
            late_decreasing += drop;
        }
    }
    diag.monotonicity_score = pairs ? static_cast<double>(decreasing) / pairs : 0.0;
    diag.last_decade_decreasing =
        late_pairs ? static_cast<double>(late_decreasing) / late_pairs : 0.0;
    return diag;
}

CltDiagnostic clt_diagnostic(const EnsembleSummary& summary, const Matrix& sigma_pred,
                             DeviationSeries series, double covariance_threshold,
                             double ks_threshold) {
    const Eigen::Index k = summary.config.k();
    const bool tilde = series == DeviationSeries::count_proportions;
    const Matrix& rows = tilde ? summary.final_y_tilde : summary.final_y;
    const Vector& target = tilde ? summary.y_tilde_limit : summary.y_limit;
    const double scale = summary.checkpoints.back().scaling;

    // Fails fast when the prediction is singular beyond the all-ones kernel.
    const Matrix pseudo_inverse = tangent_pseudo_inverse(sigma_pred, k - 1);

    CltDiagnostic diag;
    diag.covariance_threshold = covariance_threshold;
    diag.ks_threshold = ks_threshold;

    const Matrix projector = simplex_tangent_projector(k);
    const Matrix sample_cov = scaled_sample_covariance(rows, target, scale);
    const Matrix sample_t = projector * sample_cov * projector;
    const Matrix pred_t = projector * sigma_pred * projector;
    diag.covariance_rel_error = (sample_t - pred_t).norm() / pred_t.norm();
    diag.covariance_pass = diag.covariance_rel_error <= covariance_threshold;

    diag.ks = per_coordinate_ks(rows, target, scale, sigma_pred);
    diag.max_ks = 0.0;
    for (Eigen::Index j = 0; j < k; ++j)
        if (std::isfinite(diag.ks[j])) diag.max_ks = std::max(diag.max_ks, diag.ks[j]);
    diag.ks_pass = ks_threshold <= 0.0 || diag.max_ks <= ks_threshold;

    const Vector mean = pairwise_mean_rows(rows);
    diag.mean_scaled_norm = (scale * (mean - target)).norm();
    diag.mean_norm_bound =
        4.0 * std::sqrt(sigma_pred.trace() / static_cast<double>(summary.replicas));

    diag.mahalanobis_levels = {0.5, 0.9, 0.95, 0.99};
    std::vector<double> d2(static_cast<std::size_t>(rows.rows()));
    for (Eigen::Index r = 0; r < rows.rows(); ++r) {
        const Vector z = projector * (scale * (rows.row(r).transpose() - target));
        d2[static_cast<std::size_t>(r)] = z.dot(pseudo_inverse * z);
    }
    for (double level : diag.mahalanobis_levels) {
        const double q = chi_squared_quantile(level, static_cast<double>(k - 1));
        const auto exceed =
            std::count_if(d2.begin(), d2.end(), [q](double v) { return v > q; });
        diag.mahalanobis_fractions.push_back(static_cast<double>(exceed) /
                                             static_cast<double>(rows.rows()));
    }
    return diag;
}

}  // namespace negurn
