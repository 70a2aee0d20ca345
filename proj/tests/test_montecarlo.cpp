#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "negurn/montecarlo.hpp"

#include "support.hpp"

#include <cmath>
#include <random>

using namespace negurn;

namespace {

ExperimentConfig config_of(WeightFunction w, Matrix r, std::int64_t n_max, int replicas,
                           std::uint64_t seed, Vector u0 = Vector()) {
    return make_config(std::move(w), validate_replacement_matrix(std::move(r)), n_max,
                       std::move(u0), {}, replicas, seed);
}

}  // namespace

TEST_CASE("single replica summary collapses to the trajectory") {
    auto config = config_of(WeightFunction::linear(2.0), Matrix::Identity(2, 2), 500, 1, 11);
    const auto report = classify_regime(config.weight, config.replacement);
    const auto summary = run_ensemble(config, report);
    const auto traj = run_trajectory(config, summary.replica_seeds[0]);

    REQUIRE(summary.checkpoints.size() == traj.checkpoints.size());
    for (std::size_t i = 0; i < traj.checkpoints.size(); ++i) {
        CHECK((summary.checkpoints[i].mean_y - traj.checkpoints[i].proportions)
                  .cwiseAbs()
                  .maxCoeff() == 0.0);
        CHECK(summary.checkpoints[i].cov_scaled_y.cwiseAbs().maxCoeff() == 0.0);
    }
    CHECK(summary.accounting_ok);
}

TEST_CASE("uniform mixing rule: deterministic distance decay, zero covariance") {
    Vector u0(3);
    u0 << 0.5, 0.3, 0.2;
    auto config =
        config_of(WeightFunction::exponential(0.5), Matrix::Constant(3, 3, 1.0 / 3.0), 1000,
                  8, 3, u0);
    const auto report = classify_regime(config.weight, config.replacement);
    const auto summary = run_ensemble(config, report);

    const double base = (u0 - uniform_vector(3)).norm();
    for (const auto& cp : summary.checkpoints) {
        CHECK(cp.mean_dist ==
              doctest::Approx(base / static_cast<double>(cp.n + 1)).epsilon(1e-12));
        // scaled deviations are identical across replicas
        CHECK(cp.cov_scaled_y.cwiseAbs().maxCoeff() <= 1e-18);
    }
}

TEST_CASE("summaries are deterministic and thread-count independent") {
    std::mt19937_64 rng(5);
    auto config = config_of(WeightFunction::inverse_power(0.7, 1.2),
                            testing::random_doubly_stochastic(3, rng), 2000, 16, 99);
    const auto report = classify_regime(config.weight, config.replacement);
    const auto one = run_ensemble(config, report, 1);
    const auto four = run_ensemble(config, report, 4);
    const auto again = run_ensemble(config, report, 1);

    REQUIRE(one.checkpoints.size() == four.checkpoints.size());
    for (std::size_t i = 0; i < one.checkpoints.size(); ++i) {
        CHECK((one.checkpoints[i].mean_y - four.checkpoints[i].mean_y).cwiseAbs().maxCoeff() ==
              0.0);
        CHECK((one.checkpoints[i].cov_scaled_y - four.checkpoints[i].cov_scaled_y)
                  .cwiseAbs()
                  .maxCoeff() == 0.0);
        CHECK(one.checkpoints[i].mean_dist == again.checkpoints[i].mean_dist);
    }
    CHECK((one.final_y - four.final_y).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("Polya smoke test against the predicted variance") {
    auto config = config_of(WeightFunction::linear(1.0), Matrix::Identity(2, 2), 10000, 400, 7);
    const auto report = classify_regime(config.weight, config.replacement);
    REQUIRE(report.regime == Regime::clt_sqrt_n);
    REQUIRE(report.sqrt_n.has_value());

    const auto summary = run_ensemble(config, report);
    const auto diag = clt_diagnostic(summary, report.sqrt_n->sigma,
                                     DeviationSeries::proportions, 0.30, 0.10);
    CHECK(diag.covariance_pass);
    CHECK(diag.ks_pass);
    CHECK(diag.mean_scaled_norm <= diag.mean_norm_bound);

    const auto tilde = clt_diagnostic(summary, report.sqrt_n->sigma_tilde,
                                      DeviationSeries::count_proportions, 0.30, 0.10);
    CHECK(tilde.covariance_pass);
    CHECK(tilde.ks_pass);
}

TEST_CASE("constant weight on identity recovers the multinomial CLT") {
    const Eigen::Index k = 3;
    const std::int64_t horizon = 20000;
    const int replicas = 400;
    auto config =
        config_of(WeightFunction::constant(1.0), Matrix::Identity(k, k), horizon, replicas, 19);
    const auto report = classify_regime(config.weight, config.replacement);
    REQUIRE(report.sqrt_n.has_value());
    const Matrix sigma_pred = report.sqrt_n->sigma;

    // i.i.d. oracle: with constant weight the urn draws are uniform
    // multinomial samples, so simulate them directly.
    std::mt19937_64 rng(2027);
    std::uniform_int_distribution<int> colour(0, static_cast<int>(k) - 1);
    Matrix oracle_cov = Matrix::Zero(k, k);
    Matrix deviations(replicas, k);
    for (int r = 0; r < replicas; ++r) {
        Vector counts = Vector::Zero(k);
        for (std::int64_t i = 0; i < horizon; ++i) counts[colour(rng)] += 1.0;
        const Vector dev = std::sqrt(static_cast<double>(horizon)) *
                           (counts / static_cast<double>(horizon) - uniform_vector(k));
        deviations.row(r) = dev.transpose();
    }
    const Vector mean = deviations.colwise().mean().transpose();
    for (int r = 0; r < replicas; ++r) {
        const Vector d = deviations.row(r).transpose() - mean;
        oracle_cov += d * d.transpose();
    }
    oracle_cov /= replicas - 1;
    const Matrix projector = simplex_tangent_projector(k);
    const double oracle_err = ((projector * (oracle_cov - sigma_pred) * projector).norm()) /
                              (projector * sigma_pred * projector).norm();
    CHECK(oracle_err <= 0.30);

    // The urn ensemble matches the same prediction. (Y_n differs from the
    // multinomial proportion only through the U0 offset, vanishing at 1/n.)
    const auto summary = run_ensemble(config, report);
    const auto diag =
        clt_diagnostic(summary, sigma_pred, DeviationSeries::proportions, 0.30, 0.10);
    CHECK(diag.covariance_pass);
    CHECK(diag.ks_pass);
}

TEST_CASE("convergence diagnostic on a contracting scheme") {
    Matrix r(2, 2);
    r << 1.0, 0.0, 0.5, 0.5;
    auto config = config_of(WeightFunction::linear(3.0), r, 10000, 200, 23);
    const auto report = classify_regime(config.weight, config.replacement);
    REQUIRE(report.contraction.contraction);

    const auto summary = run_ensemble(config, report);
    const auto diag = convergence_diagnostic(summary, report.y_limit, 0.05);
    CHECK(diag.final_mean_distance <= 0.02);
    CHECK(diag.fraction_within == 1.0);
    CHECK(diag.monotonicity_score >= 0.6);

    // Count proportions approach their own limit as well.
    CHECK(summary.checkpoints.back().mean_dist_tilde <= 0.02);
}

TEST_CASE("diagnostic preconditions") {
    auto config = config_of(WeightFunction::linear(2.0), Matrix::Identity(2, 2), 1, 4, 2,
                            Vector());
    const auto report = classify_regime(config.weight, config.replacement);
    const auto summary = run_ensemble(config, report);
    CHECK_THROWS_AS(convergence_diagnostic(summary, report.y_limit, 0.1),
                    std::invalid_argument);  // only 2 checkpoints at n_max = 1

    auto config2 = config_of(WeightFunction::linear(2.0), Matrix::Identity(2, 2), 100, 4, 2);
    const auto report2 = classify_regime(config2.weight, config2.replacement);
    const auto summary2 = run_ensemble(config2, report2);
    CHECK_THROWS_WITH_AS(
        clt_diagnostic(summary2, Matrix::Zero(2, 2), DeviationSeries::proportions, 0.15, 0.05),
        doctest::Contains("singular"), std::runtime_error);
}
