#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "negurn/asymptotics.hpp"

#include "support.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <random>

using namespace negurn;

namespace {

// Independent brute-force oracle: builds (I kron A + A kron I) vec(X) = vec(I)
// with explicit index loops and a different factorization.
Matrix lyapunov_oracle(const Matrix& a) {
    const Eigen::Index k = a.rows();
    Matrix system = Matrix::Zero(k * k, k * k);
    Vector rhs = Vector::Zero(k * k);
    // column-major vec: entry (i,j) of X sits at j*k + i
    for (Eigen::Index i = 0; i < k; ++i) {
        for (Eigen::Index j = 0; j < k; ++j) {
            const Eigen::Index row = j * k + i;
            rhs[row] = (i == j) ? 1.0 : 0.0;
            for (Eigen::Index m = 0; m < k; ++m) {
                system(row, j * k + m) += a(i, m);  // (A X)_{ij}
                system(row, m * k + i) += a(j, m);  // (X A^T)_{ij}
            }
        }
    }
    const Vector solution = system.fullPivLu().solve(rhs);
    return Eigen::Map<const Matrix>(solution.data(), k, k);
}

Matrix random_stable_matrix(Eigen::Index k, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> entry(-1.0, 1.0);
    Matrix m(k, k);
    for (Eigen::Index i = 0; i < k; ++i)
        for (Eigen::Index j = 0; j < k; ++j) m(i, j) = entry(rng);
    Eigen::EigenSolver<Matrix> solver(m, false);
    const double min_re = solver.eigenvalues().real().minCoeff();
    return m + (std::abs(min_re) + 0.3) * Matrix::Identity(k, k);
}

void check_symmetric_psd_with_ones_kernel(const Matrix& sigma) {
    CHECK((sigma - sigma.transpose()).cwiseAbs().maxCoeff() <= 1e-10);
    Eigen::SelfAdjointEigenSolver<Matrix> solver(sigma);
    CHECK(solver.eigenvalues().minCoeff() >= -1e-10);
    CHECK((sigma * Vector::Ones(sigma.rows())).cwiseAbs().maxCoeff() <= 1e-8);
}

}  // namespace

TEST_CASE("lyapunov solver") {
    SUBCASE("A = I/2 has solution I") {
        const Matrix lambda = solve_lyapunov(0.5 * Matrix::Identity(3, 3));
        CHECK((lambda - Matrix::Identity(3, 3)).cwiseAbs().maxCoeff() <= 1e-12);
    }
    SUBCASE("agrees with the brute-force oracle on random stable matrices") {
        std::mt19937_64 rng(77);
        for (int trial = 0; trial < 40; ++trial) {
            const Eigen::Index k = 2 + trial % 5;  // up to 6
            const Matrix a = random_stable_matrix(k, rng);
            const Matrix lambda = solve_lyapunov(a);
            CHECK((a * lambda + lambda * a.transpose() - Matrix::Identity(k, k))
                      .cwiseAbs()
                      .maxCoeff() <= 1e-10);
            CHECK((lambda - lyapunov_oracle(a)).cwiseAbs().maxCoeff() <= 1e-10);
            CHECK((lambda - lambda.transpose()).cwiseAbs().maxCoeff() <= 1e-12);
        }
    }
    SUBCASE("left-half-plane spectrum is rejected") {
        Matrix a = -0.2 * Matrix::Identity(2, 2);
        CHECK_THROWS_WITH_AS(solve_lyapunov(a), doctest::Contains("rho <= 1/2"),
                             std::runtime_error);
    }
}

TEST_CASE("sqrt(n) covariances") {
    SUBCASE("Polya closed form for every family and k in 2..8") {
        for (Eigen::Index k = 2; k <= 8; ++k) {
            const auto R = validate_replacement_matrix(Matrix::Identity(k, k));
            for (const auto& w :
                 {WeightFunction::linear(1.0), WeightFunction::inverse_power(0.6, 1.4),
                  WeightFunction::exponential(0.9), WeightFunction::constant(2.0)}) {
                const double b = drift_slope(w, k);
                const auto cov = sqrt_n_covariance(w, R);
                const double kd = static_cast<double>(k);
                const Matrix expected =
                    (Matrix::Identity(k, k) - ones_matrix(k) / kd) / (kd * (1.0 - 2.0 * b));
                CHECK((cov.sigma - expected).cwiseAbs().maxCoeff() <= 1e-10);
                CHECK((cov.sigma_tilde - expected).cwiseAbs().maxCoeff() <= 1e-10);
            }
        }
    }
    SUBCASE("k=2 linear theta=1 Polya urn: Sigma = (1/12)[[1,-1],[-1,1]]") {
        const auto cov = sqrt_n_covariance(WeightFunction::linear(1.0),
                                           validate_replacement_matrix(Matrix::Identity(2, 2)));
        Matrix expected(2, 2);
        expected << 1.0, -1.0, -1.0, 1.0;
        expected /= 12.0;
        CHECK((cov.sigma - expected).cwiseAbs().maxCoeff() <= 1e-12);
    }
    SUBCASE("constant weight reduces to the multinomial covariance") {
        std::mt19937_64 rng(78);
        const auto R = validate_replacement_matrix(testing::random_doubly_stochastic(3, rng));
        const auto cov = sqrt_n_covariance(WeightFunction::constant(1.0), R);
        const Matrix gamma_tilde = simplex_tangent_projector(3) / 3.0;
        CHECK((cov.sigma_tilde - gamma_tilde).cwiseAbs().maxCoeff() <= 1e-10);
        CHECK((cov.sigma - R.entries().transpose() * gamma_tilde * R.entries())
                  .cwiseAbs()
                  .maxCoeff() <= 1e-10);
    }
    SUBCASE("normal replacement: closed form agrees with the Lyapunov route") {
        std::mt19937_64 rng(79);
        for (int trial = 0; trial < 10; ++trial) {
            const Eigen::Index k = 2 + trial % 4;
            const Matrix m = testing::random_doubly_stochastic(k, rng);
            const Matrix sym = 0.5 * (m + m.transpose());  // symmetric, hence normal
            const auto R = validate_replacement_matrix(sym);
            REQUIRE(R.normal_matrix());
            const auto cov = sqrt_n_covariance(WeightFunction::exponential(0.8), R);
            CHECK(cov.used_closed_form);
            CHECK(cov.closed_form_gap <= 1e-8);
        }
    }
    SUBCASE("covariances are symmetric PSD with the all-ones kernel") {
        std::mt19937_64 rng(80);
        for (int trial = 0; trial < 10; ++trial) {
            const Eigen::Index k = 2 + trial % 5;
            const auto R =
                validate_replacement_matrix(testing::random_doubly_stochastic(k, rng));
            const auto cov = sqrt_n_covariance(WeightFunction::inverse_power(1.0, 1.0), R);
            check_symmetric_psd_with_ones_kernel(cov.sigma);
            check_symmetric_psd_with_ones_kernel(cov.sigma_tilde);
        }
    }
    SUBCASE("regime mismatch is rejected") {
        // Swap matrix with linear theta=1.5 sits exactly at rho = 1/2.
        const auto R = validate_replacement_matrix(testing::reversal_permutation(2));
        CHECK_THROWS_WITH_AS(sqrt_n_covariance(WeightFunction::linear(1.5), R),
                             doctest::Contains("regime mismatch"), std::runtime_error);
    }
}

TEST_CASE("critical covariances") {
    const auto R = validate_replacement_matrix(testing::reversal_permutation(2));
    const auto w = WeightFunction::linear(1.5);  // b = -1/2, lambda_s = -1, rho = 1/2

    SUBCASE("spectral value in the swap case") {
        const auto cov = critical_covariance(w, R);
        Matrix expected_lambda(2, 2);
        expected_lambda << 0.5, -0.5, -0.5, 0.5;
        CHECK((cov.lambda - expected_lambda).cwiseAbs().maxCoeff() <= 1e-6);
        CHECK((cov.sigma_tilde - 0.5 * expected_lambda).cwiseAbs().maxCoeff() <= 1e-6);
        // R^T Lambda R = lambda_s^2 Lambda, so sigma = sigma_tilde here.
        CHECK((cov.sigma - cov.sigma_tilde).cwiseAbs().maxCoeff() <= 1e-9);
        CHECK(cov.converged);

        check_symmetric_psd_with_ones_kernel(cov.sigma);
        check_symmetric_psd_with_ones_kernel(cov.sigma_tilde);
    }
    SUBCASE("successive horizon estimates settle monotonically") {
        const auto cov = critical_covariance(w, R);
        REQUIRE(cov.successive_gaps.size() >= 2);
        for (std::size_t i = 1; i < cov.successive_gaps.size(); ++i)
            CHECK(cov.successive_gaps[i] <= cov.successive_gaps[i - 1] + 1e-3);
        // The decaying direction vanishes after normalization: the uniform
        // eigenvector entry of the extrapolated Lambda is ~0.
        Vector ones_dir = Vector::Ones(2) / std::sqrt(2.0);
        CHECK(std::abs(ones_dir.dot(cov.lambda * ones_dir)) <= 1e-6);
    }
    SUBCASE("regime mismatch is rejected") {
        CHECK_THROWS_WITH_AS(critical_covariance(WeightFunction::linear(2.0), R),
                             doctest::Contains("regime mismatch"), std::runtime_error);
    }
}

TEST_CASE("regime classification") {
    SUBCASE("k=2 linear boundary sweep at theta=1") {
        // rho >= 1/2 iff 2p - 1 >= (1 - 2 theta)/2 = -1/2, i.e. p >= 0.25;
        // p = 0 drives rho all the way to 0.
        for (double p : {0.0, 0.0625, 0.125, 0.25, 0.375, 0.5, 0.75}) {
            Matrix r(2, 2);
            r << p, 1 - p, 1 - p, p;
            const auto report =
                classify_regime(WeightFunction::linear(1.0), validate_replacement_matrix(r));
            if (p == 0.0)
                CHECK(report.regime == Regime::degenerate);
            else if (p < 0.25)
                CHECK(report.regime == Regime::slow);
            else if (p == 0.25)
                CHECK(report.regime == Regime::clt_sqrt_n_over_log);
            else
                CHECK(report.regime == Regime::clt_sqrt_n);
        }
    }
    SUBCASE("slow regime example: p = 0.125, theta = 1") {
        Matrix r(2, 2);
        r << 0.125, 0.875, 0.875, 0.125;
        const auto report =
            classify_regime(WeightFunction::linear(1.0), validate_replacement_matrix(r));
        CHECK(report.regime == Regime::slow);
        CHECK(report.spectral.rho == doctest::Approx(0.25).epsilon(1e-12));
        CHECK(report.spectral.nu == 1);
        // scaling n^rho with nu = 1
        CHECK(report.scaling_factor(1e4) == doctest::Approx(std::pow(1e4, 0.25)).epsilon(1e-12));
        bool flagged = false;
        for (const auto& note : report.notes)
            flagged = flagged || note.find("no Gaussian limit") != std::string::npos;
        CHECK(flagged);
    }
    SUBCASE("k >= 3 linear weights never fall below rho = 1/2") {
        std::mt19937_64 rng(81);
        for (int trial = 0; trial < 20; ++trial) {
            const Eigen::Index k = 3 + trial % 4;
            const auto R =
                validate_replacement_matrix(testing::random_doubly_stochastic(k, rng));
            const auto summary = spectral_summary(WeightFunction::linear(1.0 + trial * 0.1), R);
            CHECK(summary.rho >= 0.5 - 1e-9);
        }
    }
    SUBCASE("unstable permutation case is degenerate with rho = 0") {
        const auto report = classify_regime(WeightFunction::inverse_power(0.25, 4.0),
                                            validate_replacement_matrix(
                                                testing::reversal_permutation(4)));
        CHECK(report.regime == Regime::degenerate);
        CHECK(report.spectral.rho == 0.0);
        CHECK_FALSE(report.stability.stable);
        CHECK_FALSE(report.a2_verified);
        CHECK(report.scaling_factor(1e6) == 1.0);
    }
    SUBCASE("critical scaling uses sqrt(n)/sqrt(log n) when nu = 1") {
        const auto report = classify_regime(WeightFunction::linear(1.5),
                                            validate_replacement_matrix(
                                                testing::reversal_permutation(2)));
        REQUIRE(report.regime == Regime::clt_sqrt_n_over_log);
        const double n = 1e6;
        CHECK(report.scaling_factor(n) ==
              doctest::Approx(std::sqrt(n / std::log(n))).epsilon(1e-12));
        REQUIRE(report.critical.has_value());
    }
    SUBCASE("gamma matrices") {
        std::mt19937_64 rng(82);
        const auto R = validate_replacement_matrix(testing::random_doubly_stochastic(3, rng));
        const auto report = classify_regime(WeightFunction::constant(1.0), R);
        const Matrix expected_tilde = simplex_tangent_projector(3) / 3.0;
        CHECK((report.gamma_tilde - expected_tilde).cwiseAbs().maxCoeff() <= 1e-14);
        CHECK((report.gamma - R.entries().transpose() * expected_tilde * R.entries())
                  .cwiseAbs()
                  .maxCoeff() <= 1e-14);
    }
    SUBCASE("non doubly stochastic replacements carry the A2 marker and no covariances") {
        Matrix r(2, 2);
        r << 1.0, 0.0, 0.5, 0.5;
        const auto report =
            classify_regime(WeightFunction::linear(3.0), validate_replacement_matrix(r));
        CHECK_FALSE(report.a2_verified);
        CHECK(report.sigma() == nullptr);
        CHECK(report.contraction.contraction);
        CHECK((report.y_limit[0] == doctest::Approx(8.0 / 11.0).epsilon(1e-10)));
        bool marked = false;
        for (const auto& note : report.notes)
            marked = marked || note.find("A2 unverified") != std::string::npos;
        CHECK(marked);
    }
}
