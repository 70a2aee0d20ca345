#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "negurn/replacement_matrix.hpp"

#include "support.hpp"

#include <random>

using namespace negurn;

TEST_CASE("identity flags") {
    const auto R = validate_replacement_matrix(Matrix::Identity(2, 2));
    CHECK(R.row_stochastic());
    CHECK(R.doubly_stochastic());
    CHECK(R.normal_matrix());
    CHECK(R.identity());
    CHECK(R.permutation());
    CHECK_FALSE(R.uniform_mixing());
}

TEST_CASE("uniform mixing matrix J/k") {
    Matrix m(2, 2);
    m << 0.5, 0.5, 0.5, 0.5;
    const auto R = validate_replacement_matrix(m);
    CHECK(R.uniform_mixing());
    CHECK(R.doubly_stochastic());
    CHECK_FALSE(R.permutation());
}

TEST_CASE("row stochastic but not doubly stochastic") {
    Matrix m(2, 2);
    m << 1.0, 0.0, 0.5, 0.5;
    const auto R = validate_replacement_matrix(m);
    CHECK(R.row_stochastic());
    CHECK_FALSE(R.doubly_stochastic());  // column sums 1.5 and 0.5
}

TEST_CASE("balanced non-stochastic input is normalized") {
    Matrix m(2, 2);
    m << 2.0, 2.0, 1.0, 3.0;  // row sums 4
    const auto R = validate_replacement_matrix(m);
    CHECK(R.entries()(0, 0) == doctest::Approx(0.5));
    CHECK(R.entries()(1, 1) == doctest::Approx(0.75));
    CHECK(R.entries().rowwise().sum().isApproxToConstant(1.0, 1e-12));
}

TEST_CASE("unbalanced and negative inputs are rejected") {
    Matrix unbalanced(2, 2);
    unbalanced << 1.0, 0.0, 1.0, 1.0;
    CHECK_THROWS_WITH_AS(validate_replacement_matrix(unbalanced),
                         doctest::Contains("not balanced"), std::invalid_argument);

    Matrix negative(2, 2);
    negative << 1.5, -0.5, 0.5, 0.5;
    CHECK_THROWS_AS(validate_replacement_matrix(negative), std::invalid_argument);

    CHECK_THROWS_AS(validate_replacement_matrix(Matrix::Identity(1, 1)),
                    std::invalid_argument);
}

TEST_CASE("validation is idempotent") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 20; ++trial) {
        const auto k = 2 + static_cast<Eigen::Index>(trial % 5);
        const auto R = validate_replacement_matrix(testing::random_row_stochastic(k, rng));
        const auto again = validate_replacement_matrix(R.entries());
        CHECK((again.entries() - R.entries()).cwiseAbs().maxCoeff() == 0.0);
        CHECK(again.doubly_stochastic() == R.doubly_stochastic());
        CHECK(again.normal_matrix() == R.normal_matrix());
    }
}

TEST_CASE("anti-diagonal permutation classification") {
    const auto R = validate_replacement_matrix(testing::reversal_permutation(4));
    CHECK(R.permutation());
    CHECK(R.doubly_stochastic());
    CHECK(R.normal_matrix());
    CHECK_FALSE(R.identity());
}
