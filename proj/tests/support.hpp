#pragma once

#include "negurn/replacement_matrix.hpp"
#include "negurn/types.hpp"

#include <algorithm>
#include <numeric>
#include <random>
#include <vector>

namespace negurn::testing {

inline Matrix random_row_stochastic(Eigen::Index k, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> uniform(0.05, 1.0);
    Matrix m(k, k);
    for (Eigen::Index i = 0; i < k; ++i) {
        for (Eigen::Index j = 0; j < k; ++j) m(i, j) = uniform(rng);
        m.row(i) /= m.row(i).sum();
    }
    return m;
}

/// Convex combination of random permutation matrices; exactly doubly
/// stochastic up to rounding in the final normalization.
inline Matrix random_doubly_stochastic(Eigen::Index k, std::mt19937_64& rng,
                                       int permutations = 6) {
    std::vector<int> perm(static_cast<std::size_t>(k));
    std::iota(perm.begin(), perm.end(), 0);
    std::uniform_real_distribution<double> uniform(0.05, 1.0);
    std::vector<double> weights(permutations);
    double total = 0.0;
    for (double& w : weights) {
        w = uniform(rng);
        total += w;
    }
    Matrix m = Matrix::Zero(k, k);
    for (int p = 0; p < permutations; ++p) {
        std::shuffle(perm.begin(), perm.end(), rng);
        for (Eigen::Index i = 0; i < k; ++i)
            m(i, perm[static_cast<std::size_t>(i)]) += weights[static_cast<std::size_t>(p)] / total;
    }
    return m;
}

inline Vector random_simplex(Eigen::Index k, std::mt19937_64& rng) {
    std::exponential_distribution<double> expo(1.0);
    Vector v(k);
    for (Eigen::Index i = 0; i < k; ++i) v[i] = expo(rng) + 1e-3;
    return v / v.sum();
}

/// Reversal permutation (anti-diagonal), the involution swapping colour i
/// with k-1-i.
inline Matrix reversal_permutation(Eigen::Index k) {
    Matrix m = Matrix::Zero(k, k);
    for (Eigen::Index i = 0; i < k; ++i) m(i, k - 1 - i) = 1.0;
    return m;
}

}  // namespace negurn::testing
