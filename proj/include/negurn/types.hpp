#pragma once

#include <Eigen/Dense>

#include <cstdint>

namespace negurn {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using ComplexVector = Eigen::VectorXcd;
using ComplexMatrix = Eigen::MatrixXcd;
using IntVector = Eigen::Matrix<std::int64_t, Eigen::Dynamic, 1>;

inline Vector uniform_vector(Eigen::Index k) {
    return Vector::Constant(k, 1.0 / static_cast<double>(k));
}

/// All-ones rank-one matrix J (entries 1), k x k.
inline Matrix ones_matrix(Eigen::Index k) { return Matrix::Ones(k, k); }

inline bool on_simplex(const Eigen::Ref<const Vector>& y, double tol = 1e-12) {
    return y.minCoeff() >= -tol && std::abs(y.sum() - 1.0) <= tol;
}

/// Orthogonal projector onto the tangent space of the simplex, I - J/k.
inline Matrix simplex_tangent_projector(Eigen::Index k) {
    return Matrix::Identity(k, k) - ones_matrix(k) / static_cast<double>(k);
}

}  // namespace negurn
