#pragma once

#include "negurn/types.hpp"

#include <stdexcept>

namespace negurn {

// Balanced replacement rule. Construction accepts any nonnegative matrix with
// equal row sums and normalizes it to row-stochastic form; unequal row sums
// are rejected (the scheme would not be balanced).
class ReplacementMatrix {
public:
    explicit ReplacementMatrix(Matrix entries);

    const Matrix& entries() const { return entries_; }
    Eigen::Index k() const { return entries_.rows(); }

    bool row_stochastic() const { return true; }
    bool doubly_stochastic() const { return doubly_stochastic_; }
    /// R^T R == R R^T within 1e-12 (max norm).
    bool normal_matrix() const { return normal_; }
    bool identity() const { return identity_; }
    /// R == J/k: every draw adds the same 1/k to every colour.
    bool uniform_mixing() const { return uniform_mixing_; }
    bool permutation() const { return permutation_; }

    double operator()(Eigen::Index i, Eigen::Index j) const { return entries_(i, j); }

private:
    Matrix entries_;
    bool doubly_stochastic_ = false;
    bool normal_ = false;
    bool identity_ = false;
    bool uniform_mixing_ = false;
    bool permutation_ = false;
};

/// Validates, normalizes and classifies a raw replacement matrix.
inline ReplacementMatrix validate_replacement_matrix(const Matrix& entries) {
    return ReplacementMatrix(entries);
}

}  // namespace negurn
