#include "negurn/replacement_matrix.hpp"

#include <cmath>
#include <string>

namespace negurn {

namespace {
constexpr double kFlagTol = 1e-12;     // stochasticity / classification flags
constexpr double kBalanceTol = 1e-9;   // relative row-sum agreement on input
}  // namespace

ReplacementMatrix::ReplacementMatrix(Matrix entries) : entries_(std::move(entries)) {
    const Eigen::Index k = entries_.rows();
    if (k < 2 || entries_.cols() != k)
        throw std::invalid_argument("replacement matrix: square with k >= 2 required");
    if ((entries_.array() < 0.0).any())
        throw std::invalid_argument("replacement matrix: negative entry");

    const Vector row_sums = entries_.rowwise().sum();
    const double common = row_sums.mean();
    if (!(common > 0.0))
        throw std::invalid_argument("replacement matrix: zero row sums");

    std::string offending;
    for (Eigen::Index i = 0; i < k; ++i) {
        if (std::abs(row_sums[i] - common) > kBalanceTol * common)
            offending += (offending.empty() ? "" : ", ") + std::to_string(i);
    }
    if (!offending.empty())
        throw std::invalid_argument("replacement matrix: not balanced, row sums differ at rows {" +
                                    offending + "}");

    if (std::abs(common - 1.0) > kFlagTol) entries_ /= common;

    const Vector col_sums = entries_.colwise().sum();
    doubly_stochastic_ = (col_sums.array() - 1.0).abs().maxCoeff() <= kFlagTol;

    const Matrix commutator =
        entries_.transpose() * entries_ - entries_ * entries_.transpose();
    normal_ = commutator.cwiseAbs().maxCoeff() <= kFlagTol;

    identity_ = (entries_ - Matrix::Identity(k, k)).cwiseAbs().maxCoeff() <= kFlagTol;
    uniform_mixing_ =
        (entries_.array() - 1.0 / static_cast<double>(k)).abs().maxCoeff() <= kFlagTol;

    permutation_ = doubly_stochastic_;
    if (permutation_) {
        for (Eigen::Index i = 0; i < k && permutation_; ++i)
            for (Eigen::Index j = 0; j < k; ++j) {
                const double v = entries_(i, j);
                if (std::min(std::abs(v), std::abs(v - 1.0)) > kFlagTol) {
                    permutation_ = false;
                    break;
                }
            }
    }
}

}  // namespace negurn
