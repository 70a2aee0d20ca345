#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>

namespace negurn {

template <typename DerivedA, typename DerivedB>
Eigen::Matrix<typename DerivedA::Scalar, Eigen::Dynamic, Eigen::Dynamic>
kronecker_product(const Eigen::MatrixBase<DerivedA>& a, const Eigen::MatrixBase<DerivedB>& b) {
    using Result = Eigen::Matrix<typename DerivedA::Scalar, Eigen::Dynamic, Eigen::Dynamic>;
    Result out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

// Scaling-and-squaring matrix exponential with a degree-13 Pade approximant
// (coefficients from Higham's 2005 algorithm, single highest order).
template <typename Derived>
typename Derived::PlainObject matrix_exponential(const Eigen::MatrixBase<Derived>& input) {
    using MatrixType = typename Derived::PlainObject;
    using Scalar = typename Derived::Scalar;
    const Eigen::Index n = input.rows();
    if (input.cols() != n) throw std::invalid_argument("matrix exponential: square input");

    MatrixType a = input;
    const double norm1 = a.cwiseAbs().colwise().sum().maxCoeff();
    if (!std::isfinite(norm1))
        throw std::overflow_error("matrix exponential: non-finite input norm");

    constexpr double theta13 = 5.371920351148152;
    int squarings = 0;
    if (norm1 > theta13)
        squarings = static_cast<int>(std::ceil(std::log2(norm1 / theta13)));
    if (squarings > 1023) throw std::overflow_error("matrix exponential: norm too large");
    a *= Scalar(std::ldexp(1.0, -squarings));

    static constexpr double pade[14] = {
        64764752532480000.0, 32382376266240000.0, 7771770303897600.0, 1187353796428800.0,
        129060195264000.0,   10559470521600.0,    670442572800.0,     33522128640.0,
        1323241920.0,        40840800.0,          960960.0,           16380.0,
        182.0,               1.0};

    const MatrixType identity = MatrixType::Identity(n, n);
    const MatrixType a2 = a * a;
    const MatrixType a4 = a2 * a2;
    const MatrixType a6 = a2 * a4;
    const MatrixType u =
        a * (a6 * (pade[13] * a6 + pade[11] * a4 + pade[9] * a2) + pade[7] * a6 +
             pade[5] * a4 + pade[3] * a2 + pade[1] * identity);
    const MatrixType v = a6 * (pade[12] * a6 + pade[10] * a4 + pade[8] * a2) +
                         pade[6] * a6 + pade[4] * a4 + pade[2] * a2 + pade[0] * identity;

    MatrixType result = (v - u).partialPivLu().solve(v + u);
    for (int i = 0; i < squarings; ++i) result = result * result;
    if (!result.allFinite())
        throw std::overflow_error("matrix exponential: overflow in result");
    return result;
}

}  // namespace negurn
