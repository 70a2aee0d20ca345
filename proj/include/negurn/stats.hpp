#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

namespace negurn {

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

/// One-sample Kolmogorov-Smirnov distance of `samples` (any order) against a
/// continuous CDF.
template <typename Cdf>
double ks_statistic(std::vector<double> samples, Cdf&& cdf) {
    std::sort(samples.begin(), samples.end());
    const double n = static_cast<double>(samples.size());
    double d = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const double u = cdf(samples[i]);
        const double lo = u - static_cast<double>(i) / n;
        const double hi = static_cast<double>(i + 1) / n - u;
        d = std::max(d, std::max(lo, hi));
    }
    return d;
}

/// Regularized lower incomplete gamma P(a, x).
double regularized_gamma_p(double a, double x);

inline double chi_squared_cdf(double x, double dof) {
    return x <= 0.0 ? 0.0 : regularized_gamma_p(0.5 * dof, 0.5 * x);
}

/// Quantile of the chi-squared distribution (bisection on the CDF).
double chi_squared_quantile(double p, double dof);

/// Pairwise (cascade) summation of f(lo), ..., f(hi-1); deterministic and
/// independent of threading since it only reads precomputed values.
template <typename T, typename F>
T pairwise_sum(std::size_t lo, std::size_t hi, F&& f) {
    if (hi - lo <= 16) {
        T acc = f(lo);
        for (std::size_t i = lo + 1; i < hi; ++i) acc += f(i);
        return acc;
    }
    const std::size_t mid = lo + (hi - lo) / 2;
    return pairwise_sum<T>(lo, mid, f) + pairwise_sum<T>(mid, hi, f);
}

}  // namespace negurn
