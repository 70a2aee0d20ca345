#pragma once

#include <cmath>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>

namespace negurn {

// Non-increasing selection weight w on [0,1], extended constantly outside the
// interval: w(x) = w(0) for x <= 0 and w(x) = w(1) for x >= 1. Derivatives are
// zero outside [0,1]; at the endpoints the one-sided interior value is used.
class WeightFunction {
public:
    enum class Family { linear, inverse_power, exponential, constant, custom };

    static WeightFunction linear(double theta);
    static WeightFunction inverse_power(double theta, double alpha);
    static WeightFunction exponential(double theta);
    static WeightFunction constant(double value);

    // Custom weights must be non-increasing and positive on [0,1); both are
    // checked on a 1024-point grid. Without an analytic derivative a central
    // finite difference (step 1e-6) is used and the function is flagged
    // approximate, which widens regime-boundary tolerances downstream.
    static WeightFunction custom(std::function<double(double)> eval,
                                 std::function<double(double)> deriv = nullptr,
                                 std::optional<double> lipschitz_bound = std::nullopt,
                                 bool convex = false);

    double eval(double x) const {
        x = clamp01(x);
        switch (family_) {
            case Family::linear: return theta_ - x;
            case Family::inverse_power: return std::pow(theta_ + x, -alpha_);
            case Family::exponential: return std::exp(-x / theta_);
            case Family::constant: return value_;
            case Family::custom: return custom_eval_(x);
        }
        return 0.0;  // unreachable
    }

    double operator()(double x) const { return eval(x); }

    double deriv1(double x) const {
        if (x < 0.0 || x > 1.0) return 0.0;
        switch (family_) {
            case Family::linear: return -1.0;
            case Family::inverse_power: return -alpha_ * std::pow(theta_ + x, -alpha_ - 1.0);
            case Family::exponential: return -std::exp(-x / theta_) / theta_;
            case Family::constant: return 0.0;
            case Family::custom:
                if (custom_deriv_) return custom_deriv_(x);
                return (eval(x + kFdStep) - eval(x - kFdStep)) / (2.0 * kFdStep);
        }
        return 0.0;  // unreachable
    }

    std::optional<double> deriv2(double x) const {
        if (x < 0.0 || x > 1.0) return 0.0;
        switch (family_) {
            case Family::linear: return 0.0;
            case Family::inverse_power:
                return alpha_ * (alpha_ + 1.0) * std::pow(theta_ + x, -alpha_ - 2.0);
            case Family::exponential: return std::exp(-x / theta_) / (theta_ * theta_);
            case Family::constant: return 0.0;
            case Family::custom: return std::nullopt;
        }
        return std::nullopt;
    }

    Family family() const { return family_; }
    double theta() const { return theta_; }
    double alpha() const { return alpha_; }
    double constant_value() const { return value_; }

    /// Lipschitz bound M for w on [0,1].
    double lipschitz_bound() const { return lipschitz_; }
    bool convex() const { return convex_; }
    /// True when deriv1 falls back to finite differences.
    bool derivative_approximate() const { return derivative_approximate_; }

    std::string family_name() const;

private:
    WeightFunction() = default;

    static double clamp01(double x) { return x < 0.0 ? 0.0 : (x > 1.0 ? 1.0 : x); }

    static constexpr double kFdStep = 1e-6;

    Family family_ = Family::constant;
    double theta_ = 0.0;
    double alpha_ = 0.0;
    double value_ = 1.0;
    double lipschitz_ = 0.0;
    bool convex_ = true;
    bool derivative_approximate_ = false;
    std::function<double(double)> custom_eval_;
    std::function<double(double)> custom_deriv_;
};

}  // namespace negurn
