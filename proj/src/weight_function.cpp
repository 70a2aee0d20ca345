#include "negurn/weight_function.hpp"

namespace negurn {

WeightFunction WeightFunction::linear(double theta) {
    if (!(theta >= 1.0))
        throw std::invalid_argument("linear weight: theta >= 1 required, got " +
                                    std::to_string(theta));
    WeightFunction w;
    w.family_ = Family::linear;
    w.theta_ = theta;
    w.lipschitz_ = 1.0;
    w.convex_ = true;
    return w;
}

WeightFunction WeightFunction::inverse_power(double theta, double alpha) {
    if (!(theta > 0.0) || !(alpha > 0.0))
        throw std::invalid_argument("inverse power weight: theta > 0 and alpha > 0 required");
    WeightFunction w;
    w.family_ = Family::inverse_power;
    w.theta_ = theta;
    w.alpha_ = alpha;
    // |w'| is maximal at x = 0
    w.lipschitz_ = alpha * std::pow(theta, -alpha - 1.0);
    w.convex_ = true;
    return w;
}

WeightFunction WeightFunction::exponential(double theta) {
    if (!(theta > 0.0))
        throw std::invalid_argument("exponential weight: theta > 0 required");
    WeightFunction w;
    w.family_ = Family::exponential;
    w.theta_ = theta;
    w.lipschitz_ = 1.0 / theta;
    w.convex_ = true;
    return w;
}

WeightFunction WeightFunction::constant(double value) {
    if (!(value > 0.0))
        throw std::invalid_argument("constant weight: value > 0 required");
    WeightFunction w;
    w.family_ = Family::constant;
    w.value_ = value;
    w.lipschitz_ = 0.0;
    w.convex_ = true;
    return w;
}

WeightFunction WeightFunction::custom(std::function<double(double)> eval,
                                      std::function<double(double)> deriv,
                                      std::optional<double> lipschitz_bound, bool convex) {
    if (!eval) throw std::invalid_argument("custom weight: eval callable required");

    // Validation grid: monotonicity and positivity. w may vanish at x = 1
    // (the selection normalizer stays positive there) but not before.
    constexpr int kGrid = 1024;
    double prev = eval(0.0);
    double max_abs_slope = 0.0;
    for (int i = 0; i < kGrid; ++i) {
        double x = static_cast<double>(i) / (kGrid - 1);
        double v = eval(x);
        if (!std::isfinite(v)) throw std::invalid_argument("custom weight: non-finite value");
        if (v < 0.0 || (v == 0.0 && x < 1.0))
            throw std::invalid_argument("custom weight: w must be positive on [0,1)");
        if (v > prev + 1e-12 * std::max(1.0, std::abs(prev)))
            throw std::invalid_argument("custom weight: increasing at x = " + std::to_string(x));
        if (i > 0) max_abs_slope = std::max(max_abs_slope, (prev - v) * (kGrid - 1));
        prev = v;
    }

    WeightFunction w;
    w.family_ = Family::custom;
    w.custom_eval_ = std::move(eval);
    w.custom_deriv_ = std::move(deriv);
    w.convex_ = convex;
    w.derivative_approximate_ = !w.custom_deriv_;
    w.lipschitz_ = lipschitz_bound.value_or(max_abs_slope);
    if (!lipschitz_bound) w.derivative_approximate_ = true;
    return w;
}

std::string WeightFunction::family_name() const {
    switch (family_) {
        case Family::linear: return "linear";
        case Family::inverse_power: return "inverse_power";
        case Family::exponential: return "exponential";
        case Family::constant: return "constant";
        case Family::custom: return "custom";
    }
    return "unknown";
}

}  // namespace negurn
