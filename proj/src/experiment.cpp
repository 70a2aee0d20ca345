#include "negurn/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace negurn {

std::vector<std::int64_t> geometric_checkpoints(std::int64_t n_max) {
    std::vector<std::int64_t> points{0};
    for (int j = 0;; ++j) {
        auto n = static_cast<std::int64_t>(std::ceil(std::pow(10.0, j / 8.0)));
        if (n > n_max) break;
        points.push_back(n);
    }
    points.push_back(n_max);
    std::sort(points.begin(), points.end());
    points.erase(std::unique(points.begin(), points.end()), points.end());
    return points;
}

ExperimentConfig make_config(WeightFunction weight, ReplacementMatrix replacement,
                             std::int64_t n_max, Vector initial,
                             std::vector<std::int64_t> checkpoints, int replicas,
                             std::uint64_t seed) {
    const Eigen::Index k = replacement.k();
    if (n_max < 0) throw std::invalid_argument("config: n_max >= 0 required");
    if (replicas < 1) throw std::invalid_argument("config: replicas >= 1 required");

    if (initial.size() == 0) initial = uniform_vector(k);
    if (initial.size() != k) throw std::invalid_argument("config: U0 length must equal k");
    if (initial.minCoeff() <= 0.0)
        throw std::invalid_argument("config: U0 entries must be strictly positive");
    if (std::abs(initial.sum() - 1.0) > 1e-9)
        throw std::invalid_argument("config: U0 not on simplex");
    initial /= initial.sum();

    if (checkpoints.empty()) {
        checkpoints = geometric_checkpoints(n_max);
    } else {
        std::sort(checkpoints.begin(), checkpoints.end());
        checkpoints.erase(std::unique(checkpoints.begin(), checkpoints.end()),
                          checkpoints.end());
        if (checkpoints.front() < 0 || checkpoints.back() > n_max)
            throw std::invalid_argument("config: checkpoints must lie in [0, n_max]");
        if (checkpoints.back() != n_max) checkpoints.push_back(n_max);
    }

    return ExperimentConfig{std::move(weight), std::move(replacement), std::move(initial),
                            n_max,             std::move(checkpoints),  replicas,
                            seed};
}

}  // namespace negurn
