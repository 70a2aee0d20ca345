#pragma once

#include "negurn/replacement_matrix.hpp"
#include "negurn/types.hpp"
#include "negurn/weight_function.hpp"

#include <cstdint>
#include <vector>

namespace negurn {

/// Default checkpoint schedule: 0, the geometric grid ceil(10^(j/8)) up to
/// n_max, and n_max itself; sorted and de-duplicated.
std::vector<std::int64_t> geometric_checkpoints(std::int64_t n_max);

struct ExperimentConfig {
    WeightFunction weight;
    ReplacementMatrix replacement;
    Vector initial;                        // U0, strictly positive, sums to 1
    std::int64_t n_max = 1;
    std::vector<std::int64_t> checkpoints; // strictly increasing, ends at n_max
    int replicas = 1000;
    std::uint64_t seed = 0;

    Eigen::Index k() const { return replacement.k(); }
};

/// Assembles a config, filling defaults (uniform U0, geometric checkpoints)
/// and validating invariants. Passing an empty U0 selects the uniform start.
ExperimentConfig make_config(WeightFunction weight, ReplacementMatrix replacement,
                             std::int64_t n_max, Vector initial = Vector(),
                             std::vector<std::int64_t> checkpoints = {}, int replicas = 1000,
                             std::uint64_t seed = 0);

}  // namespace negurn
