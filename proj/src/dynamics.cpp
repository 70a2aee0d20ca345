#include "negurn/dynamics.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace negurn {

namespace {

constexpr double kWeightFloor = 1e-300;
constexpr std::int64_t kRederiveMask = (std::int64_t{1} << 20) - 1;

struct StepOutcome {
    int colour;
    double martingale_norm2;
};

// Core transition on raw buffers. `replacement` is row-major k x k, `weights`
// is scratch of size k. `n` is the pre-step time index.
inline StepOutcome advance_urn(double* mass, std::int64_t* counts, std::int64_t n,
                               const WeightFunction& w, const double* replacement, int k,
                               double u, double* weights) {
    const double inv = 1.0 / static_cast<double>(n + 1);
    double total = 0.0;
    for (int j = 0; j < k; ++j) {
        const double wj = w.eval(mass[j] * inv);
        weights[j] = wj;
        total += wj;
    }
    if (!(total > kWeightFloor)) throw std::runtime_error("degenerate weight");

    const double threshold = u * total;
    int colour = k - 1;
    double cumulative = 0.0;
    for (int j = 0; j < k; ++j) {
        cumulative += weights[j];
        if (threshold < cumulative) {
            colour = j;
            break;
        }
    }

    // M_{n+1} R = row_Z(R) - w(Y_n) R / S_w(Y_n)
    const double inv_total = 1.0 / total;
    const double* drawn_row = replacement + static_cast<std::size_t>(colour) * k;
    double norm2 = 0.0;
    for (int j = 0; j < k; ++j) {
        double mean_j = 0.0;
        for (int i = 0; i < k; ++i) mean_j += weights[i] * replacement[i * k + j];
        const double d = drawn_row[j] - mean_j * inv_total;
        norm2 += d * d;
    }

    for (int j = 0; j < k; ++j) mass[j] += drawn_row[j];
    counts[colour] += 1;
    return {colour, norm2};
}

std::vector<double> row_major_copy(const Matrix& m) {
    std::vector<double> out(static_cast<std::size_t>(m.rows()) * m.cols());
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j)
            out[static_cast<std::size_t>(i) * m.cols() + j] = m(i, j);
    return out;
}

// U = U0 + N R, cancelling accumulated rounding in the incremental mass.
void rederive_mass(double* mass, const double* initial, const std::int64_t* counts,
                   const double* replacement, int k) {
    for (int j = 0; j < k; ++j) {
        double acc = initial[j];
        for (int i = 0; i < k; ++i)
            acc += static_cast<double>(counts[i]) * replacement[i * k + j];
        mass[j] = acc;
    }
}

}  // namespace

Vector selection_distribution(const Eigen::Ref<const Vector>& y, const WeightFunction& w) {
    Vector values(y.size());
    for (Eigen::Index j = 0; j < y.size(); ++j) values[j] = w.eval(y[j]);
    const double total = values.sum();
    if (!(total > kWeightFloor)) throw std::runtime_error("degenerate weight");
    return values / total;
}

int sample_colour(const Eigen::Ref<const Vector>& probabilities, double u) {
    double cumulative = 0.0;
    const Eigen::Index k = probabilities.size();
    for (Eigen::Index j = 0; j < k; ++j) {
        cumulative += probabilities[j];
        if (u < cumulative) return static_cast<int>(j);
    }
    return static_cast<int>(k - 1);
}

UrnState step(const UrnState& state, const WeightFunction& w, const ReplacementMatrix& R,
              Xoshiro256pp& rng) {
    const int k = static_cast<int>(R.k());
    UrnState next = state;
    const auto replacement = row_major_copy(R.entries());
    Vector weights(k);
    const auto outcome = advance_urn(next.colour_mass.data(), next.draw_counts.data(),
                                     state.n, w, replacement.data(), k, rng.uniform01(),
                                     weights.data());
    next.n = state.n + 1;
    next.last_draw = outcome.colour;
    return next;
}

Trajectory run_trajectory(const ExperimentConfig& config, std::uint64_t seed) {
    const int k = static_cast<int>(config.k());
    const auto replacement = row_major_copy(config.replacement.entries());

    Trajectory out{config, seed};
    out.checkpoints.reserve(config.checkpoints.size());

    Vector mass = config.initial;
    IntVector counts = IntVector::Zero(k);
    Vector weights(k);
    Xoshiro256pp rng(seed);

    std::int64_t n = 0;
    int last_draw = -1;
    double max_norm2 = 0.0;

    auto record = [&](std::int64_t at) {
        TrajectoryCheckpoint cp;
        cp.n = at;
        cp.proportions = mass / static_cast<double>(at + 1);
        if (at >= 1)
            cp.count_proportions = counts.cast<double>() / static_cast<double>(at);
        else
            cp.count_proportions =
                Vector::Constant(k, std::numeric_limits<double>::quiet_NaN());
        out.checkpoints.push_back(std::move(cp));

        const double mass_residual = std::abs(mass.sum() - static_cast<double>(at + 1));
        out.max_mass_residual = std::max(out.max_mass_residual, mass_residual);
        double linear_residual = 0.0;
        for (int j = 0; j < k; ++j) {
            double expected = config.initial[j];
            for (int i = 0; i < k; ++i)
                expected += static_cast<double>(counts[i]) * replacement[i * k + j];
            linear_residual = std::max(linear_residual, std::abs(mass[j] - expected));
        }
        out.max_linear_residual = std::max(out.max_linear_residual, linear_residual);
    };

    std::size_t next_checkpoint = 0;
    if (next_checkpoint < config.checkpoints.size() &&
        config.checkpoints[next_checkpoint] == 0) {
        record(0);
        ++next_checkpoint;
    }

    while (n < config.n_max) {
        const auto outcome = advance_urn(mass.data(), counts.data(), n, config.weight,
                                         replacement.data(), k, rng.uniform01(),
                                         weights.data());
        last_draw = outcome.colour;
        if (outcome.martingale_norm2 > max_norm2) max_norm2 = outcome.martingale_norm2;
        ++n;
        if ((n & kRederiveMask) == 0)
            rederive_mass(mass.data(), config.initial.data(), counts.data(),
                          replacement.data(), k);
        if (next_checkpoint < config.checkpoints.size() &&
            config.checkpoints[next_checkpoint] == n) {
            record(n);
            ++next_checkpoint;
        }
    }

    out.final_state = UrnState{n, std::move(mass), std::move(counts), last_draw};
    out.max_martingale_norm2 = max_norm2;
    return out;
}

AccountingReport verify_accounting(const Trajectory& trajectory) {
    const auto& state = trajectory.final_state;
    const auto& config = trajectory.config;
    const auto k = static_cast<double>(config.k());
    const double n = static_cast<double>(state.n);
    const double scale = 1e-9 * std::max(n, 1.0);

    AccountingReport report;
    report.mass_threshold = scale;
    report.linear_threshold = scale;
    report.martingale_bound = k * (1.0 + k);

    report.mass_residual = std::max(std::abs(state.colour_mass.sum() - (n + 1.0)),
                                    trajectory.max_mass_residual);
    report.mass_ok = report.mass_residual <= report.mass_threshold;

    report.counts_ok = state.draw_counts.sum() == state.n;

    const Vector expected = config.initial + config.replacement.entries().transpose() *
                                                 state.draw_counts.cast<double>();
    Eigen::Index worst = 0;
    report.linear_residual = (state.colour_mass - expected).cwiseAbs().maxCoeff(&worst);
    report.linear_residual_index = worst;
    report.linear_residual = std::max(report.linear_residual, trajectory.max_linear_residual);
    report.linear_ok = report.linear_residual <= report.linear_threshold;

    report.martingale_norm2_max = trajectory.max_martingale_norm2;
    report.martingale_ok = report.martingale_norm2_max <= report.martingale_bound;
    return report;
}

}  // namespace negurn
