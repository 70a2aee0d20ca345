#include "negurn/io.hpp"
#include "negurn/version.hpp"

#include "CLI11.hpp"

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

namespace {

using namespace negurn;

struct CommonOptions {
    std::string config_path;
    std::string out_dir;
    std::optional<std::uint64_t> seed;
    std::optional<int> replicas;
    std::string emit = "both";
    int threads = 0;
};

void add_common(CLI::App* cmd, CommonOptions& opts, bool needs_config = true) {
    auto* config = cmd->add_option("--config", opts.config_path, "experiment config JSON");
    if (needs_config) config->required();
    cmd->add_option("--out", opts.out_dir, "output directory");
    cmd->add_option("--seed", opts.seed, "override base seed");
    cmd->add_option("--replicas", opts.replicas, "override replica count");
    cmd->add_option("--emit", opts.emit, "json|csv|both")
        ->check(CLI::IsMember({"json", "csv", "both"}));
    cmd->add_option("--threads", opts.threads, "worker threads (0 = hardware)");
}

ExperimentConfig load_with_overrides(const CommonOptions& opts) {
    ExperimentConfig config = load_config(opts.config_path);
    if (opts.seed) config.seed = *opts.seed;
    if (opts.replicas) {
        if (*opts.replicas < 1) throw ConfigError("config: replicas >= 1 required");
        config.replicas = *opts.replicas;
    }
    return config;
}

std::string out_path(const CommonOptions& opts, const std::string& name) {
    if (opts.out_dir.empty()) return name;
    std::filesystem::create_directories(opts.out_dir);
    return (std::filesystem::path(opts.out_dir) / name).string();
}

void emit_pair(const CommonOptions& opts, const std::string& stem, const Json& json,
               const std::string& csv) {
    if (opts.emit != "csv") write_text_file(out_path(opts, stem + ".json"), json.dump(2) + "\n");
    if (opts.emit != "json") write_text_file(out_path(opts, stem + ".csv"), csv);
}

int run_analyze(const CommonOptions& opts) {
    const ExperimentConfig config = load_with_overrides(opts);
    const AsymptoticReport report = classify_regime(config.weight, config.replacement);
    const Json json = report_to_json(report, config);
    std::cout << json.dump(2) << "\n";
    if (!opts.out_dir.empty()) emit_pair(opts, "report", json, report_to_csv(report, config));
    return 0;
}

int run_simulate(const CommonOptions& opts) {
    const ExperimentConfig config = load_with_overrides(opts);
    const Trajectory trajectory =
        run_trajectory(config, derive_stream_seed(config.seed, 0));
    emit_pair(opts, "trajectory", trajectory_to_json(trajectory),
              trajectory_to_csv(trajectory));
    const AccountingReport acc = verify_accounting(trajectory);
    std::cout << "simulated n_max=" << config.n_max << " checkpoints="
              << trajectory.checkpoints.size() << " accounting="
              << (acc.all_ok() ? "ok" : "VIOLATED") << "\n";
    return acc.all_ok() ? 0 : 1;
}

void print_check(bool pass, const std::string& name, const std::string& detail,
                 bool& any_fail) {
    std::cout << (pass ? "PASS" : "FAIL") << ": " << name << " — " << detail << "\n";
    if (!pass) any_fail = true;
}

int run_verify(const CommonOptions& opts, double convergence_tol, double escape_epsilon) {
    const ExperimentConfig config = load_with_overrides(opts);
    const AsymptoticReport report = classify_regime(config.weight, config.replacement);
    const EnsembleSummary summary = run_ensemble(config, report, opts.threads);
    emit_pair(opts, "ensemble", summary_to_json(summary), summary_to_csv(summary));

    bool any_fail = false;
    print_check(summary.accounting_ok, "accounting",
                "max mass residual " + std::to_string(summary.max_mass_residual) +
                    ", max linear residual " + std::to_string(summary.max_linear_residual) +
                    ", max ||MR||^2 " + std::to_string(summary.max_martingale_norm2),
                any_fail);

    const bool expects_convergence =
        report.stability.stable || report.contraction.contraction;
    if (expects_convergence) {
        const auto diag = convergence_diagnostic(summary, report.y_limit, escape_epsilon);
        print_check(diag.final_mean_distance <= convergence_tol, "convergence",
                    "final mean distance " + std::to_string(diag.final_mean_distance) +
                        " (threshold " + std::to_string(convergence_tol) +
                        ", engineering choice)",
                    any_fail);
    } else {
        const auto diag = convergence_diagnostic(summary, report.y_limit, escape_epsilon);
        print_check(diag.fraction_within < 0.10, "non-convergence fraction below threshold",
                    "fraction within eps=" + std::to_string(escape_epsilon) + " is " +
                        std::to_string(diag.fraction_within) +
                        " (threshold 0.10, engineering choice); last-decade decreasing share " +
                        std::to_string(diag.last_decade_decreasing),
                    any_fail);
    }

    if (const Matrix* sigma = report.sigma()) {
        const bool critical = report.regime == Regime::clt_sqrt_n_over_log;
        const double cov_tol = critical ? 0.25 : 0.15;
        const double ks_tol = critical ? -1.0 : 0.05;
        const auto diag =
            clt_diagnostic(summary, *sigma, DeviationSeries::proportions, cov_tol, ks_tol);
        print_check(diag.covariance_pass, "covariance",
                    "tangent-space relative error " +
                        std::to_string(diag.covariance_rel_error) + " (threshold " +
                        std::to_string(cov_tol) + ")",
                    any_fail);
        if (!critical)
            print_check(diag.ks_pass, "KS",
                        "max per-coordinate distance " + std::to_string(diag.max_ks) +
                            " (threshold " + std::to_string(ks_tol) + ")",
                        any_fail);
        const auto tilde_diag = clt_diagnostic(summary, *report.sigma_tilde(),
                                               DeviationSeries::count_proportions, cov_tol,
                                               ks_tol);
        print_check(tilde_diag.covariance_pass, "covariance (counts)",
                    "tangent-space relative error " +
                        std::to_string(tilde_diag.covariance_rel_error) + " (threshold " +
                        std::to_string(cov_tol) + ")",
                    any_fail);
        if (!critical)
            print_check(tilde_diag.ks_pass, "KS (counts)",
                        "max per-coordinate distance " + std::to_string(tilde_diag.max_ks) +
                            " (threshold " + std::to_string(ks_tol) + ")",
                        any_fail);
    }
    if (!summary.a2_verified)
        std::cout << "note: A2 unverified — CLT diagnostics assume convergence to the limit\n";
    return any_fail ? 1 : 0;
}

struct RegionOptions {
    std::string family = "linear";
    int k = 2;
    double theta_min = 1.0, theta_max = 3.0;
    int theta_points = 33;
    double lambda_min = -1.0, lambda_max = 1.0;
    int lambda_points = 33;
    double alpha = 1.0;
};

int run_regions(const CommonOptions& opts, const RegionOptions& region) {
    const RegionGrid grid =
        region_grid(region.family, region.k, region.theta_min, region.theta_max,
                    region.theta_points, region.lambda_min, region.lambda_max,
                    region.lambda_points, region.alpha);
    if (opts.emit != "csv")
        write_text_file(out_path(opts, "regions.json"), region_to_json(grid).dump(2) + "\n");
    if (opts.emit != "json")
        write_text_file(out_path(opts, "regions.csv"), region_to_csv(grid));
    std::cout << "regions: " << grid.theta_grid.size() << " x " << grid.lambda_grid.size()
              << " cells, " << grid.boundary.size() << " boundary nodes\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"negurn — negatively reinforced balanced urn schemes"};
    app.set_version_flag("--version", std::string(negurn::kVersion));
    app.require_subcommand(1);

    CommonOptions analyze_opts, simulate_opts, verify_opts, region_common;
    RegionOptions region_opts;
    double convergence_tol = 0.01;
    double escape_epsilon = 0.05;

    auto* analyze = app.add_subcommand("analyze", "spectral/stability/covariance report");
    add_common(analyze, analyze_opts);
    auto* simulate = app.add_subcommand("simulate", "single trajectory to CSV");
    add_common(simulate, simulate_opts);
    auto* verify = app.add_subcommand("verify", "ensemble run checked against predictions");
    add_common(verify, verify_opts);
    verify->add_option("--conv-tol", convergence_tol,
                       "mean final distance threshold (engineering choice)");
    verify->add_option("--epsilon", escape_epsilon, "escape radius for instability proxy");
    auto* regions = app.add_subcommand("regions", "rho grid over (theta, Re lambda_s)");
    add_common(regions, region_common, false);
    regions->add_option("--family", region_opts.family, "linear|inverse_power|exponential");
    regions->add_option("--k", region_opts.k, "number of colours")->check(CLI::Range(2, 1024));
    regions->add_option("--theta-min", region_opts.theta_min);
    regions->add_option("--theta-max", region_opts.theta_max);
    regions->add_option("--theta-points", region_opts.theta_points);
    regions->add_option("--lambda-min", region_opts.lambda_min);
    regions->add_option("--lambda-max", region_opts.lambda_max);
    regions->add_option("--lambda-points", region_opts.lambda_points);
    regions->add_option("--alpha", region_opts.alpha, "inverse_power exponent");

    CLI11_PARSE(app, argc, argv);

    try {
        if (analyze->parsed()) return run_analyze(analyze_opts);
        if (simulate->parsed()) return run_simulate(simulate_opts);
        if (verify->parsed()) return run_verify(verify_opts, convergence_tol, escape_epsilon);
        if (regions->parsed()) return run_regions(region_common, region_opts);
    } catch (const negurn::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
