#include "negurn/io.hpp"

#include "negurn/version.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

namespace negurn {

namespace {

std::string format_double(double v) {
    std::ostringstream out;
    out << std::setprecision(17) << v;
    return out.str();
}

Json vector_to_json(const Eigen::Ref<const Vector>& v) {
    Json out = Json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
    return out;
}

Json matrix_to_json(const Eigen::Ref<const Matrix>& m) {
    Json out = Json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        Json row = Json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        out.push_back(std::move(row));
    }
    return out;
}

Json complex_list_to_json(const ComplexVector& v) {
    Json out = Json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i)
        out.push_back(Json{{"re", v[i].real()}, {"im", v[i].imag()}});
    return out;
}

void append_flattened(std::ostringstream& header, std::ostringstream& row,
                      const std::string& name, const Matrix& m) {
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            header << ',' << name << '_' << (i + 1) << '_' << (j + 1);
            row << ',' << format_double(m(i, j));
        }
}

double require_number(const Json& node, const std::string& path) {
    if (!node.is_number()) throw ConfigError("config: " + path + ": number required");
    return node.get<double>();
}

std::int64_t require_integer(const Json& node, const std::string& path) {
    if (!node.is_number_integer()) throw ConfigError("config: " + path + ": integer required");
    return node.get<std::int64_t>();
}

WeightFunction parse_weight(const Json& node) {
    if (!node.is_object()) throw ConfigError("config: weight: object required");
    if (!node.contains("family")) throw ConfigError("config: weight.family: required");
    const std::string family = node.at("family").is_string()
                                   ? node.at("family").get<std::string>()
                                   : throw ConfigError("config: weight.family: string required");

    auto allow_only = [&](std::initializer_list<const char*> keys) {
        for (const auto& [key, value] : node.items()) {
            (void)value;
            bool ok = key == "family";
            for (const char* allowed : keys) ok = ok || key == allowed;
            if (!ok)
                throw ConfigError("config: weight." + key + ": not valid for family '" +
                                  family + "'");
        }
    };
    auto param = [&](const char* key) {
        if (!node.contains(key))
            throw ConfigError("config: weight." + std::string(key) + ": required for family '" +
                              family + "'");
        return require_number(node.at(key), "weight." + std::string(key));
    };

    try {
        if (family == "linear") {
            allow_only({"theta"});
            return WeightFunction::linear(param("theta"));
        }
        if (family == "inverse_power") {
            allow_only({"theta", "alpha"});
            return WeightFunction::inverse_power(param("theta"), param("alpha"));
        }
        if (family == "exponential") {
            allow_only({"theta"});
            return WeightFunction::exponential(param("theta"));
        }
        if (family == "constant") {
            allow_only({"c"});
            return WeightFunction::constant(param("c"));
        }
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("config: weight: ") + e.what());
    }
    throw ConfigError("config: weight.family: unknown weight family '" + family + "'");
}

ReplacementMatrix parse_replacement(const Json& node) {
    if (!node.is_array() || node.empty())
        throw ConfigError("config: R: array of rows required");
    const auto k = static_cast<Eigen::Index>(node.size());
    Matrix entries(k, k);
    for (Eigen::Index i = 0; i < k; ++i) {
        const Json& row = node.at(static_cast<std::size_t>(i));
        if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != k)
            throw ConfigError("config: R[" + std::to_string(i) + "]: expected " +
                              std::to_string(k) + " entries");
        for (Eigen::Index j = 0; j < k; ++j)
            entries(i, j) = require_number(row.at(static_cast<std::size_t>(j)),
                                           "R[" + std::to_string(i) + "][" +
                                               std::to_string(j) + "]");
    }
    try {
        return validate_replacement_matrix(entries);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("config: R: ") + e.what());
    }
}

std::string regime_label(Regime regime) { return regime_name(regime); }

}  // namespace

ExperimentConfig parse_config(const std::string& text) {
    Json doc;
    try {
        doc = Json::parse(text);
    } catch (const Json::parse_error& e) {
        throw ConfigError(std::string("config: invalid JSON: ") + e.what());
    }
    if (!doc.is_object()) throw ConfigError("config: top-level object required");

    static const std::vector<std::string> known = {"weight",      "R",        "U0", "n_max",
                                                   "checkpoints", "replicas", "seed"};
    for (const auto& [key, value] : doc.items()) {
        (void)value;
        if (std::find(known.begin(), known.end(), key) == known.end())
            throw ConfigError("config: unknown key '" + key + "'");
    }
    if (!doc.contains("weight")) throw ConfigError("config: weight: required");
    if (!doc.contains("R")) throw ConfigError("config: R: required");
    if (!doc.contains("n_max")) throw ConfigError("config: n_max: required");

    WeightFunction weight = parse_weight(doc.at("weight"));
    ReplacementMatrix replacement = parse_replacement(doc.at("R"));

    Vector initial;
    if (doc.contains("U0")) {
        const Json& node = doc.at("U0");
        if (!node.is_array() ||
            static_cast<Eigen::Index>(node.size()) != replacement.k())
            throw ConfigError("config: U0: array of length k required");
        initial.resize(replacement.k());
        for (Eigen::Index i = 0; i < initial.size(); ++i)
            initial[i] = require_number(node.at(static_cast<std::size_t>(i)),
                                        "U0[" + std::to_string(i) + "]");
    }

    const std::int64_t n_max = require_integer(doc.at("n_max"), "n_max");

    std::vector<std::int64_t> checkpoints;
    if (doc.contains("checkpoints")) {
        const Json& node = doc.at("checkpoints");
        if (!node.is_array()) throw ConfigError("config: checkpoints: array required");
        for (std::size_t i = 0; i < node.size(); ++i)
            checkpoints.push_back(
                require_integer(node.at(i), "checkpoints[" + std::to_string(i) + "]"));
    }

    int replicas = 1000;
    if (doc.contains("replicas"))
        replicas = static_cast<int>(require_integer(doc.at("replicas"), "replicas"));
    std::uint64_t seed = 0;
    if (doc.contains("seed")) {
        const Json& node = doc.at("seed");
        if (!node.is_number_integer() && !node.is_number_unsigned())
            throw ConfigError("config: seed: integer required");
        seed = node.get<std::uint64_t>();
    }

    try {
        return make_config(std::move(weight), std::move(replacement), n_max,
                           std::move(initial), std::move(checkpoints), replicas, seed);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open '" + path + "'");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_config(buffer.str());
}

Json config_to_json(const ExperimentConfig& config) {
    Json weight;
    weight["family"] = config.weight.family_name();
    switch (config.weight.family()) {
        case WeightFunction::Family::linear:
        case WeightFunction::Family::exponential:
            weight["theta"] = config.weight.theta();
            break;
        case WeightFunction::Family::inverse_power:
            weight["theta"] = config.weight.theta();
            weight["alpha"] = config.weight.alpha();
            break;
        case WeightFunction::Family::constant:
            weight["c"] = config.weight.constant_value();
            break;
        case WeightFunction::Family::custom:
            throw ConfigError("config: custom weight functions cannot be serialized");
    }
    Json out;
    out["weight"] = std::move(weight);
    out["R"] = matrix_to_json(config.replacement.entries());
    out["U0"] = vector_to_json(config.initial);
    out["n_max"] = config.n_max;
    out["checkpoints"] = config.checkpoints;
    out["replicas"] = config.replicas;
    out["seed"] = config.seed;
    return out;
}

std::string config_hash(const ExperimentConfig& config) {
    const std::string canonical = config_to_json(config).dump();
    std::uint64_t hash = 0xcbf29ce484222325ULL;
    for (unsigned char c : canonical) {
        hash ^= c;
        hash *= 0x100000001b3ULL;
    }
    std::ostringstream out;
    out << std::hex << std::setw(16) << std::setfill('0') << hash;
    return out.str();
}

Json meta_json(const ExperimentConfig& config) {
    return Json{{"version", kVersion},
                {"config_hash", config_hash(config)},
                {"seed", config.seed}};
}

std::string csv_header_block(const ExperimentConfig& config) {
    std::ostringstream out;
    out << "# negurn " << kVersion << "\n# config_hash=" << config_hash(config)
        << "\n# seed=" << config.seed << "\n";
    return out.str();
}

Json report_to_json(const AsymptoticReport& report, const ExperimentConfig& config) {
    Json out;
    out["meta"] = meta_json(config);
    out["b"] = report.spectral.slope;
    out["rho"] = report.spectral.rho;
    out["rho_unclipped"] = report.spectral.rho_unclipped;
    out["nu"] = report.spectral.nu;
    out["lambda_s"] =
        Json{{"re", report.spectral.lambda_s.real()}, {"im", report.spectral.lambda_s.imag()}};
    out["eigenvalues"] = complex_list_to_json(report.spectral.eigenvalues);
    out["jacobian_eigenvalues"] = complex_list_to_json(report.spectral.jacobian_eigenvalues);
    out["derivative_approximate"] = report.spectral.derivative_approximate;

    out["stable"] = report.stability.stable;
    out["stability"] = Json{
        {"eigenvalue_condition", report.stability.eigenvalue_condition},
        {"dimension_condition", report.stability.dimension_condition},
        {"binding", report.stability.binding == StabilityVerdict::Binding::dimension
                        ? "dimension"
                        : "eigenvalue"},
        {"margin", report.stability.margin}};

    out["contraction"] = report.contraction.contraction;
    const char* contraction_case = "none";
    if (report.contraction.applied == ContractionVerdict::Case::lower_weight_bound)
        contraction_case = "lower_weight_bound";
    else if (report.contraction.applied == ContractionVerdict::Case::convexity_bound)
        contraction_case = "convexity_bound";
    out["contraction_detail"] =
        Json{{"case", contraction_case}, {"factor", report.contraction.factor}};

    out["fixed_point"] = Json{{"y", vector_to_json(report.fixed_point.y)},
                              {"y_tilde", vector_to_json(report.fixed_point.y_tilde)},
                              {"converged", report.fixed_point.converged},
                              {"iterations", report.fixed_point.iterations},
                              {"residual", report.fixed_point.residual}};

    out["regime"] = regime_label(report.regime);
    out["scaling"] = Json{{"description", report.scaling_description()},
                          {"rho", report.spectral.rho},
                          {"nu", report.spectral.nu}};
    out["doubly_stochastic"] = report.doubly_stochastic;
    out["a2_verified"] = report.a2_verified;
    out["y_limit"] = vector_to_json(report.y_limit);
    out["y_tilde_limit"] = vector_to_json(report.y_tilde_limit);
    out["Gamma1"] = matrix_to_json(report.gamma);
    out["GammaTilde1"] = matrix_to_json(report.gamma_tilde);

    if (report.sqrt_n) {
        out["Lambda1"] = matrix_to_json(report.sqrt_n->lambda);
        out["Sigma1"] = matrix_to_json(report.sqrt_n->sigma);
        out["SigmaTilde1"] = matrix_to_json(report.sqrt_n->sigma_tilde);
        out["Lambda1_diagnostics"] = Json{{"used_closed_form", report.sqrt_n->used_closed_form},
                                          {"closed_form_gap", report.sqrt_n->closed_form_gap}};
    }
    if (report.critical) {
        out["Lambda2"] = matrix_to_json(report.critical->lambda);
        out["Sigma2"] = matrix_to_json(report.critical->sigma);
        out["SigmaTilde2"] = matrix_to_json(report.critical->sigma_tilde);
        Json diag;
        diag["horizons"] = report.critical->horizons;
        diag["successive_gaps"] = report.critical->successive_gaps;
        diag["extrapolation_gap"] = report.critical->extrapolation_gap;
        diag["converged"] = report.critical->converged;
        out["Lambda2_diagnostics"] = std::move(diag);
    }
    out["notes"] = report.notes;
    return out;
}

std::string report_to_csv(const AsymptoticReport& report, const ExperimentConfig& config) {
    std::ostringstream header, row;
    header << "b,rho,rho_unclipped,nu,lambda_s_re,lambda_s_im,regime,stable,contraction,"
              "doubly_stochastic,a2_verified";
    row << format_double(report.spectral.slope) << ',' << format_double(report.spectral.rho)
        << ',' << format_double(report.spectral.rho_unclipped) << ',' << report.spectral.nu
        << ',' << format_double(report.spectral.lambda_s.real()) << ','
        << format_double(report.spectral.lambda_s.imag()) << ',' << regime_label(report.regime)
        << ',' << (report.stability.stable ? 1 : 0) << ','
        << (report.contraction.contraction ? 1 : 0) << ',' << (report.doubly_stochastic ? 1 : 0)
        << ',' << (report.a2_verified ? 1 : 0);

    append_flattened(header, row, "Gamma1", report.gamma);
    append_flattened(header, row, "GammaTilde1", report.gamma_tilde);
    if (report.sqrt_n) {
        append_flattened(header, row, "Lambda1", report.sqrt_n->lambda);
        append_flattened(header, row, "Sigma1", report.sqrt_n->sigma);
        append_flattened(header, row, "SigmaTilde1", report.sqrt_n->sigma_tilde);
    }
    if (report.critical) {
        append_flattened(header, row, "Lambda2", report.critical->lambda);
        append_flattened(header, row, "Sigma2", report.critical->sigma);
        append_flattened(header, row, "SigmaTilde2", report.critical->sigma_tilde);
    }
    return csv_header_block(config) + header.str() + "\n" + row.str() + "\n";
}

std::string trajectory_to_csv(const Trajectory& trajectory) {
    const Eigen::Index k = trajectory.config.k();
    std::ostringstream out;
    out << csv_header_block(trajectory.config);
    out << "n";
    for (Eigen::Index j = 1; j <= k; ++j) out << ",Y_" << j;
    for (Eigen::Index j = 1; j <= k; ++j) out << ",Ytilde_" << j;
    out << "\n";
    for (const auto& cp : trajectory.checkpoints) {
        out << cp.n;
        for (Eigen::Index j = 0; j < k; ++j) out << ',' << format_double(cp.proportions[j]);
        for (Eigen::Index j = 0; j < k; ++j)
            out << ',' << format_double(cp.count_proportions[j]);
        out << "\n";
    }
    return out.str();
}

Json trajectory_to_json(const Trajectory& trajectory) {
    Json out;
    out["meta"] = meta_json(trajectory.config);
    out["seed"] = trajectory.seed;
    Json checkpoints = Json::array();
    for (const auto& cp : trajectory.checkpoints) {
        checkpoints.push_back(Json{{"n", cp.n},
                                   {"Y", vector_to_json(cp.proportions)},
                                   {"Ytilde", vector_to_json(cp.count_proportions)}});
    }
    out["checkpoints"] = std::move(checkpoints);
    const AccountingReport acc = verify_accounting(trajectory);
    out["accounting"] = Json{{"mass_ok", acc.mass_ok},
                             {"counts_ok", acc.counts_ok},
                             {"linear_ok", acc.linear_ok},
                             {"martingale_ok", acc.martingale_ok},
                             {"mass_residual", acc.mass_residual},
                             {"linear_residual", acc.linear_residual},
                             {"martingale_norm2_max", acc.martingale_norm2_max}};
    return out;
}

Json summary_to_json(const EnsembleSummary& summary) {
    Json out;
    out["meta"] = meta_json(summary.config);
    out["replicas"] = summary.replicas;
    out["seeds"] = summary.replica_seeds;
    out["regime"] = regime_label(summary.regime);
    out["rho"] = summary.rho;
    out["nu"] = summary.nu;
    out["a2_verified"] = summary.a2_verified;
    out["y_limit"] = vector_to_json(summary.y_limit);
    out["y_tilde_limit"] = vector_to_json(summary.y_tilde_limit);
    out["accounting"] = Json{{"ok", summary.accounting_ok},
                             {"max_mass_residual", summary.max_mass_residual},
                             {"max_linear_residual", summary.max_linear_residual},
                             {"max_martingale_norm2", summary.max_martingale_norm2}};
    Json checkpoints = Json::array();
    for (const auto& cp : summary.checkpoints) {
        checkpoints.push_back(Json{{"n", cp.n},
                                   {"scaling", cp.scaling},
                                   {"mean_Y", vector_to_json(cp.mean_y)},
                                   {"mean_Ytilde", vector_to_json(cp.mean_y_tilde)},
                                   {"dist", cp.mean_dist},
                                   {"dist_tilde", cp.mean_dist_tilde},
                                   {"cov_scaled_Y", matrix_to_json(cp.cov_scaled_y)},
                                   {"cov_scaled_Ytilde", matrix_to_json(cp.cov_scaled_y_tilde)},
                                   {"ks_Y", vector_to_json(cp.ks_y)},
                                   {"ks_Ytilde", vector_to_json(cp.ks_y_tilde)}});
    }
    out["checkpoints"] = std::move(checkpoints);
    out["mahalanobis"] = Json{{"levels", summary.mahalanobis_levels},
                              {"exceedance_fractions", summary.mahalanobis_fractions}};
    out["notes"] = summary.notes;
    return out;
}

std::string summary_to_csv(const EnsembleSummary& summary) {
    const Eigen::Index k = summary.config.k();
    std::ostringstream out;
    out << csv_header_block(summary.config);
    out << "n";
    for (Eigen::Index j = 1; j <= k; ++j) out << ",mean_Y_" << j;
    out << ",dist";
    for (Eigen::Index i = 1; i <= k; ++i)
        for (Eigen::Index j = 1; j <= k; ++j) out << ",cov_" << i << '_' << j;
    for (Eigen::Index j = 1; j <= k; ++j) out << ",ks_" << j;
    out << "\n";
    for (const auto& cp : summary.checkpoints) {
        out << cp.n;
        for (Eigen::Index j = 0; j < k; ++j) out << ',' << format_double(cp.mean_y[j]);
        out << ',' << format_double(cp.mean_dist);
        for (Eigen::Index i = 0; i < k; ++i)
            for (Eigen::Index j = 0; j < k; ++j)
                out << ',' << format_double(cp.cov_scaled_y(i, j));
        for (Eigen::Index j = 0; j < k; ++j) out << ',' << format_double(cp.ks_y[j]);
        out << "\n";
    }
    return out.str();
}

RegionGrid region_grid(const std::string& family, Eigen::Index k, double theta_min,
                       double theta_max, int theta_points, double lambda_min,
                       double lambda_max, int lambda_points, double alpha) {
    if (family != "linear" && family != "inverse_power" && family != "exponential")
        throw std::invalid_argument(
            "region grid: family must be linear, inverse_power or exponential");
    if (theta_points < 1 || lambda_points < 1 || theta_max < theta_min ||
        lambda_max < lambda_min)
        throw std::invalid_argument("region grid: empty range");

    auto linspace = [](double lo, double hi, int points) {
        std::vector<double> grid(points);
        for (int i = 0; i < points; ++i)
            grid[i] = points == 1 ? lo : lo + (hi - lo) * i / (points - 1);
        return grid;
    };

    RegionGrid grid;
    grid.family = family;
    grid.k = k;
    grid.alpha = alpha;
    grid.theta_grid = linspace(theta_min, theta_max, theta_points);
    grid.lambda_grid = linspace(lambda_min, lambda_max, lambda_points);
    grid.rho.resize(theta_points, lambda_points);
    grid.boundary_mask.setZero(theta_points, lambda_points);
    grid.regimes.assign(theta_points, std::vector<Regime>(lambda_points, Regime::degenerate));

    for (int ti = 0; ti < theta_points; ++ti) {
        const double theta = grid.theta_grid[ti];
        WeightFunction w = family == "linear" ? WeightFunction::linear(theta)
                           : family == "inverse_power"
                               ? WeightFunction::inverse_power(theta, alpha)
                               : WeightFunction::exponential(theta);
        const double slope = drift_slope(w, k);

        int closest = -1;
        double closest_gap = std::numeric_limits<double>::infinity();
        for (int li = 0; li < lambda_points; ++li) {
            const double rho = std::max(0.0, 1.0 - slope * grid.lambda_grid[li]);
            grid.rho(ti, li) = rho;
            if (rho <= 1e-9)
                grid.regimes[ti][li] = Regime::degenerate;
            else if (std::abs(rho - 0.5) <= 1e-9)
                grid.regimes[ti][li] = Regime::clt_sqrt_n_over_log;
            else if (rho > 0.5)
                grid.regimes[ti][li] = Regime::clt_sqrt_n;
            else
                grid.regimes[ti][li] = Regime::slow;
            const double gap = std::abs(rho - 0.5);
            if (gap < closest_gap) {
                closest_gap = gap;
                closest = li;
            }
        }
        // Mark the closest cell only when the boundary passes within one cell.
        const double lambda_step =
            lambda_points > 1 ? grid.lambda_grid[1] - grid.lambda_grid[0] : 0.0;
        if (closest >= 0 && closest_gap <= std::abs(slope) * lambda_step + 1e-12)
            grid.boundary_mask(ti, closest) = 1;

        // Analytic rho = 1/2 line: lambda = 1/(2b).
        if (slope < 0.0) {
            const double lambda_b = 1.0 / (2.0 * slope);
            if (lambda_b >= lambda_min - 1e-12 && lambda_b <= lambda_max + 1e-12)
                grid.boundary.emplace_back(theta, lambda_b);
        }
    }
    return grid;
}

std::string region_to_csv(const RegionGrid& grid) {
    std::ostringstream out;
    out << "# negurn " << kVersion << "\n# family=" << grid.family << " k=" << grid.k;
    if (grid.family == "inverse_power") out << " alpha=" << format_double(grid.alpha);
    out << "\n";
    out << "theta,re_lambda_s";
    if (grid.k == 2) out << ",p";
    out << ",rho,regime,boundary\n";
    for (std::size_t ti = 0; ti < grid.theta_grid.size(); ++ti)
        for (std::size_t li = 0; li < grid.lambda_grid.size(); ++li) {
            out << format_double(grid.theta_grid[ti]) << ','
                << format_double(grid.lambda_grid[li]);
            if (grid.k == 2) out << ',' << format_double(0.5 * (1.0 + grid.lambda_grid[li]));
            out << ','
                << format_double(grid.rho(static_cast<Eigen::Index>(ti),
                                          static_cast<Eigen::Index>(li)))
                << ',' << regime_label(grid.regimes[ti][li]) << ','
                << grid.boundary_mask(static_cast<Eigen::Index>(ti),
                                      static_cast<Eigen::Index>(li))
                << "\n";
        }
    return out.str();
}

Json region_to_json(const RegionGrid& grid) {
    Json out;
    out["meta"] = Json{{"version", kVersion}};
    out["family"] = grid.family;
    out["k"] = grid.k;
    if (grid.family == "inverse_power") out["alpha"] = grid.alpha;
    out["theta_grid"] = grid.theta_grid;
    out["lambda_grid"] = grid.lambda_grid;
    out["rho"] = matrix_to_json(grid.rho);
    Json regimes = Json::array();
    for (const auto& row : grid.regimes) {
        Json json_row = Json::array();
        for (Regime regime : row) json_row.push_back(regime_label(regime));
        regimes.push_back(std::move(json_row));
    }
    out["regimes"] = std::move(regimes);
    Json boundary = Json::array();
    for (const auto& [theta, lambda] : grid.boundary)
        boundary.push_back(Json{{"theta", theta}, {"lambda", lambda}});
    out["boundary"] = std::move(boundary);
    return out;
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
    out << content;
}

}  // namespace negurn
