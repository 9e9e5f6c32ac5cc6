#include "relaxsim/study.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "relaxsim/errors.hpp"
#include "relaxsim/noise.hpp"

namespace relaxsim {

namespace {

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos) {
        return "";
    }
    const auto end = s.find_last_not_of(" \t\r\n");
    return s.substr(begin, end - begin + 1);
}

double parse_double(const std::string& key, const std::string& value) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(value, &pos);
        if (pos != value.size()) {
            throw std::invalid_argument(value);
        }
        return v;
    } catch (const std::exception&) {
        throw ConfigError("config: field '" + key + "' expects a real number, got '" + value +
                          "'");
    }
}

long long parse_int(const std::string& key, const std::string& value) {
    try {
        std::size_t pos = 0;
        const long long v = std::stoll(value, &pos);
        if (pos != value.size()) {
            throw std::invalid_argument(value);
        }
        return v;
    } catch (const std::exception&) {
        throw ConfigError("config: field '" + key + "' expects an integer, got '" + value + "'");
    }
}

std::vector<int> parse_int_list(const std::string& key, const std::string& value) {
    std::vector<int> out;
    std::stringstream ss(value);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) {
            out.push_back(static_cast<int>(parse_int(key, item)));
        }
    }
    if (out.empty()) {
        throw ConfigError("config: field '" + key + "' expects a comma-separated integer list");
    }
    return out;
}

bool parse_bool(const std::string& key, const std::string& value) {
    if (value == "true" || value == "1" || value == "yes") {
        return true;
    }
    if (value == "false" || value == "0" || value == "no") {
        return false;
    }
    throw ConfigError("config: field '" + key + "' expects true or false, got '" + value + "'");
}

void set_field(StudyConfig& cfg, const std::string& key, const std::string& value) {
    if (key == "setting") {
        cfg.setting = value;
    } else if (key == "c_sigma") {
        cfg.c_sigma = parse_double(key, value);
        cfg.c_sigma_set = true;
    } else if (key == "sigma_pi") {
        cfg.sigma_pi = parse_double(key, value);
    } else if (key == "T" || key == "horizon") {
        cfg.horizon = parse_double(key, value);
    } else if (key == "x0") {
        cfg.x0 = parse_double(key, value);
    } else if (key == "N_fine") {
        cfg.fine_steps = static_cast<int>(parse_int(key, value));
    } else if (key == "N_list") {
        cfg.step_list = parse_int_list(key, value);
    } else if (key == "runs") {
        cfg.runs = static_cast<int>(parse_int(key, value));
    } else if (key == "trajectories_per_run") {
        cfg.trajectories_per_run = static_cast<int>(parse_int(key, value));
    } else if (key == "master_seed") {
        cfg.master_seed = static_cast<std::uint64_t>(parse_int(key, value));
    } else if (key == "vol_mode") {
        cfg.vol_mode = value;
    } else if (key == "quadrature_order") {
        cfg.quadrature_order = static_cast<int>(parse_int(key, value));
    } else if (key == "costs") {
        cfg.costs = value;
    } else if (key == "output_dir") {
        cfg.output_dir = value;
    } else if (key == "threads") {
        cfg.threads = static_cast<int>(parse_int(key, value));
    } else if (key == "dump_trajectories") {
        cfg.dump_trajectories = parse_bool(key, value);
    } else if (key == "trajectory_indices") {
        cfg.trajectory_indices = parse_int_list(key, value);
    } else {
        throw ConfigError("config: unknown field '" + key + "'");
    }
}

std::string study_tag(const StudyConfig& cfg, VolMode mode) {
    if (cfg.setting == "setting3") {
        return cfg.setting + "_" + vol_mode_name(mode);
    }
    return cfg.setting;
}

std::ofstream open_output(const std::filesystem::path& path) {
    std::ofstream os(path);
    if (!os) {
        throw IoError("cannot open '" + path.string() + "' for writing");
    }
    return os;
}

VolMode parse_vol_mode(const std::string& name) {
    if (name == "uncontrolled") {
        return VolMode::uncontrolled;
    }
    if (name == "naive") {
        return VolMode::naive;
    }
    if (name == "sqrt") {
        return VolMode::sqrt;
    }
    throw ConfigError("config: field 'vol_mode' expects uncontrolled, naive, sqrt or both, got '" +
                      name + "'");
}

} // namespace

const char* vol_mode_name(VolMode mode) {
    switch (mode) {
    case VolMode::uncontrolled:
        return "uncontrolled";
    case VolMode::naive:
        return "naive";
    case VolMode::sqrt:
        return "sqrt";
    }
    return "?";
}

void apply_preset(StudyConfig& cfg, const std::string& preset) {
    if (preset == "paper-setting1" || preset == "paper-setting2" || preset == "paper-setting3") {
        cfg.setting = preset.substr(6);
        cfg.horizon = 5.0;
        cfg.step_list = {50, 100, 200, 500, 1000};
        cfg.fine_steps = 0;
        cfg.runs = 10;
        cfg.trajectories_per_run = 10000;
        cfg.quadrature_order = 10;
        if (cfg.setting == "setting3" && !cfg.c_sigma_set) {
            cfg.c_sigma = 0.2;
            cfg.c_sigma_set = true;
        }
    } else if (preset == "ci") {
        cfg.runs = 3;
        cfg.trajectories_per_run = 200;
    } else {
        throw ConfigError("unknown preset '" + preset +
                          "' (expected paper-setting1|2|3 or ci)");
    }
}

StudyConfig parse_config(const std::string& text) {
    return parse_config(text, StudyConfig{});
}

StudyConfig parse_config(const std::string& text, StudyConfig base) {
    StudyConfig cfg = std::move(base);
    std::stringstream ss(text);
    std::string line;
    int line_no = 0;
    while (std::getline(ss, line)) {
        ++line_no;
        const auto comment = line.find('#');
        if (comment != std::string::npos) {
            line = line.substr(0, comment);
        }
        line = trim(line);
        if (line.empty()) {
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("config: line " + std::to_string(line_no) +
                              " is not of the form key = value");
        }
        set_field(cfg, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    validate_config(cfg);
    return cfg;
}

void validate_config(const StudyConfig& cfg) {
    if (cfg.setting != "setting1" && cfg.setting != "setting2" && cfg.setting != "setting3") {
        throw ConfigError("config: field 'setting' expects setting1, setting2 or setting3, got '" +
                          cfg.setting + "'");
    }
    if (cfg.setting == "setting3" && !cfg.c_sigma_set) {
        throw ConfigError("config: setting3 requires field 'c_sigma'");
    }
    if (cfg.sigma_pi < 0.0) {
        throw ConfigError("config: field 'sigma_pi' must be nonnegative");
    }
    if (!(cfg.horizon > 0.0)) {
        throw ConfigError("config: field 'T' must be positive");
    }
    if (cfg.runs < 1) {
        throw ConfigError("config: field 'runs' must be >= 1");
    }
    if (cfg.trajectories_per_run < 1) {
        throw ConfigError("config: field 'trajectories_per_run' must be >= 1");
    }
    if (cfg.quadrature_order < 1) {
        throw ConfigError("config: field 'quadrature_order' must be >= 1");
    }
    if (cfg.step_list.empty()) {
        throw ConfigError("config: field 'N_list' must not be empty");
    }
    for (int n : cfg.step_list) {
        if (n < 1) {
            throw ConfigError("config: field 'N_list' entries must be >= 1");
        }
    }
    const int fine = cfg.fine_steps > 0
                         ? cfg.fine_steps
                         : *std::max_element(cfg.step_list.begin(), cfg.step_list.end());
    for (int n : cfg.step_list) {
        if (fine % n != 0) {
            throw ConfigError("config: N_list entry " + std::to_string(n) +
                              " does not divide N_fine " + std::to_string(fine));
        }
    }
    if (cfg.threads < 0) {
        throw ConfigError("config: field 'threads' must be >= 0");
    }
    if (cfg.vol_mode != "auto" && cfg.vol_mode != "both") {
        parse_vol_mode(cfg.vol_mode);
    }
    if (cfg.costs != "default" && cfg.costs != "zero") {
        throw ConfigError("config: field 'costs' expects default or zero, got '" + cfg.costs +
                          "'");
    }
    for (int idx : cfg.trajectory_indices) {
        if (idx < 0) {
            throw ConfigError("config: field 'trajectory_indices' entries must be >= 0");
        }
    }
}

ModelSpec config_model(const StudyConfig& cfg) {
    return builtin_setting(cfg.setting, cfg.c_sigma);
}

FeedbackPolicy config_policy(const StudyConfig& cfg) {
    return default_policy(cfg.sigma_pi);
}

CostSpec config_costs(const StudyConfig& cfg) {
    return cfg.costs == "zero" ? zero_costs() : default_costs();
}

StudyParams config_params(const StudyConfig& cfg) {
    StudyParams params;
    params.horizon = cfg.horizon;
    params.fine_steps = cfg.fine_steps > 0
                            ? cfg.fine_steps
                            : *std::max_element(cfg.step_list.begin(), cfg.step_list.end());
    params.x0 = cfg.x0;
    params.runs = cfg.runs;
    params.trajectories_per_run = cfg.trajectories_per_run;
    params.master_seed = cfg.master_seed;
    params.quadrature_order = cfg.quadrature_order;
    params.threads = cfg.threads;
    return params;
}

std::string config_output_dir(const StudyConfig& cfg) {
    if (!cfg.output_dir.empty()) {
        return cfg.output_dir;
    }
    if (const char* env = std::getenv(kOutputDirEnv)) {
        if (*env != '\0') {
            return env;
        }
    }
    return ".";
}

std::vector<VolMode> config_vol_modes(const StudyConfig& cfg) {
    if (cfg.vol_mode == "both") {
        return {VolMode::naive, VolMode::sqrt};
    }
    if (cfg.vol_mode == "auto") {
        if (cfg.setting == "setting3") {
            return {VolMode::naive, VolMode::sqrt};
        }
        return {VolMode::uncontrolled};
    }
    return {parse_vol_mode(cfg.vol_mode)};
}

std::vector<std::string> run_study(const StudyConfig& cfg) {
    validate_config(cfg);
    const ModelSpec model = config_model(cfg);
    const FeedbackPolicy policy = config_policy(cfg);
    StudyParams params = config_params(cfg);
    const std::filesystem::path out_dir(config_output_dir(cfg));
    std::filesystem::create_directories(out_dir);

    std::vector<std::string> written;
    for (VolMode mode : config_vol_modes(cfg)) {
        params.vol_mode = mode;
        const auto records = convergence_study(model, policy, cfg.step_list, params);
        const std::string tag = study_tag(cfg, mode);

        const auto csv_path = out_dir / ("convergence_" + tag + ".csv");
        {
            auto os = open_output(csv_path);
            write_convergence_csv(records, os);
        }
        written.push_back(csv_path.string());

        const auto json_path = out_dir / ("ratefit_" + tag + ".json");
        {
            auto os = open_output(json_path);
            const bool fittable =
                records.size() >= 2 &&
                std::all_of(records.begin(), records.end(),
                            [](const ConvergenceRecord& r) { return r.mean_sup_sq_error > 0.0; });
            if (fittable) {
                write_rate_fit_json(fit_rate(records), os);
            } else {
                // Degenerate studies (e.g. sigma_pi = 0) have no rate to fit.
                os << "{\n  \"slope\": null,\n  \"intercept\": null,\n  \"r_squared\": null,\n"
                      "  \"points\": []\n}\n";
            }
        }
        written.push_back(json_path.string());

        if (cfg.dump_trajectories) {
            StudyConfig sub = cfg;
            sub.vol_mode = vol_mode_name(mode);
            const auto files = run_trajectories(sub);
            written.insert(written.end(), files.begin(), files.end());
        }
    }
    return written;
}

std::vector<std::string> run_trajectories(const StudyConfig& cfg) {
    validate_config(cfg);
    const ModelSpec model = config_model(cfg);
    const FeedbackPolicy policy = config_policy(cfg);
    const StudyParams params = config_params(cfg);
    const GaussHermiteRule rule = build_rule(params.quadrature_order);
    const Vector x0 = Vector::Constant(model.state_dim, params.x0);
    const std::filesystem::path out_dir(config_output_dir(cfg));
    std::filesystem::create_directories(out_dir);

    std::vector<std::string> written;
    for (VolMode mode : config_vol_modes(cfg)) {
        const std::string tag = study_tag(cfg, mode);
        for (int steps : cfg.step_list) {
            const TimeGrid grid(cfg.horizon, steps);
            for (int idx : cfg.trajectory_indices) {
                const auto traj_index = static_cast<std::uint64_t>(idx);
                const BrownianLattice lattice =
                    generate_lattice(params.master_seed, traj_index, params.fine_steps,
                                     params.horizon, model.state_dim);
                const Matrix increments = coarsen(lattice, steps);
                const Matrix uniforms =
                    action_uniforms(params.master_seed, traj_index, steps, model.action_dim);
                const Trajectory relaxed =
                    simulate_relaxed(model, policy, grid, increments, x0, mode, rule);
                const Trajectory mixed =
                    simulate_mixed(model, policy, grid, increments, uniforms, x0);

                const auto base = "trajectory_" + tag + "_N" + std::to_string(steps) + "_i" +
                                  std::to_string(idx);
                const auto relaxed_path = out_dir / (base + "_relaxed.csv");
                {
                    auto os = open_output(relaxed_path);
                    write_trajectory_csv(relaxed, os);
                }
                written.push_back(relaxed_path.string());
                const auto mixed_path = out_dir / (base + "_mixed.csv");
                {
                    auto os = open_output(mixed_path);
                    write_trajectory_csv(mixed, os);
                }
                written.push_back(mixed_path.string());
            }
        }
    }
    return written;
}

std::vector<std::string> run_cost_gap(const StudyConfig& cfg) {
    validate_config(cfg);
    const ModelSpec model = config_model(cfg);
    const FeedbackPolicy policy = config_policy(cfg);
    const CostSpec costs = config_costs(cfg);
    StudyParams params = config_params(cfg);
    const std::filesystem::path out_dir(config_output_dir(cfg));
    std::filesystem::create_directories(out_dir);

    std::vector<std::string> written;
    for (VolMode mode : config_vol_modes(cfg)) {
        params.vol_mode = mode;
        const auto records = cost_gap_study(model, policy, costs, cfg.step_list, params);
        const auto path = out_dir / ("costgap_" + study_tag(cfg, mode) + ".csv");
        {
            auto os = open_output(path);
            write_cost_gap_csv(records, os);
        }
        written.push_back(path.string());
    }
    return written;
}

void run_quadrature_check(const StudyConfig& cfg, std::ostream& os) {
    const GaussHermiteRule rule = build_rule(cfg.quadrature_order);
    bool ok = true;
    auto report = [&](const std::string& label, double error, double tol) {
        const bool pass = error <= tol;
        ok = ok && pass;
        os << (pass ? "ok   " : "FAIL ") << label << "  error=" << error << "  tol=" << tol
           << "\n";
    };

    double weight_sum = 0.0;
    for (double w : rule.weights) {
        weight_sum += w;
    }
    report("weight sum = sqrt(pi)", std::abs(weight_sum / std::sqrt(M_PI) - 1.0), 1e-12);

    double asym = 0.0;
    for (int i = 0; i < rule.order; ++i) {
        asym = std::max(asym, std::abs(rule.nodes[static_cast<std::size_t>(i)] +
                                       rule.nodes[static_cast<std::size_t>(rule.order - 1 - i)]));
    }
    report("node symmetry", asym, 1e-12);

    // E[Z^k] for Z ~ N(0,1): (k-1)!! for even k, 0 for odd. Odd moments are
    // checked against the scale E[|Z|^k] = 2^{k/2} Gamma((k+1)/2) / sqrt(pi).
    for (int k = 1; k <= 2 * rule.order - 1; ++k) {
        const double approx = gaussian_expectation(
            [k](double t) { return std::pow(t, k); }, 0.0, 1.0, rule);
        const double scale =
            std::pow(2.0, 0.5 * k) * std::tgamma(0.5 * (k + 1)) / std::sqrt(M_PI);
        const double exact = (k % 2 == 0) ? scale : 0.0;
        report("moment k=" + std::to_string(k), std::abs(approx - exact) / scale, 1e-10);
    }
    if (!ok) {
        throw ConfigError("quadrature-check failed for order " +
                          std::to_string(cfg.quadrature_order));
    }
}

} // namespace relaxsim
