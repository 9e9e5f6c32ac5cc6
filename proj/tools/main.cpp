#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "relaxsim/errors.hpp"
#include "relaxsim/study.hpp"

namespace {

struct CliOptions {
    std::string config_path;
    std::string preset;
    relaxsim::StudyConfig cfg;

    // Flags override file values, so remember which were given.
    std::string setting, vol_mode, costs, output_dir, step_list, trajectory_indices;
    double c_sigma = 0.0, sigma_pi = 0.0, horizon = 0.0, x0 = 0.0;
    long long runs = 0, trajectories_per_run = 0, fine_steps = 0, quadrature_order = 0,
              threads = -1;
    unsigned long long master_seed = 0;
    bool dump_trajectories = false;
};

void add_common_options(CLI::App* cmd, CliOptions& opt) {
    cmd->add_option("--config", opt.config_path, "Config file (key = value lines)");
    cmd->add_option("--preset", opt.preset,
                    "Named preset: paper-setting1|paper-setting2|paper-setting3|ci");
    cmd->add_option("--setting", opt.setting, "Model id: setting1|setting2|setting3");
    cmd->add_option("--c-sigma", opt.c_sigma, "Volatility control constant (setting3)");
    cmd->add_option("--sigma-pi", opt.sigma_pi, "Policy standard deviation");
    cmd->add_option("--T", opt.horizon, "Time horizon");
    cmd->add_option("--x0", opt.x0, "Initial state (broadcast over components)");
    cmd->add_option("--N-fine", opt.fine_steps, "Finest grid size (default max of N list)");
    cmd->add_option("--N-list", opt.step_list, "Comma-separated step counts");
    cmd->add_option("--runs", opt.runs, "Monte Carlo runs");
    cmd->add_option("--trajectories-per-run", opt.trajectories_per_run, "Trajectories per run");
    cmd->add_option("--seed", opt.master_seed, "Master seed");
    cmd->add_option("--vol-mode", opt.vol_mode,
                    "Relaxed volatility: uncontrolled|naive|sqrt|both|auto");
    cmd->add_option("--quadrature-order", opt.quadrature_order, "Gauss-Hermite order");
    cmd->add_option("--costs", opt.costs, "Cost selector: default|zero");
    cmd->add_option("--out", opt.output_dir,
                    "Output directory (default $RELAXSIM_OUTPUT_DIR or .)");
    cmd->add_option("--threads", opt.threads, "Worker threads, 0 = all cores");
    cmd->add_option("--trajectory-indices", opt.trajectory_indices,
                    "Comma-separated trajectory indices for path dumps");
}

std::vector<int> parse_list(const std::string& text) {
    std::vector<int> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) {
            out.push_back(std::stoi(item));
        }
    }
    return out;
}

relaxsim::StudyConfig build_config(const CLI::App* cmd, CliOptions& opt) {
    relaxsim::StudyConfig cfg;
    if (!opt.preset.empty()) {
        relaxsim::apply_preset(cfg, opt.preset);
    }
    if (!opt.config_path.empty()) {
        std::ifstream is(opt.config_path);
        if (!is) {
            throw relaxsim::IoError("cannot read config file '" + opt.config_path + "'");
        }
        std::stringstream buffer;
        buffer << is.rdbuf();
        cfg = relaxsim::parse_config(buffer.str(), cfg);
    }
    auto given = [cmd](const std::string& name) { return cmd->count(name) > 0; };
    if (given("--setting")) {
        cfg.setting = opt.setting;
    }
    if (given("--c-sigma")) {
        cfg.c_sigma = opt.c_sigma;
        cfg.c_sigma_set = true;
    }
    if (given("--sigma-pi")) {
        cfg.sigma_pi = opt.sigma_pi;
    }
    if (given("--T")) {
        cfg.horizon = opt.horizon;
    }
    if (given("--x0")) {
        cfg.x0 = opt.x0;
    }
    if (given("--N-fine")) {
        cfg.fine_steps = static_cast<int>(opt.fine_steps);
    }
    if (given("--N-list")) {
        cfg.step_list = parse_list(opt.step_list);
    }
    if (given("--runs")) {
        cfg.runs = static_cast<int>(opt.runs);
    }
    if (given("--trajectories-per-run")) {
        cfg.trajectories_per_run = static_cast<int>(opt.trajectories_per_run);
    }
    if (given("--seed")) {
        cfg.master_seed = opt.master_seed;
    }
    if (given("--vol-mode")) {
        cfg.vol_mode = opt.vol_mode;
    }
    if (given("--quadrature-order")) {
        cfg.quadrature_order = static_cast<int>(opt.quadrature_order);
    }
    if (given("--costs")) {
        cfg.costs = opt.costs;
    }
    if (given("--out")) {
        cfg.output_dir = opt.output_dir;
    }
    if (given("--threads")) {
        cfg.threads = static_cast<int>(opt.threads);
    }
    if (given("--trajectory-indices")) {
        cfg.trajectory_indices = parse_list(opt.trajectory_indices);
    }
    cfg.dump_trajectories = opt.dump_trajectories;
    relaxsim::validate_config(cfg);
    return cfg;
}

void print_error(const char* kind, const std::string& message) {
    std::cerr << "{\"error\":{\"type\":\"" << kind << "\",\"message\":\"";
    for (char c : message) {
        if (c == '"' || c == '\\') {
            std::cerr << '\\';
        }
        std::cerr << c;
    }
    std::cerr << "\"}}" << std::endl;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Strong-error studies for relaxed vs randomized-action SDE schemes"};
    app.require_subcommand(1);

    CliOptions opt;
    CLI::App* study = app.add_subcommand("study", "Convergence study and log-log rate fit");
    add_common_options(study, opt);
    study->add_flag("--dump-trajectories", opt.dump_trajectories,
                    "Also write coupled sample paths");
    CLI::App* trajectories =
        app.add_subcommand("trajectories", "Coupled sample paths at each N");
    add_common_options(trajectories, opt);
    CLI::App* cost_gap =
        app.add_subcommand("cost-gap", "Expected-cost gap between the two schemes");
    add_common_options(cost_gap, opt);
    CLI::App* quad_check = app.add_subcommand("quadrature-check", "Quadrature self-test");
    add_common_options(quad_check, opt);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }

    try {
        CLI::App* active = app.get_subcommands().front();
        const relaxsim::StudyConfig cfg = build_config(active, opt);
        std::vector<std::string> files;
        if (active == study) {
            files = relaxsim::run_study(cfg);
        } else if (active == trajectories) {
            files = relaxsim::run_trajectories(cfg);
        } else if (active == cost_gap) {
            files = relaxsim::run_cost_gap(cfg);
        } else {
            relaxsim::run_quadrature_check(cfg, std::cout);
        }
        for (const auto& f : files) {
            std::cout << f << "\n";
        }
        return 0;
    } catch (const relaxsim::ConfigError& e) {
        print_error("config", e.what());
        return 2;
    } catch (const relaxsim::DomainError& e) {
        print_error("config", e.what());
        return 2;
    } catch (const relaxsim::DivergenceError& e) {
        print_error("divergence", e.what());
        return 3;
    } catch (const relaxsim::IoError& e) {
        print_error("io", e.what());
        return 4;
    } catch (const std::exception& e) {
        print_error("internal", e.what());
        return 1;
    }
}
