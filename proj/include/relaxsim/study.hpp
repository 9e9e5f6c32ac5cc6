#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "relaxsim/analysis.hpp"

namespace relaxsim {

// Full description of a run. Values come from, in increasing precedence:
// built-in defaults, a preset, a config file, command-line flags.
struct StudyConfig {
    std::string setting = "setting1";
    double c_sigma = 0.0;
    bool c_sigma_set = false;          // setting3 requires an explicit value
    double sigma_pi = 0.2;
    double horizon = 5.0;              // T
    double x0 = 0.0;
    int fine_steps = 0;                // N_fine; 0 = max of step_list
    std::vector<int> step_list = {50, 100, 200, 500, 1000};
    int runs = 10;
    int trajectories_per_run = 10000;
    std::uint64_t master_seed = 1234;
    std::string vol_mode = "auto";     // uncontrolled|naive|sqrt|both|auto
    int quadrature_order = 10;
    std::string costs = "default";     // default|zero
    std::string output_dir;            // empty = $RELAXSIM_OUTPUT_DIR or "."
    int threads = 1;
    bool dump_trajectories = false;
    std::vector<int> trajectory_indices = {0, 1, 2, 3};
};

// Environment variable consulted when output_dir is empty.
inline constexpr const char* kOutputDirEnv = "RELAXSIM_OUTPUT_DIR";

// Applies one of the named presets on top of cfg:
//   paper-setting1|2|3  full-scale protocol for the given setting
//   ci                  reduced trajectory count for quick runs
void apply_preset(StudyConfig& cfg, const std::string& preset);

// Parses a flat key = value document ('#' starts a comment) on top of the
// defaults. Unknown keys and violated invariants raise ConfigError naming
// the field.
StudyConfig parse_config(const std::string& text);

// Same, but starting from an existing config (e.g. after a preset).
StudyConfig parse_config(const std::string& text, StudyConfig base);

// Re-checks every invariant; called after flags are merged in.
void validate_config(const StudyConfig& cfg);

// Derived pieces.
ModelSpec config_model(const StudyConfig& cfg);
FeedbackPolicy config_policy(const StudyConfig& cfg);
CostSpec config_costs(const StudyConfig& cfg);
StudyParams config_params(const StudyConfig& cfg);
std::string config_output_dir(const StudyConfig& cfg);
// Volatility modes the config asks for ("both" expands, "auto" picks
// uncontrolled for settings 1-2 and both for setting3).
std::vector<VolMode> config_vol_modes(const StudyConfig& cfg);

const char* vol_mode_name(VolMode mode);

// Convergence study + rate fit; writes convergence_<tag>.csv and
// ratefit_<tag>.json per volatility mode, plus trajectory CSVs when
// requested. Returns the paths written.
std::vector<std::string> run_study(const StudyConfig& cfg);

// Coupled sample paths for the configured trajectory indices at each N.
std::vector<std::string> run_trajectories(const StudyConfig& cfg);

// Cost-gap study; writes costgap_<tag>.csv per volatility mode.
std::vector<std::string> run_cost_gap(const StudyConfig& cfg);

// Quadrature self-test; prints one line per checked moment to os and throws
// ConfigError if any check fails.
void run_quadrature_check(const StudyConfig& cfg, std::ostream& os);

} // namespace relaxsim
