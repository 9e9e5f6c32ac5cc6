#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "relaxsim/errors.hpp"
#include "relaxsim/study.hpp"

using namespace relaxsim;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream is(path);
    REQUIRE(is.good());
    std::stringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

std::filesystem::path fresh_dir(const char* name) {
    const auto dir = std::filesystem::temp_directory_path() / name;
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

} // namespace

TEST_CASE("empty document yields the full default config") {
    const StudyConfig cfg = parse_config("");
    CHECK(cfg.setting == "setting1");
    CHECK(cfg.horizon == 5.0);
    CHECK(cfg.quadrature_order == 10);
    CHECK(cfg.sigma_pi == 0.2);
    CHECK(cfg.x0 == 0.0);
    CHECK(cfg.runs == 10);
    CHECK(cfg.trajectories_per_run == 10000);
    CHECK(cfg.step_list == std::vector<int>{50, 100, 200, 500, 1000});
    CHECK(cfg.fine_steps == 0);
    CHECK(cfg.master_seed == 1234);
    CHECK(cfg.vol_mode == "auto");
    CHECK(cfg.costs == "default");
}

TEST_CASE("config parsing handles comments, spacing and overrides") {
    const StudyConfig cfg = parse_config(
        "# comment line\n"
        "setting = setting2\n"
        "  T = 2.5   # trailing comment\n"
        "N_list = 10, 20,40\n"
        "runs=4\n"
        "trajectories_per_run = 50\n"
        "master_seed = 99\n"
        "threads = 0\n");
    CHECK(cfg.setting == "setting2");
    CHECK(cfg.horizon == 2.5);
    CHECK(cfg.step_list == std::vector<int>{10, 20, 40});
    CHECK(cfg.runs == 4);
    CHECK(cfg.master_seed == 99);
    CHECK(cfg.threads == 0);
}

TEST_CASE("config invariants are enforced with the field named") {
    auto message_of = [](const std::string& text) {
        try {
            parse_config(text);
            return std::string("no error");
        } catch (const ConfigError& e) {
            return std::string(e.what());
        }
    };
    CHECK(message_of("N_list = 300,1000\nN_fine = 1000\n").find("300") != std::string::npos);
    CHECK(message_of("setting = setting3\n").find("c_sigma") != std::string::npos);
    CHECK(message_of("nonsense_key = 1\n").find("nonsense_key") != std::string::npos);
    CHECK(message_of("runs = 0\n").find("runs") != std::string::npos);
    CHECK(message_of("sigma_pi = -0.5\n").find("sigma_pi") != std::string::npos);
    CHECK(message_of("T = -1\n").find("T") != std::string::npos);
    CHECK(message_of("vol_mode = weird\n").find("vol_mode") != std::string::npos);
    CHECK(message_of("quadrature_order = 0\n").find("quadrature_order") != std::string::npos);
    CHECK(message_of("runs = abc\n").find("integer") != std::string::npos);
    CHECK(message_of("just a line without equals\n").find("key = value") != std::string::npos);
}

TEST_CASE("setting3 with c_sigma parses") {
    const StudyConfig cfg = parse_config("setting = setting3\nc_sigma = 0.2\n");
    CHECK(cfg.c_sigma == 0.2);
    CHECK(cfg.c_sigma_set);
}

TEST_CASE("presets") {
    StudyConfig cfg;
    apply_preset(cfg, "ci");
    CHECK(cfg.runs == 3);
    CHECK(cfg.trajectories_per_run == 200);

    StudyConfig paper;
    apply_preset(paper, "paper-setting3");
    CHECK(paper.setting == "setting3");
    CHECK(paper.c_sigma == 0.2);
    CHECK(paper.runs == 10);
    CHECK(paper.trajectories_per_run == 10000);

    CHECK_THROWS_AS(apply_preset(cfg, "paper-setting9"), ConfigError);
}

TEST_CASE("config stacks on top of a preset") {
    StudyConfig base;
    apply_preset(base, "paper-setting2");
    const StudyConfig cfg = parse_config("runs = 2\n", base);
    CHECK(cfg.setting == "setting2");
    CHECK(cfg.runs == 2);
    CHECK(cfg.trajectories_per_run == 10000);
}

TEST_CASE("volatility mode resolution") {
    StudyConfig cfg;
    cfg.setting = "setting1";
    CHECK(config_vol_modes(cfg) == std::vector<VolMode>{VolMode::uncontrolled});
    cfg.setting = "setting3";
    cfg.c_sigma_set = true;
    CHECK(config_vol_modes(cfg) == std::vector<VolMode>{VolMode::naive, VolMode::sqrt});
    cfg.vol_mode = "sqrt";
    CHECK(config_vol_modes(cfg) == std::vector<VolMode>{VolMode::sqrt});
    cfg.vol_mode = "both";
    CHECK(config_vol_modes(cfg).size() == 2);
}

TEST_CASE("output directory resolution prefers explicit over environment") {
    StudyConfig cfg;
    cfg.output_dir = "/tmp/explicit";
    CHECK(config_output_dir(cfg) == "/tmp/explicit");
    cfg.output_dir.clear();
    setenv(kOutputDirEnv, "/tmp/from-env", 1);
    CHECK(config_output_dir(cfg) == "/tmp/from-env");
    unsetenv(kOutputDirEnv);
    CHECK(config_output_dir(cfg) == ".");
}

TEST_CASE("run_study writes the convergence CSV and rate fit") {
    const auto dir = fresh_dir("relaxsim_test_study");
    StudyConfig cfg;
    cfg.step_list = {10, 20, 40};
    cfg.runs = 2;
    cfg.trajectories_per_run = 30;
    cfg.threads = 2;
    cfg.output_dir = dir.string();
    const auto files = run_study(cfg);
    REQUIRE(files.size() == 2);
    const std::string csv = slurp(files[0]);
    CHECK(csv.rfind("N,mean_sup_sq_error,std_across_runs,runs,trajectories_per_run\n", 0) == 0);
    CHECK(csv.find("\n10,") != std::string::npos);
    const std::string json = slurp(files[1]);
    CHECK(json.find("\"slope\"") != std::string::npos);
    CHECK(json.find("\"points\"") != std::string::npos);

    // Re-running the same config produces byte-identical outputs.
    const auto again = run_study(cfg);
    CHECK(slurp(again[0]) == csv);
    CHECK(slurp(again[1]) == json);
    std::filesystem::remove_all(dir);
}

TEST_CASE("run_study with a degenerate policy writes a null fit") {
    const auto dir = fresh_dir("relaxsim_test_study_null");
    StudyConfig cfg;
    cfg.sigma_pi = 0.0;
    cfg.step_list = {10, 20};
    cfg.runs = 2;
    cfg.trajectories_per_run = 5;
    cfg.output_dir = dir.string();
    const auto files = run_study(cfg);
    const std::string json = slurp(files[1]);
    CHECK(json.find("\"slope\": null") != std::string::npos);
    std::filesystem::remove_all(dir);
}

TEST_CASE("run_study on setting3 emits one CSV per volatility mode") {
    const auto dir = fresh_dir("relaxsim_test_study3");
    StudyConfig cfg;
    cfg.setting = "setting3";
    cfg.c_sigma = 0.2;
    cfg.c_sigma_set = true;
    cfg.step_list = {10, 20};
    cfg.runs = 2;
    cfg.trajectories_per_run = 20;
    cfg.threads = 2;
    cfg.output_dir = dir.string();
    const auto files = run_study(cfg);
    REQUIRE(files.size() == 4);
    CHECK(files[0].find("setting3_naive") != std::string::npos);
    CHECK(files[2].find("setting3_sqrt") != std::string::npos);
    std::filesystem::remove_all(dir);
}

TEST_CASE("run_trajectories writes coupled sample paths per index and N") {
    const auto dir = fresh_dir("relaxsim_test_traj");
    StudyConfig cfg;
    cfg.step_list = {10, 20};
    cfg.trajectory_indices = {0, 3};
    cfg.output_dir = dir.string();
    const auto files = run_trajectories(cfg);
    CHECK(files.size() == 2 * 2 * 2);
    for (const auto& f : files) {
        const std::string text = slurp(f);
        CHECK(text.rfind("t,x0", 0) == 0);
    }
    CHECK(std::filesystem::exists(dir / "trajectory_setting1_N10_i0_relaxed.csv"));
    CHECK(std::filesystem::exists(dir / "trajectory_setting1_N20_i3_mixed.csv"));
    std::filesystem::remove_all(dir);
}

TEST_CASE("run_cost_gap writes the gap CSV") {
    const auto dir = fresh_dir("relaxsim_test_gap");
    StudyConfig cfg;
    cfg.step_list = {10, 40};
    cfg.runs = 2;
    cfg.trajectories_per_run = 25;
    cfg.threads = 2;
    cfg.output_dir = dir.string();
    const auto files = run_cost_gap(cfg);
    REQUIRE(files.size() == 1);
    const std::string csv = slurp(files[0]);
    CHECK(csv.rfind("N,cost_gap,", 0) == 0);
    std::filesystem::remove_all(dir);
}

TEST_CASE("quadrature self-test reports every moment") {
    StudyConfig cfg;
    std::ostringstream os;
    run_quadrature_check(cfg, os);
    const std::string text = os.str();
    CHECK(text.find("moment k=19") != std::string::npos);
    CHECK(text.find("FAIL") == std::string::npos);
}
