#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "grm/agents.hpp"
#include "grm/envs.hpp"
#include "grm/oracle.hpp"

namespace grm {

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

struct EnvConfig {
    std::string name = "cliff";  // cliff, long_cliff, key_door
    CliffWalkConfig cliff;
    KeyDoorConfig key_door;
};

struct AgentConfig {
    double lr = 0.1;
    int episodes = 5000;
    double eps_start = 1.0;
    double eps_decay = 5e-3;
    double eps_min = 0.1;
    double gamma = 0.99;
};

struct ImConfig {
    std::string kind = "none";  // none, count, rnd
    double alpha = 1.0;
    double rnd_lr = 1e-6;
    double rnd_scale = 1000.0;
    std::size_t rnd_hidden = 16;
    std::size_t rnd_output = 8;
    double rnd_init_range = 0.05;
    bool normalize = false;
};

struct ShapingConfig {
    std::string kind = "none";  // none, raw, pbim, grm_delay, classic_pbrs
    int delay = 1;
    bool normalized = false;
    bool grzes_final_zero = false;
    std::string potential = "zero";  // zero, vstar
};

struct ExperimentConfig {
    std::string name = "experiment";
    EnvConfig env;
    AgentConfig agent;
    ImConfig im;
    ShapingConfig shaping;
    int replicates = 10;
    std::uint64_t base_seed = 0;
    std::string output_dir = "runs";
    int eval_episodes = 10;
    int window_start = 500;  // training-return window reported in the summary
    int window_end = 1500;
    int workers = 0;  // 0: one per hardware thread

    /// Raw rewards are mean-adjusted when either im.normalize or shaping.normalized is set.
    bool normalize() const { return im.normalize || shaping.normalized; }
    /// Throws ConfigError naming every offending key.
    void validate() const;
};

/// Parses TOML text. Unknown keys and type mismatches raise ConfigError.
ExperimentConfig parse_config(const std::string& toml_text);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Sets `dotted_key` (e.g. "agent.lr") to `value`, written as a TOML literal,
/// in the document and re-parses it.
std::string override_config_value(const std::string& toml_text, const std::string& dotted_key,
                                  const std::string& value);

/// Output root: $GRM_OUT when set, otherwise config.output_dir.
std::filesystem::path resolve_output_dir(const ExperimentConfig& config);

std::unique_ptr<DeterministicEnv> make_env(const EnvConfig& env, double gamma);

// ---------------------------------------------------------------------------
// Runs
// ---------------------------------------------------------------------------

struct EpisodeRow {
    int episode = 0;
    int steps = 0;
    double extrinsic_return = 0.0;
    double intrinsic_raw_sum = 0.0;
    double shaped_sum = 0.0;  // what was added to the extrinsic reward
    double epsilon = 0.0;
};

struct RunLog {
    int replicate = 0;
    std::uint64_t seed = 0;
    bool ok = true;
    std::string error;
    std::vector<EpisodeRow> rows;
    double greedy_return = 0.0;  // mean over evaluation episodes
    double greedy_length = 0.0;
    double greedy_success = 0.0;  // fraction of evaluation episodes ending at the goal
    std::vector<ActionId> greedy_policy;
    std::optional<QTable> q;
    double wall_seconds = 0.0;  // reported on stderr only, never written to files

    double mean_return(int first_episode, int end_episode) const;
};

/// One isolated training run followed by greedy evaluation with epsilon = 0.
RunLog run_replicate(const ExperimentConfig& config, int replicate);

struct Stats {
    double mean = 0.0;
    double std = 0.0;  // sample standard deviation, 0 below two values
    std::size_t count = 0;
};
Stats describe(const std::vector<double>& values);

struct ExperimentResult {
    ExperimentConfig config;
    std::vector<RunLog> runs;
    nlohmann::json summary;
};

/// Runs every replicate (concurrently, each fully isolated) and aggregates.
ExperimentResult run_experiment(const ExperimentConfig& config);

/// Writes run_<i>.csv, q_<i>.csv, policy_<i>.txt, greedy.csv and summary.json
/// under `dir`.
void write_experiment(const ExperimentResult& result, const std::filesystem::path& dir);

void write_run_csv(std::ostream& out, const RunLog& run);

// ---------------------------------------------------------------------------
// Verification sweeps
// ---------------------------------------------------------------------------

/// Small random-MDP shapes cycled by instance index; all stay far below the
/// oracle caps.
RandomMdpConfig sweep_instance_config(std::uint64_t seed, std::size_t index);

struct SweepOutcome {
    std::string spec;
    std::size_t passed = 0;
    std::size_t failed = 0;
    std::size_t capacity_errors = 0;
    bool expect_pass = true;  // false for "raw": counterexamples are expected
    std::vector<std::size_t> failing_instances;
    bool ok() const { return expect_pass ? failed == 0 && capacity_errors == 0 : failed > 0; }
};

struct SweepReport {
    std::size_t count = 0;
    std::uint64_t seed = 0;
    std::vector<SweepOutcome> outcomes;
    bool ok() const;
};
void to_json(nlohmann::json& j, const SweepReport& report);

/// Valid matchings run on `count` random MDPs with CountBonus(1); "raw" runs
/// on `count` seeded procrastination fixtures. Throws ConfigError if count is 0.
SweepReport verify_sweep(std::size_t count, std::uint64_t seed, const std::vector<std::string>& specs);

// ---------------------------------------------------------------------------
// Plots
// ---------------------------------------------------------------------------

/// Centered-left moving average: mean of the last `window` values seen so far.
std::vector<double> moving_average(const std::vector<double>& values, std::size_t window);

/// Renders returns.svg, lengths.svg and policy_<i>.svg from a directory written
/// by write_experiment. Returns the files written. Throws ConfigError when the
/// run logs disagree in length.
std::vector<std::filesystem::path> plot_directory(const std::filesystem::path& dir, std::size_t window = 50);

}  // namespace grm
