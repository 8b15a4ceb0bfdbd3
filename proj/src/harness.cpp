#include "grm/harness.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <set>
#include <sstream>
#include <thread>

#include "toml.hpp"

#include "grm/rollout.hpp"

namespace grm {

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

namespace {

/// Reads typed values out of a TOML table, remembering every key it was asked
/// about so leftovers can be reported as unknown.
class TomlReader {
public:
    explicit TomlReader(const toml::table& root) : root_(root) {}

    template <typename T>
    void read(const std::string& dotted, T& out) {
        known_.insert(dotted);
        const toml::node* node = root_.at_path(dotted).node();
        if (!node) return;
        if constexpr (std::is_same_v<T, bool>) {
            if (auto v = node->value_exact<bool>()) out = *v; else bad(dotted, "a boolean");
        } else if constexpr (std::is_same_v<T, std::string>) {
            if (auto v = node->value_exact<std::string>()) out = *v; else bad(dotted, "a string");
        } else if constexpr (std::is_floating_point_v<T>) {
            if (auto v = node->value<double>(); v && (node->is_floating_point() || node->is_integer())) out = *v;
            else bad(dotted, "a number");
        } else {
            auto v = node->value_exact<std::int64_t>();
            if (!v || (*v < 0 && std::is_unsigned_v<T>)) bad(dotted, "an integer");
            else out = static_cast<T>(*v);
        }
    }

    void read_pair(const std::string& dotted, std::pair<int, int>& out) {
        known_.insert(dotted);
        const toml::node* node = root_.at_path(dotted).node();
        if (!node) return;
        const toml::array* arr = node->as_array();
        if (!arr || arr->size() != 2 || !(*arr)[0].is_integer() || !(*arr)[1].is_integer()) {
            bad(dotted, "a [row, col] pair");
            return;
        }
        out = {static_cast<int>(*(*arr)[0].value<std::int64_t>()), static_cast<int>(*(*arr)[1].value<std::int64_t>())};
    }

    /// Throws ConfigError listing type errors and unknown keys.
    void finish() {
        collect_unknown(root_, "");
        if (problems_.empty()) return;
        std::string msg = "invalid config:";
        for (const auto& p : problems_) msg += "\n  " + p;
        throw ConfigError(msg);
    }

private:
    void bad(const std::string& key, const char* expected) { problems_.push_back(key + ": expected " + expected); }

    void collect_unknown(const toml::table& table, const std::string& prefix) {
        for (auto&& [k, v] : table) {
            const std::string key = prefix.empty() ? std::string(k.str()) : prefix + "." + std::string(k.str());
            if (const auto* sub = v.as_table()) collect_unknown(*sub, key);
            else if (!known_.count(key)) problems_.push_back(key + ": unknown key");
        }
    }

    const toml::table& root_;
    std::set<std::string> known_;
    std::vector<std::string> problems_;
};

toml::table parse_toml(const std::string& text) {
    try {
        return toml::parse(text);
    } catch (const toml::parse_error& e) {
        std::ostringstream msg;
        msg << "config parse error: " << e.description() << " (line " << e.source().begin.line << ")";
        throw ConfigError(msg.str());
    }
}

}  // namespace

void ExperimentConfig::validate() const {
    std::vector<std::string> problems;
    auto require = [&](bool ok, const std::string& what) {
        if (!ok) problems.push_back(what);
    };
    static const std::set<std::string> envs{"cliff", "long_cliff", "key_door"};
    static const std::set<std::string> ims{"none", "count", "rnd"};
    static const std::set<std::string> shapings{"none", "raw", "pbim", "grm_delay", "classic_pbrs"};
    require(envs.count(env.name) > 0, "env.name: expected cliff, long_cliff or key_door");
    require(agent.lr >= 0.0 && agent.lr <= 1.0, "agent.lr: expected a value in [0, 1]");
    require(agent.episodes >= 1, "agent.episodes: expected >= 1");
    require(agent.gamma > 0.0 && agent.gamma <= 1.0, "agent.gamma: expected a value in (0, 1]");
    require(agent.eps_decay >= 0.0, "agent.eps_decay: expected >= 0");
    require(agent.eps_min >= 0.0 && agent.eps_min <= 1.0, "agent.eps_min: expected a value in [0, 1]");
    require(ims.count(im.kind) > 0, "im.kind: expected none, count or rnd");
    require(im.alpha >= 0.0, "im.alpha: expected >= 0");
    require(im.rnd_lr >= 0.0, "im.rnd_lr: expected >= 0");
    require(im.rnd_scale >= 0.0, "im.rnd_scale: expected >= 0");
    require(im.rnd_hidden >= 1 && im.rnd_output >= 1, "im.rnd_hidden/im.rnd_output: expected >= 1");
    require(im.rnd_init_range >= 0.0, "im.rnd_init_range: expected >= 0");
    require(shapings.count(shaping.kind) > 0, "shaping.kind: expected none, raw, pbim, grm_delay or classic_pbrs");
    require(shaping.delay >= 0, "shaping.delay: expected >= 0");
    require(shaping.potential == "zero" || shaping.potential == "vstar", "shaping.potential: expected zero or vstar");
    const bool needs_im = shaping.kind == "raw" || shaping.kind == "pbim" || shaping.kind == "grm_delay";
    require(!needs_im || im.kind != "none", "im.kind: shaping.kind " + shaping.kind + " needs an intrinsic module");
    require(replicates >= 1, "experiment.replicates: expected >= 1");
    require(eval_episodes >= 1, "experiment.eval_episodes: expected >= 1");
    require(window_start >= 0 && window_end > window_start, "experiment.window: expected 0 <= start < end");
    require(workers >= 0, "experiment.workers: expected >= 0");
    if (!problems.empty()) {
        std::string msg = "invalid config:";
        for (const auto& p : problems) msg += "\n  " + p;
        throw ConfigError(msg);
    }
    try {
        if (env.name == "key_door") env.key_door.validate();
        else env.cliff.validate();
    } catch (const ConfigError& e) {
        throw ConfigError(std::string("invalid config:\n  env: ") + e.what());
    }
}

ExperimentConfig parse_config(const std::string& toml_text) {
    const toml::table root = parse_toml(toml_text);
    TomlReader r(root);
    ExperimentConfig c;
    r.read("name", c.name);

    r.read("env.name", c.env.name);
    if (c.env.name == "long_cliff") {
        c.env.cliff.width = 50;
        c.env.cliff.max_steps = 100;
    }
    r.read("env.width", c.env.cliff.width);
    r.read("env.height", c.env.cliff.height);
    r.read("env.max_steps", c.env.cliff.max_steps);
    r.read("env.step_reward", c.env.cliff.step_reward);
    r.read("env.cliff_reward", c.env.cliff.cliff_reward);
    r.read("env.goal_reward", c.env.cliff.goal_reward);
    if (c.env.name == "key_door") {
        // The shared geometry keys address the key-door grid instead.
        auto& kd = c.env.key_door;
        const auto& cl = c.env.cliff;
        if (root.at_path("env.width")) kd.width = cl.width;
        if (root.at_path("env.height")) kd.height = cl.height;
        if (root.at_path("env.max_steps")) kd.max_steps = cl.max_steps;
        if (root.at_path("env.step_reward")) kd.step_reward = cl.step_reward;
        if (root.at_path("env.goal_reward")) kd.goal_reward = cl.goal_reward;
        c.env.cliff = {};
    }
    r.read("env.wall_col", c.env.key_door.wall_col);
    r.read("env.door_row", c.env.key_door.door_row);
    r.read_pair("env.start", c.env.key_door.start);
    r.read_pair("env.key", c.env.key_door.key);
    r.read_pair("env.goal", c.env.key_door.goal);

    r.read("agent.lr", c.agent.lr);
    r.read("agent.episodes", c.agent.episodes);
    r.read("agent.eps_start", c.agent.eps_start);
    r.read("agent.eps_decay", c.agent.eps_decay);
    r.read("agent.eps_min", c.agent.eps_min);
    r.read("agent.gamma", c.agent.gamma);
    r.read("agent.seed", c.base_seed);

    r.read("im.kind", c.im.kind);
    r.read("im.alpha", c.im.alpha);
    r.read("im.rnd_lr", c.im.rnd_lr);
    r.read("im.rnd_scale", c.im.rnd_scale);
    r.read("im.rnd_hidden", c.im.rnd_hidden);
    r.read("im.rnd_output", c.im.rnd_output);
    r.read("im.rnd_init_range", c.im.rnd_init_range);
    r.read("im.normalize", c.im.normalize);

    r.read("shaping.kind", c.shaping.kind);
    r.read("shaping.delay", c.shaping.delay);
    r.read("shaping.normalized", c.shaping.normalized);
    r.read("shaping.grzes_final_zero", c.shaping.grzes_final_zero);
    r.read("shaping.potential", c.shaping.potential);

    r.read("experiment.replicates", c.replicates);
    r.read("experiment.base_seed", c.base_seed);
    r.read("experiment.output_dir", c.output_dir);
    r.read("experiment.eval_episodes", c.eval_episodes);
    r.read("experiment.window_start", c.window_start);
    r.read("experiment.window_end", c.window_end);
    r.read("experiment.workers", c.workers);
    r.finish();

    c.env.cliff.gamma = c.agent.gamma;
    c.env.key_door.gamma = c.agent.gamma;
    c.validate();
    return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

std::string override_config_value(const std::string& toml_text, const std::string& dotted_key,
                                  const std::string& value) {
    toml::table root = parse_toml(toml_text);
    toml::table* table = &root;
    std::string_view rest = dotted_key;
    for (std::size_t dot; (dot = rest.find('.')) != std::string_view::npos; rest.remove_prefix(dot + 1)) {
        const std::string part(rest.substr(0, dot));
        auto [it, inserted] = table->insert(part, toml::table{});
        table = it->second.as_table();
        if (!table) throw ConfigError("sweep: " + dotted_key + " crosses a non-table value");
    }
    if (rest.empty()) throw ConfigError("sweep: empty key in " + dotted_key);
    toml::table literal;
    try {
        literal = toml::parse("v = " + value);
    } catch (const toml::parse_error&) {
        literal.insert("v", value);  // bare words are strings
    }
    table->insert_or_assign(std::string(rest), *literal.get("v"));
    std::ostringstream out;
    out << root;
    return out.str();
}

std::filesystem::path resolve_output_dir(const ExperimentConfig& config) {
    if (const char* env = std::getenv("GRM_OUT"); env && *env) return env;
    return config.output_dir;
}

std::unique_ptr<DeterministicEnv> make_env(const EnvConfig& env, double gamma) {
    if (env.name == "key_door") {
        KeyDoorConfig kd = env.key_door;
        kd.gamma = gamma;
        return std::make_unique<KeyDoor>(kd);
    }
    CliffWalkConfig cw = env.cliff;
    cw.gamma = gamma;
    return std::make_unique<CliffWalk>(cw);
}

// ---------------------------------------------------------------------------
// Runs
// ---------------------------------------------------------------------------

double RunLog::mean_return(int first_episode, int end_episode) const {
    const int lo = std::max(first_episode, 0);
    const int hi = std::min(end_episode, static_cast<int>(rows.size()));
    if (hi <= lo) return 0.0;
    double total = 0.0;
    for (int e = lo; e < hi; ++e) total += rows[static_cast<std::size_t>(e)].extrinsic_return;
    return total / static_cast<double>(hi - lo);
}

Stats describe(const std::vector<double>& values) {
    Stats s;
    s.count = values.size();
    if (values.empty()) return s;
    s.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
    if (values.size() > 1) {
        double sq = 0.0;
        for (double v : values) sq += (v - s.mean) * (v - s.mean);
        s.std = std::sqrt(sq / static_cast<double>(values.size() - 1));
    }
    return s;
}

namespace {

// Keeps the RND initialization stream apart from the agent's exploration stream.
constexpr std::uint64_t kRndSeedSalt = 0x9E3779B97F4A7C15ULL;

std::unique_ptr<IntrinsicModule> make_intrinsic(const ImConfig& im, std::size_t num_states, std::uint64_t seed) {
    if (im.kind == "count") return std::make_unique<CountBonus>(im.alpha);
    if (im.kind == "rnd") {
        RndConfig rc;
        rc.num_states = num_states;
        rc.hidden = im.rnd_hidden;
        rc.output = im.rnd_output;
        rc.learning_rate = im.rnd_lr;
        rc.scale = im.rnd_scale;
        rc.init_range = im.rnd_init_range;
        rc.seed = seed ^ kRndSeedSalt;
        return std::make_unique<RndLite>(rc);
    }
    return nullptr;
}

}  // namespace

RunLog run_replicate(const ExperimentConfig& config, int replicate) {
    const auto started = std::chrono::steady_clock::now();
    RunLog log;
    log.replicate = replicate;
    log.seed = config.base_seed + static_cast<std::uint64_t>(replicate);
    try {
        auto env = make_env(config.env, config.agent.gamma);
        Rng rng(log.seed);
        QTable q(env->num_states(), env->num_actions());
        const QLearningConfig qcfg{config.agent.lr, config.agent.gamma, config.agent.episodes, log.seed};
        const EpsilonSchedule schedule{config.agent.eps_start, config.agent.eps_decay, config.agent.eps_min};

        const auto& shaping = config.shaping;
        auto im = make_intrinsic(config.im, env->num_states(), log.seed);
        RunningMean mean;
        std::optional<GrmShaper> shaper;
        if (shaping.kind == "pbim") shaper.emplace(std::make_shared<PbimMatching>(), config.agent.gamma);
        if (shaping.kind == "grm_delay") shaper.emplace(std::make_shared<DelayMatching>(shaping.delay), config.agent.gamma);
        std::optional<StatePotential> potential;
        if (shaping.kind == "classic_pbrs") {
            potential = shaping.potential == "vstar"
                            ? vstar_potential(env->to_tabular(), shaping.grzes_final_zero)
                            : StatePotential{std::vector<double>(env->num_states(), 0.0), shaping.grzes_final_zero};
        }
        const bool adds_intrinsic = shaping.kind == "raw" || shaper.has_value();

        log.rows.reserve(static_cast<std::size_t>(config.agent.episodes));
        for (int ep = 0; ep < config.agent.episodes; ++ep) {
            const double eps = schedule.at(ep);
            EpisodeRow row{ep, 0, 0.0, 0.0, 0.0, eps};
            PolicyFn behaviour = [&](StateId s, Rng& r) { return select_action(q, s, eps, r); };
            RolloutHooks hooks;
            hooks.intrinsic = im.get();
            hooks.normalizer = config.normalize() && im ? &mean : nullptr;
            hooks.shaper = shaper ? &*shaper : nullptr;
            hooks.episode = ep;
            hooks.on_step = [&](const StepOutcome& step, const StepRewards& r) {
                double added = 0.0;
                if (adds_intrinsic) added = r.intrinsic;
                if (potential) added = classic_pbrs_step(*potential, step.state, step.next_state, config.agent.gamma,
                                                         step.ends_episode());
                row.intrinsic_raw_sum += r.raw;
                row.shaped_sum += added;
                q_update(q, step, step.extrinsic_reward + added, qcfg);
            };
            const Trajectory traj = rollout(*env, behaviour, rng, hooks);
            row.steps = static_cast<int>(traj.length());
            row.extrinsic_return = traj.extrinsic_total();
            log.rows.push_back(row);
        }

        log.greedy_policy = greedy_policy(q);
        const auto& policy = log.greedy_policy;
        PolicyFn greedy = [&](StateId s, Rng&) { return policy[s.index]; };
        const auto* cliff = dynamic_cast<const CliffWalk*>(env.get());
        double total_return = 0.0;
        double total_length = 0.0;
        int successes = 0;
        for (int e = 0; e < config.eval_episodes; ++e) {
            const Trajectory traj = rollout(*env, greedy, rng);
            total_return += traj.extrinsic_total();
            total_length += static_cast<double>(traj.length());
            // Key-door's only terminal state is its goal; cliff walks also terminate on cliffs.
            successes += traj.terminated && (!cliff || traj.states.back() == cliff->goal_state()) ? 1 : 0;
        }
        log.greedy_return = total_return / config.eval_episodes;
        log.greedy_length = total_length / config.eval_episodes;
        log.greedy_success = static_cast<double>(successes) / config.eval_episodes;
        log.q = std::move(q);
    } catch (const NumericError& e) {
        log.ok = false;
        log.error = e.what();
    }
    log.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    return log;
}

namespace {

nlohmann::json stats_json(const Stats& s) { return {{"mean", s.mean}, {"std", s.std}, {"count", s.count}}; }

nlohmann::json env_json(const ExperimentConfig& config) {
    const auto& e = config.env;
    if (e.name == "key_door") {
        return {{"name", e.name}, {"width", e.key_door.width}, {"height", e.key_door.height},
                {"max_steps", e.key_door.max_steps}};
    }
    return {{"name", e.name}, {"width", e.cliff.width}, {"height", e.cliff.height}, {"max_steps", e.cliff.max_steps}};
}

nlohmann::json summarize(const ExperimentConfig& config, const std::vector<RunLog>& runs) {
    nlohmann::json j;
    j["name"] = config.name;
    j["env"] = env_json(config);
    j["episodes"] = config.agent.episodes;
    j["replicates"] = config.replicates;
    j["base_seed"] = config.base_seed;
    j["im"] = config.im.kind;
    j["shaping"] = config.shaping.kind;
    j["normalized"] = config.normalize();
    std::vector<double> returns;
    std::vector<double> lengths;
    std::vector<double> windows;
    nlohmann::json per_run = nlohmann::json::array();
    for (const auto& run : runs) {
        nlohmann::json r{{"replicate", run.replicate}, {"seed", run.seed}, {"status", run.ok ? "ok" : "failed"}};
        if (run.ok) {
            r["greedy_return"] = run.greedy_return;
            r["greedy_length"] = run.greedy_length;
            r["greedy_success"] = run.greedy_success;
            r["window_return"] = run.mean_return(config.window_start, config.window_end);
            returns.push_back(run.greedy_return);
            lengths.push_back(run.greedy_length);
            windows.push_back(r["window_return"].get<double>());
        } else {
            r["error"] = run.error;
        }
        per_run.push_back(std::move(r));
    }
    j["runs"] = std::move(per_run);
    j["failed_runs"] = runs.size() - returns.size();
    j["greedy_return"] = stats_json(describe(returns));
    j["greedy_length"] = stats_json(describe(lengths));
    j["window"] = {{"start", config.window_start}, {"end", config.window_end}};
    j["window_return"] = stats_json(describe(windows));
    return j;
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& config) {
    config.validate();
    ExperimentResult result{config, std::vector<RunLog>(static_cast<std::size_t>(config.replicates)), {}};
    const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    const unsigned workers = std::min<unsigned>(config.workers > 0 ? static_cast<unsigned>(config.workers) : hw,
                                                static_cast<unsigned>(config.replicates));
    std::atomic<int> next{0};
    {
        std::vector<std::jthread> pool;
        for (unsigned w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                for (int i; (i = next.fetch_add(1)) < config.replicates;) {
                    result.runs[static_cast<std::size_t>(i)] = run_replicate(config, i);
                }
            });
        }
    }
    result.summary = summarize(config, result.runs);
    return result;
}

void write_run_csv(std::ostream& out, const RunLog& run) {
    out << std::setprecision(17);
    out << "episode,steps,extrinsic_return,intrinsic_raw_sum,shaped_sum,epsilon\n";
    for (const auto& r : run.rows) {
        out << r.episode << ',' << r.steps << ',' << r.extrinsic_return << ',' << r.intrinsic_raw_sum << ','
            << r.shaped_sum << ',' << r.epsilon << '\n';
    }
}

namespace {

void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << content;
}

}  // namespace

void write_experiment(const ExperimentResult& result, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    std::ostringstream greedy;
    greedy << std::setprecision(17) << "replicate,seed,status,greedy_return,greedy_length,greedy_success\n";
    for (const auto& run : result.runs) {
        std::ostringstream csv;
        write_run_csv(csv, run);
        write_file(dir / ("run_" + std::to_string(run.replicate) + ".csv"), csv.str());
        greedy << run.replicate << ',' << run.seed << ',' << (run.ok ? "ok" : "failed") << ',';
        if (run.ok) greedy << run.greedy_return << ',' << run.greedy_length << ',' << run.greedy_success;
        else greedy << ",,";
        greedy << '\n';
        if (!run.ok || !run.q) continue;

        std::ostringstream q;
        q << std::setprecision(17) << "state";
        for (std::size_t a = 0; a < run.q->num_actions(); ++a) q << ",q" << a;
        q << '\n';
        for (std::size_t s = 0; s < run.q->num_states(); ++s) {
            q << s;
            for (std::size_t a = 0; a < run.q->num_actions(); ++a) q << ',' << (*run.q)(StateId{s}, ActionId{a});
            q << '\n';
        }
        write_file(dir / ("q_" + std::to_string(run.replicate) + ".csv"), q.str());

        std::string grid;
        if (result.config.env.name == "key_door") {
            std::ostringstream lines;
            for (std::size_t s = 0; s < run.greedy_policy.size(); ++s) lines << s << ' ' << run.greedy_policy[s].index << '\n';
            grid = lines.str();
        } else {
            const auto env = make_env(result.config.env, result.config.agent.gamma);
            grid = render_policy(static_cast<const CliffWalk&>(*env), run.greedy_policy);
        }
        write_file(dir / ("policy_" + std::to_string(run.replicate) + ".txt"), grid);
    }
    write_file(dir / "greedy.csv", greedy.str());
    write_file(dir / "summary.json", result.summary.dump(2) + "\n");
}

// ---------------------------------------------------------------------------
// Verification sweeps
// ---------------------------------------------------------------------------

RandomMdpConfig sweep_instance_config(std::uint64_t seed, std::size_t index) {
    RandomMdpConfig cfg;
    cfg.seed = seed + index;
    switch (index % 3) {
        case 0:
            cfg.num_states = 4;
            cfg.num_actions = 2;
            cfg.horizon = 3;
            break;
        case 1:
            cfg.num_states = 3;
            cfg.num_actions = 3;
            cfg.horizon = 2;
            break;
        default:
            cfg.num_states = 3;
            cfg.num_actions = 2;
            cfg.horizon = 2;
            cfg.deterministic = false;
            break;
    }
    return cfg;
}

bool SweepReport::ok() const {
    return std::all_of(outcomes.begin(), outcomes.end(), [](const SweepOutcome& o) { return o.ok(); });
}

void to_json(nlohmann::json& j, const SweepReport& report) {
    j = {{"count", report.count}, {"seed", report.seed}, {"ok", report.ok()}};
    nlohmann::json specs = nlohmann::json::array();
    for (const auto& o : report.outcomes) {
        specs.push_back({{"spec", o.spec},
                         {"expect_pass", o.expect_pass},
                         {"passed", o.passed},
                         {"failed", o.failed},
                         {"capacity_errors", o.capacity_errors},
                         {"failing_instances", o.failing_instances},
                         {"ok", o.ok()}});
    }
    j["specs"] = std::move(specs);
}

SweepReport verify_sweep(std::size_t count, std::uint64_t seed, const std::vector<std::string>& specs) {
    if (count == 0) throw ConfigError("verify: count must be >= 1");
    if (specs.empty()) throw ConfigError("verify: no matching specs given");
    for (const auto& spec : specs) {
        if (spec != "raw") (void)make_matching(spec);  // fail fast on a bad spec
    }
    SweepReport report{count, seed, {}};
    for (const auto& spec : specs) {
        SweepOutcome outcome;
        outcome.spec = spec;
        outcome.expect_pass = spec != "raw";
        Rng fixture_rng(seed);
        std::uniform_real_distribution<double> alpha_dist(0.5, 2.0);
        std::uniform_real_distribution<double> gamma_dist(0.9, 0.999);
        for (std::size_t i = 0; i < count; ++i) {
            try {
                PolicySetReport r;
                if (outcome.expect_pass) {
                    r = policy_preservation_check(random_episodic_mdp(sweep_instance_config(seed, i)),
                                                  make_shaping_spec(spec, 1.0));
                } else {
                    const double alpha = alpha_dist(fixture_rng);
                    const double gamma = gamma_dist(fixture_rng);
                    r = policy_preservation_check(procrastination_fixture(alpha, gamma), make_shaping_spec("raw", alpha));
                }
                if (r.pass) {
                    ++outcome.passed;
                } else {
                    ++outcome.failed;
                    outcome.failing_instances.push_back(i);
                }
            } catch (const CapacityError&) {
                ++outcome.capacity_errors;
            } catch (const ConfigError&) {
                ++outcome.capacity_errors;  // instance exceeded the generator's caps
            }
        }
        report.outcomes.push_back(std::move(outcome));
    }
    return report;
}

}  // namespace grm
