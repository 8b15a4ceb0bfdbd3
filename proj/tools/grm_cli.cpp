#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"

#include "grm/harness.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kFailed = 1;
constexpr int kConfigError = 2;

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw grm::ConfigError("cannot read " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void print_summary(const grm::ExperimentResult& result, const std::filesystem::path& dir) {
    const auto& s = result.summary;
    for (const auto& run : result.runs) {
        std::cerr << "  replicate " << run.replicate << " seed " << run.seed << ": ";
        if (run.ok) std::cerr << "greedy return " << run.greedy_return << ", length " << run.greedy_length;
        else std::cerr << "FAILED (" << run.error << ")";
        std::cerr << " [" << run.wall_seconds << " s]\n";
    }
    std::cout << result.config.name << ": greedy return " << s["greedy_return"]["mean"].get<double>() << " +- "
              << s["greedy_return"]["std"].get<double>() << ", length " << s["greedy_length"]["mean"].get<double>()
              << " +- " << s["greedy_length"]["std"].get<double>() << " (" << s["failed_runs"].get<int>()
              << " failed) -> " << dir.string() << "\n";
}

int cmd_run(const std::string& config_path) {
    const auto config = grm::load_config(config_path);
    const auto dir = grm::resolve_output_dir(config) / config.name;
    const auto result = grm::run_experiment(config);
    grm::write_experiment(result, dir);
    print_summary(result, dir);
    return result.summary["failed_runs"].get<int>() == 0 ? kOk : kFailed;
}

int cmd_verify(std::size_t count, std::uint64_t seed, const std::vector<std::string>& specs, const std::string& mdp_path,
               double alpha, double tol) {
    if (!mdp_path.empty()) {
        grm::TabularMdp mdp;
        try {
            mdp = nlohmann::json::parse(read_file(mdp_path)).get<grm::TabularMdp>();
        } catch (const nlohmann::json::exception& e) {
            throw grm::ConfigError(std::string("bad mdp json: ") + e.what());
        }
        bool all_pass = true;
        nlohmann::json out = nlohmann::json::array();
        for (const auto& spec : specs) {
            const auto report = grm::policy_preservation_check(mdp, grm::make_shaping_spec(spec, alpha), tol);
            all_pass = all_pass && report.pass;
            out.push_back(report);
        }
        std::cout << (out.size() == 1 ? out[0] : out).dump(2) << "\n";
        return all_pass ? kOk : kFailed;
    }
    const auto report = grm::verify_sweep(count, seed, specs);
    std::cout << nlohmann::json(report).dump(2) << "\n";
    return report.ok() ? kOk : kFailed;
}

int cmd_plot(const std::string& dir, std::size_t window) {
    for (const auto& path : grm::plot_directory(dir, window)) std::cout << path.string() << "\n";
    return kOk;
}

int cmd_sweep(const std::string& config_path, const std::vector<std::string>& params) {
    const std::string base = read_file(config_path);
    // Cartesian product over every --param.
    std::vector<std::pair<std::string, std::string>> docs{{"", base}};
    for (const auto& param : params) {
        const auto eq = param.find('=');
        if (eq == std::string::npos || eq == 0) throw grm::ConfigError("sweep: expected key=v1,v2,... got " + param);
        const std::string key = param.substr(0, eq);
        std::vector<std::string> values;
        std::stringstream list(param.substr(eq + 1));
        for (std::string v; std::getline(list, v, ',');) values.push_back(v);
        if (values.empty()) throw grm::ConfigError("sweep: no values for " + key);
        std::vector<std::pair<std::string, std::string>> next;
        for (const auto& [tag, text] : docs) {
            for (const auto& v : values) {
                next.emplace_back(tag + (tag.empty() ? "" : ",") + key + "=" + v, grm::override_config_value(text, key, v));
            }
        }
        docs = std::move(next);
    }
    // Validate everything before spending time on any run.
    std::vector<grm::ExperimentConfig> configs;
    for (const auto& [tag, text] : docs) configs.push_back(grm::parse_config(text));

    bool ok = true;
    for (std::size_t i = 0; i < configs.size(); ++i) {
        const auto dir = grm::resolve_output_dir(configs[i]) / configs[i].name / docs[i].first;
        const auto result = grm::run_experiment(configs[i]);
        grm::write_experiment(result, dir);
        std::cout << docs[i].first << "  ";
        print_summary(result, dir);
        ok = ok && result.summary["failed_runs"].get<int>() == 0;
    }
    return ok ? kOk : kFailed;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Generalized reward matching experiments and verifiers"};
    app.require_subcommand(1);

    std::string run_config;
    auto* run = app.add_subcommand("run", "Train replicates from a TOML config and write CSV/JSON outputs");
    run->add_option("config", run_config, "Experiment config")->required()->check(CLI::ExistingFile);

    std::size_t count = 100;
    std::uint64_t seed = 0;
    std::vector<std::string> specs{"identity", "pbim", "delay-1", "delay-10"};
    std::string mdp_path;
    double alpha = 1.0;
    double tol = 1e-9;
    auto* verify = app.add_subcommand("verify", "Brute-force policy-preservation checks");
    verify->add_option("--count", count, "Number of random MDPs");
    verify->add_option("--seed", seed, "Base seed");
    verify->add_option("--spec", specs, "Matching specs: identity, pbim, delay-D, raw");
    verify->add_option("--mdp", mdp_path, "Check a single TabularMdp JSON file instead of a sweep")
        ->check(CLI::ExistingFile);
    verify->add_option("--alpha", alpha, "Count-bonus coefficient for --mdp");
    verify->add_option("--tol", tol, "Optimality tolerance for --mdp");

    std::string plot_dir;
    std::size_t window = 50;
    auto* plot = app.add_subcommand("plot", "Render SVG curves and policy grids for a run directory");
    plot->add_option("dir", plot_dir, "Directory written by run")->required()->check(CLI::ExistingDirectory);
    plot->add_option("--window", window, "Moving-average window");

    std::string sweep_config;
    std::vector<std::string> params;
    auto* sweep = app.add_subcommand("sweep", "Run a config over a grid of overrides");
    sweep->add_option("config", sweep_config, "Base config")->required()->check(CLI::ExistingFile);
    sweep->add_option("--param", params, "key=v1,v2,...")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kConfigError;
    }

    try {
        if (*run) return cmd_run(run_config);
        if (*verify) return cmd_verify(count, seed, specs, mdp_path, alpha, tol);
        if (*plot) return cmd_plot(plot_dir, window);
        if (*sweep) return cmd_sweep(sweep_config, params);
    } catch (const grm::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kConfigError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kFailed;
    }
    return kConfigError;
}
