#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "grm/harness.hpp"

namespace grm {

std::vector<double> moving_average(const std::vector<double>& values, std::size_t window) {
    if (window == 0) throw ConfigError("plot: window must be >= 1");
    std::vector<double> out(values.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        acc += values[i];
        if (i >= window) acc -= values[i - window];
        out[i] = acc / static_cast<double>(std::min(i + 1, window));
    }
    return out;
}

namespace {

std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("plot: cannot read " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

/// Columns of a numeric CSV with a header row.
std::vector<std::vector<double>> read_columns(const std::filesystem::path& path, std::vector<std::string>& header) {
    std::istringstream in(read_text(path));
    std::string line;
    if (!std::getline(in, line)) throw ConfigError("plot: empty file " + path.string());
    header.clear();
    for (std::istringstream hs(line); std::getline(hs, line, ',');) header.push_back(line);
    std::vector<std::vector<double>> cols(header.size());
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string cell;
        for (std::size_t c = 0; c < cols.size(); ++c) {
            if (!std::getline(ls, cell, ',')) throw ConfigError("plot: short row in " + path.string());
            cols[c].push_back(std::stod(cell));
        }
    }
    return cols;
}

std::size_t column(const std::vector<std::string>& header, const std::string& name) {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw ConfigError("plot: missing column " + name);
    return static_cast<std::size_t>(it - header.begin());
}

struct Series {
    std::vector<double> mean;
    std::vector<double> std;
};

Series across_runs(const std::vector<std::vector<double>>& runs) {
    const std::size_t n = runs.front().size();
    Series s{std::vector<double>(n), std::vector<double>(n, 0.0)};
    std::vector<double> column_values(runs.size());
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t r = 0; r < runs.size(); ++r) column_values[r] = runs[r][i];
        const Stats st = describe(column_values);
        s.mean[i] = st.mean;
        s.std[i] = st.std;
    }
    return s;
}

std::string line_chart(const Series& s, const std::string& title, const std::string& y_label, bool band) {
    constexpr double kW = 800, kH = 420, kLeft = 70, kRight = 20, kTop = 40, kBottom = 50;
    const std::size_t n = s.mean.size();
    double lo = 1e300;
    double hi = -1e300;
    for (std::size_t i = 0; i < n; ++i) {
        lo = std::min(lo, s.mean[i] - (band ? s.std[i] : 0.0));
        hi = std::max(hi, s.mean[i] + (band ? s.std[i] : 0.0));
    }
    if (!(hi > lo)) {
        lo -= 1.0;
        hi += 1.0;
    }
    auto x = [&](std::size_t i) { return kLeft + (kW - kLeft - kRight) * (n > 1 ? double(i) / double(n - 1) : 0.0); };
    auto y = [&](double v) { return kTop + (kH - kTop - kBottom) * (hi - v) / (hi - lo); };

    std::ostringstream svg;
    svg << std::fixed << std::setprecision(2);
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW << "\" height=\"" << kH << "\">\n"
        << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
        << "<text x=\"" << kW / 2 << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"16\">"
        << title << "</text>\n";
    svg << "<line x1=\"" << kLeft << "\" y1=\"" << kH - kBottom << "\" x2=\"" << kW - kRight << "\" y2=\"" << kH - kBottom
        << "\" stroke=\"black\"/>\n"
        << "<line x1=\"" << kLeft << "\" y1=\"" << kTop << "\" x2=\"" << kLeft << "\" y2=\"" << kH - kBottom
        << "\" stroke=\"black\"/>\n";
    for (int k = 0; k <= 4; ++k) {
        const double v = lo + (hi - lo) * k / 4.0;
        svg << "<text x=\"" << kLeft - 6 << "\" y=\"" << y(v) + 4 << "\" text-anchor=\"end\" font-family=\"sans-serif\" "
            << "font-size=\"11\">" << std::setprecision(1) << v << std::setprecision(2) << "</text>\n";
        const std::size_t i = n > 1 ? (n - 1) * static_cast<std::size_t>(k) / 4 : 0;
        svg << "<text x=\"" << x(i) << "\" y=\"" << kH - kBottom + 16 << "\" text-anchor=\"middle\" "
            << "font-family=\"sans-serif\" font-size=\"11\">" << i << "</text>\n";
    }
    svg << "<text x=\"" << kW / 2 << "\" y=\"" << kH - 10 << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
        << "font-size=\"12\">episode</text>\n"
        << "<text x=\"16\" y=\"" << kH / 2 << "\" transform=\"rotate(-90 16 " << kH / 2 << ")\" text-anchor=\"middle\" "
        << "font-family=\"sans-serif\" font-size=\"12\">" << y_label << "</text>\n";
    if (band) {
        svg << "<polygon class=\"band\" fill=\"steelblue\" fill-opacity=\"0.25\" stroke=\"none\" points=\"";
        for (std::size_t i = 0; i < n; ++i) svg << x(i) << ',' << y(s.mean[i] + s.std[i]) << ' ';
        for (std::size_t i = n; i-- > 0;) svg << x(i) << ',' << y(s.mean[i] - s.std[i]) << ' ';
        svg << "\"/>\n";
    }
    svg << "<polyline class=\"mean\" fill=\"none\" stroke=\"steelblue\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < n; ++i) svg << x(i) << ',' << y(s.mean[i]) << ' ';
    svg << "\"/>\n</svg>\n";
    return svg.str();
}

const char* arrow(std::size_t action) {
    switch (action) {
        case kUp: return "&#8593;";
        case kDown: return "&#8595;";
        case kLeft: return "&#8592;";
        default: return "&#8594;";
    }
}

/// Grid of greedy arrows, each cell shaded by its state value max_a Q(s, a).
std::string policy_grid(const CliffWalk& env, const std::vector<std::vector<double>>& q_columns) {
    const auto& cfg = env.config();
    constexpr double kCell = 36;
    const double w = kCell * cfg.width;
    const double h = kCell * cfg.height;
    std::vector<double> value(env.num_states());
    std::vector<std::size_t> best(env.num_states(), 0);
    for (std::size_t s = 0; s < env.num_states(); ++s) {
        value[s] = q_columns[1][s];
        for (std::size_t a = 1; a + 1 < q_columns.size(); ++a) {
            if (q_columns[a + 1][s] > value[s]) {
                value[s] = q_columns[a + 1][s];
                best[s] = a;
            }
        }
    }
    double lo = 1e300;
    double hi = -1e300;
    for (std::size_t s = 0; s < env.num_states(); ++s) {
        if (env.is_terminal(StateId{s})) continue;
        lo = std::min(lo, value[s]);
        hi = std::max(hi, value[s]);
    }
    if (!(hi > lo)) hi = lo + 1.0;

    std::ostringstream svg;
    svg << std::fixed << std::setprecision(1);
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h << "\">\n";
    for (int row = 0; row < cfg.height; ++row) {
        for (int col = 0; col < cfg.width; ++col) {
            const StateId s = env.state_at(row, col);
            const double cx = col * kCell;
            const double cy = row * kCell;
            std::string fill = "#888888";
            std::string label;
            if (s == env.goal_state()) {
                fill = "#ffd700";
                label = "G";
            } else if (env.is_cliff(s)) {
                label = "C";
            } else {
                const double u = (value[s.index] - lo) / (hi - lo);
                const int red = static_cast<int>(std::lround(255 * (1.0 - u)));
                const int green = static_cast<int>(std::lround(80 + 175 * u));
                std::ostringstream c;
                c << '#' << std::hex << std::setfill('0') << std::setw(2) << red << std::setw(2) << green << "a0";
                fill = c.str();
                label = arrow(best[s.index]);
            }
            svg << "<rect x=\"" << cx << "\" y=\"" << cy << "\" width=\"" << kCell << "\" height=\"" << kCell
                << "\" fill=\"" << fill << "\" stroke=\"white\"/>\n"
                << "<text x=\"" << cx + kCell / 2 << "\" y=\"" << cy + kCell / 2 + 6
                << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"18\">" << label << "</text>\n";
        }
    }
    svg << "</svg>\n";
    return svg.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << text;
}

}  // namespace

std::vector<std::filesystem::path> plot_directory(const std::filesystem::path& dir, std::size_t window) {
    const auto summary = nlohmann::json::parse(read_text(dir / "summary.json"));
    std::vector<std::vector<double>> returns;
    std::vector<std::vector<double>> lengths;
    std::vector<int> replicates;
    for (const auto& run : summary.at("runs")) {
        if (run.at("status") != "ok") continue;
        const int rep = run.at("replicate").get<int>();
        std::vector<std::string> header;
        const auto cols = read_columns(dir / ("run_" + std::to_string(rep) + ".csv"), header);
        returns.push_back(moving_average(cols[column(header, "extrinsic_return")], window));
        lengths.push_back(moving_average(cols[column(header, "steps")], window));
        if (returns.back().size() != returns.front().size()) {
            throw ConfigError("plot: run " + std::to_string(rep) + " has " + std::to_string(returns.back().size()) +
                              " episodes, expected " + std::to_string(returns.front().size()));
        }
        replicates.push_back(rep);
    }
    if (returns.empty()) throw ConfigError("plot: no successful runs in " + dir.string());

    std::vector<std::filesystem::path> written;
    const bool band = returns.size() > 1;
    const std::string name = summary.value("name", std::string("experiment"));
    const std::string suffix = " (" + std::to_string(returns.size()) + " runs, window " + std::to_string(window) + ")";
    written.push_back(dir / "returns.svg");
    write_text(written.back(), line_chart(across_runs(returns), name + ": extrinsic return" + suffix, "return", band));
    written.push_back(dir / "lengths.svg");
    write_text(written.back(), line_chart(across_runs(lengths), name + ": episode length" + suffix, "steps", band));

    const auto& env_json = summary.at("env");
    if (env_json.at("name") != "key_door") {
        CliffWalkConfig cfg;
        cfg.width = env_json.at("width").get<int>();
        cfg.height = env_json.at("height").get<int>();
        cfg.max_steps = env_json.at("max_steps").get<int>();
        const CliffWalk env(cfg);
        for (int rep : replicates) {
            const auto q_path = dir / ("q_" + std::to_string(rep) + ".csv");
            if (!std::filesystem::exists(q_path)) continue;
            std::vector<std::string> header;
            const auto cols = read_columns(q_path, header);
            if (cols.size() != env.num_actions() + 1 || cols[0].size() != env.num_states()) {
                throw ConfigError("plot: " + q_path.string() + " does not match the grid");
            }
            written.push_back(dir / ("policy_" + std::to_string(rep) + ".svg"));
            write_text(written.back(), policy_grid(env, cols));
        }
    }
    return written;
}

}  // namespace grm
