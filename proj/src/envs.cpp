#include "grm/envs.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace grm {

// ---------------------------------------------------------------------------
// TabularMdp
// ---------------------------------------------------------------------------

TabularMdp::TabularMdp(std::size_t num_states, std::size_t num_actions, double gamma,
                       int horizon)
    : num_states_(num_states),
      num_actions_(num_actions),
      gamma_(gamma),
      horizon_(horizon),
      rows_(num_states * num_actions),
      terminal_(num_states, false) {
    if (num_states == 0 || num_actions == 0) throw ConfigError("TabularMdp: empty state or action space");
    if (!(gamma > 0.0 && gamma <= 1.0)) throw ConfigError("TabularMdp: gamma must lie in (0,1]");
    if (horizon < 1) throw ConfigError("TabularMdp: horizon must be >= 1");
    initial_ = {{StateId{0}, 1.0}};
}

std::size_t TabularMdp::index(StateId s, ActionId a) const {
    if (s.index >= num_states_ || a.index >= num_actions_) {
        throw std::out_of_range("TabularMdp: state/action index out of range");
    }
    return s.index * num_actions_ + a.index;
}

void TabularMdp::add_outcome(StateId s, ActionId a, StateId next, double probability,
                             double reward) {
    if (next.index >= num_states_) throw std::out_of_range("TabularMdp: next state out of range");
    if (!(probability >= 0.0 && probability <= 1.0)) throw ConfigError("TabularMdp: probability outside [0,1]");
    rows_[index(s, a)].push_back({next, probability, reward});
}

void TabularMdp::set_terminal(StateId s, bool terminal) { terminal_.at(s.index) = terminal; }

void TabularMdp::set_initial(std::vector<std::pair<StateId, double>> distribution) {
    for (const auto& [s, p] : distribution) {
        if (s.index >= num_states_) throw std::out_of_range("TabularMdp: initial state out of range");
    }
    initial_ = std::move(distribution);
}

const std::vector<Outcome>& TabularMdp::outcomes(StateId s, ActionId a) const {
    return rows_[index(s, a)];
}

void TabularMdp::validate() const {
    constexpr double kTol = 1e-12;
    double init_total = 0.0;
    for (const auto& [s, p] : initial_) init_total += p;
    if (std::abs(init_total - 1.0) > kTol) throw ConfigError("TabularMdp: initial distribution does not sum to 1");
    for (std::size_t s = 0; s < num_states_; ++s) {
        for (std::size_t a = 0; a < num_actions_; ++a) {
            const auto& row = rows_[s * num_actions_ + a];
            if (row.empty() && terminal_[s]) continue;
            double total = 0.0;
            for (const auto& o : row) {
                if (!std::isfinite(o.reward)) throw ConfigError("TabularMdp: non-finite reward");
                total += o.probability;
            }
            if (std::abs(total - 1.0) > kTol) {
                std::ostringstream msg;
                msg << "TabularMdp: row (s=" << s << ", a=" << a << ") sums to " << total;
                throw ConfigError(msg.str());
            }
        }
    }
}

bool operator==(const TabularMdp& x, const TabularMdp& y) {
    if (x.num_states_ != y.num_states_ || x.num_actions_ != y.num_actions_ ||
        x.gamma_ != y.gamma_ || x.horizon_ != y.horizon_ || x.terminal_ != y.terminal_ ||
        x.initial_ != y.initial_ || x.rows_.size() != y.rows_.size()) {
        return false;
    }
    for (std::size_t i = 0; i < x.rows_.size(); ++i) {
        const auto& rx = x.rows_[i];
        const auto& ry = y.rows_[i];
        if (rx.size() != ry.size()) return false;
        for (std::size_t k = 0; k < rx.size(); ++k) {
            if (rx[k].next != ry[k].next || rx[k].probability != ry[k].probability ||
                rx[k].reward != ry[k].reward) {
                return false;
            }
        }
    }
    return true;
}

void to_json(nlohmann::json& j, const TabularMdp& mdp) {
    using nlohmann::json;
    json terminal = json::array();
    for (std::size_t s = 0; s < mdp.num_states(); ++s) {
        if (mdp.is_terminal(StateId{s})) terminal.push_back(s);
    }
    json initial = json::array();
    for (const auto& [s, p] : mdp.initial()) initial.push_back({{"state", s.index}, {"prob", p}});
    json transitions = json::array();
    for (std::size_t s = 0; s < mdp.num_states(); ++s) {
        for (std::size_t a = 0; a < mdp.num_actions(); ++a) {
            const auto& row = mdp.outcomes(StateId{s}, ActionId{a});
            if (row.empty()) continue;
            json outs = json::array();
            for (const auto& o : row) {
                outs.push_back({{"next", o.next.index}, {"prob", o.probability}, {"reward", o.reward}});
            }
            transitions.push_back({{"state", s}, {"action", a}, {"outcomes", outs}});
        }
    }
    j = json{{"num_states", mdp.num_states()},
             {"num_actions", mdp.num_actions()},
             {"gamma", mdp.gamma()},
             {"horizon", mdp.horizon()},
             {"terminal", terminal},
             {"initial", initial},
             {"transitions", transitions}};
}

void from_json(const nlohmann::json& j, TabularMdp& mdp) {
    try {
        TabularMdp out(j.at("num_states").get<std::size_t>(), j.at("num_actions").get<std::size_t>(),
                       j.at("gamma").get<double>(), j.at("horizon").get<int>());
        for (const auto& s : j.value("terminal", nlohmann::json::array())) {
            out.set_terminal(StateId{s.get<std::size_t>()});
        }
        if (j.contains("initial")) {
            std::vector<std::pair<StateId, double>> init;
            for (const auto& e : j.at("initial")) {
                init.emplace_back(StateId{e.at("state").get<std::size_t>()}, e.at("prob").get<double>());
            }
            out.set_initial(std::move(init));
        }
        for (const auto& tr : j.at("transitions")) {
            const StateId s{tr.at("state").get<std::size_t>()};
            const ActionId a{tr.at("action").get<std::size_t>()};
            for (const auto& o : tr.at("outcomes")) {
                out.add_outcome(s, a, StateId{o.at("next").get<std::size_t>()}, o.at("prob").get<double>(),
                                o.at("reward").get<double>());
            }
        }
        out.validate();
        mdp = std::move(out);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("TabularMdp JSON: ") + e.what());
    } catch (const std::out_of_range& e) {
        throw ConfigError(std::string("TabularMdp JSON: ") + e.what());
    }
}

namespace {

void count_nodes(const TabularMdp& mdp, StateId s, int t, std::size_t cap, std::size_t& count) {
    if (count > cap || mdp.is_terminal(s) || t >= mdp.horizon()) return;
    ++count;
    for (std::size_t a = 0; a < mdp.num_actions(); ++a) {
        for (const auto& o : mdp.outcomes(s, ActionId{a})) {
            if (o.probability > 0.0) count_nodes(mdp, o.next, t + 1, cap, count);
            if (count > cap) return;
        }
    }
}

}  // namespace

std::size_t history_node_count(const TabularMdp& mdp, std::size_t cap) {
    std::size_t count = 0;
    for (const auto& [s, p] : mdp.initial()) {
        if (p > 0.0) count_nodes(mdp, s, 0, cap, count);
    }
    return std::min(count, cap + 1);
}

// ---------------------------------------------------------------------------
// TabularEnv
// ---------------------------------------------------------------------------

namespace {

template <typename Items, typename Weight>
std::size_t sample_index(const Items& items, Weight weight, Rng& rng) {
    const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    double acc = 0.0;
    for (std::size_t i = 0; i < items.size(); ++i) {
        acc += weight(items[i]);
        if (u < acc) return i;
    }
    return items.size() - 1;
}

}  // namespace

TabularEnv::TabularEnv(std::shared_ptr<const TabularMdp> mdp) : mdp_(std::move(mdp)) {
    if (!mdp_) throw ConfigError("TabularEnv: null mdp");
    mdp_->validate();
}

StateId TabularEnv::reset(Rng& rng) {
    const auto& init = mdp_->initial();
    current_ = init[sample_index(init, [](const auto& e) { return e.second; }, rng)].first;
    t_ = 0;
    done_ = mdp_->is_terminal(current_);
    return current_;
}

StepOutcome TabularEnv::step(ActionId action, Rng& rng) {
    if (done_) throw ContractViolation("TabularEnv::step called after the episode ended");
    if (action.index >= mdp_->num_actions()) throw ContractViolation("TabularEnv: invalid action");
    const auto& row = mdp_->outcomes(current_, action);
    const Outcome& o = row[sample_index(row, [](const Outcome& x) { return x.probability; }, rng)];
    StepOutcome out{current_, action, o.next, o.reward, mdp_->is_terminal(o.next), false, t_};
    ++t_;
    if (!out.terminated && t_ >= mdp_->horizon()) out.truncated = true;
    current_ = o.next;
    done_ = out.ends_episode();
    return out;
}

// ---------------------------------------------------------------------------
// DeterministicEnv
// ---------------------------------------------------------------------------

StateId DeterministicEnv::reset(Rng&) {
    current_ = start_state();
    t_ = 0;
    done_ = false;
    return current_;
}

StepOutcome DeterministicEnv::step(ActionId action, Rng&) {
    if (done_) throw ContractViolation("step called after the episode ended");
    if (action.index >= num_actions()) throw ContractViolation("invalid action index");
    const Transition tr = model(current_, action);
    StepOutcome out{current_, action, tr.next, tr.reward, tr.terminal, false, t_};
    ++t_;
    if (!out.terminated && t_ >= max_steps()) out.truncated = true;
    current_ = tr.next;
    done_ = out.ends_episode();
    return out;
}

TabularMdp DeterministicEnv::to_tabular() const {
    TabularMdp mdp(num_states(), num_actions(), gamma(), max_steps());
    for (std::size_t s = 0; s < num_states(); ++s) {
        const StateId sid{s};
        if (is_terminal(sid)) {
            mdp.set_terminal(sid);
            continue;
        }
        for (std::size_t a = 0; a < num_actions(); ++a) {
            const Transition tr = model(sid, ActionId{a});
            mdp.add_outcome(sid, ActionId{a}, tr.next, 1.0, tr.reward);
        }
    }
    mdp.set_initial({{start_state(), 1.0}});
    return mdp;
}

// ---------------------------------------------------------------------------
// Cliff walking
// ---------------------------------------------------------------------------

void CliffWalkConfig::validate() const {
    if (width < 3) throw ConfigError("cliff walk: width must be >= 3");
    if (height < 2) throw ConfigError("cliff walk: height must be >= 2");
    if (max_steps < 1) throw ConfigError("cliff walk: max_steps must be >= 1");
    if (!(gamma > 0.0 && gamma <= 1.0)) throw ConfigError("cliff walk: gamma must lie in (0,1]");
}

CliffWalk::CliffWalk(CliffWalkConfig config) : config_(config) { config_.validate(); }

std::size_t CliffWalk::num_states() const {
    return static_cast<std::size_t>(config_.width) * static_cast<std::size_t>(config_.height);
}

StateId CliffWalk::state_at(int row, int col) const {
    return StateId{static_cast<std::size_t>(row * config_.width + col)};
}

std::pair<int, int> CliffWalk::position(StateId s) const {
    const int idx = static_cast<int>(s.index);
    return {idx / config_.width, idx % config_.width};
}

bool CliffWalk::is_cliff(StateId s) const {
    const auto [row, col] = position(s);
    return row == config_.height - 1 && col > 0 && col < config_.width - 1;
}

bool CliffWalk::is_terminal(StateId s) const { return is_cliff(s) || s == goal_state(); }

Transition CliffWalk::model(StateId s, ActionId a) const {
    auto [row, col] = position(s);
    switch (a.index) {
        case kUp: row = std::max(row - 1, 0); break;
        case kDown: row = std::min(row + 1, config_.height - 1); break;
        case kLeft: col = std::max(col - 1, 0); break;
        case kRight: col = std::min(col + 1, config_.width - 1); break;
        default: throw ContractViolation("cliff walk: invalid action");
    }
    const StateId next = state_at(row, col);
    if (is_cliff(next)) return {next, config_.cliff_reward, true};
    if (next == goal_state()) return {next, config_.goal_reward, true};
    return {next, config_.step_reward, false};
}

CliffWalk cliff_walk(CliffWalkConfig config) { return CliffWalk(config); }

CliffWalk long_cliff_walk(double gamma) {
    CliffWalkConfig config;
    config.width = 50;
    config.max_steps = 100;
    config.gamma = gamma;
    return CliffWalk(config);
}

std::string render_policy(const CliffWalk& env, const std::vector<ActionId>& policy) {
    static constexpr const char* kArrows[] = {"^", "v", "<", ">"};
    const auto& cfg = env.config();
    std::string out;
    for (int row = 0; row < cfg.height; ++row) {
        for (int col = 0; col < cfg.width; ++col) {
            const StateId s = env.state_at(row, col);
            if (env.is_cliff(s)) {
                out += 'C';
            } else if (s == env.goal_state()) {
                out += 'G';
            } else {
                out += kArrows[policy.at(s.index).index % 4];
            }
        }
        out += '\n';
    }
    return out;
}

// ---------------------------------------------------------------------------
// Key-door
// ---------------------------------------------------------------------------

void KeyDoorConfig::validate() const {
    auto inside = [&](std::pair<int, int> p) {
        return p.first >= 0 && p.first < height && p.second >= 0 && p.second < width;
    };
    if (width < 3 || height < 1) throw ConfigError("key door: grid too small");
    if (wall_col <= 0 || wall_col >= width - 1) throw ConfigError("key door: wall must split the grid");
    if (door_row < 0 || door_row >= height) throw ConfigError("key door: door outside the wall");
    if (!inside(start) || !inside(key) || !inside(goal)) throw ConfigError("key door: position outside grid");
    if (start.second >= wall_col || key.second >= wall_col) {
        throw ConfigError("key door: start and key must lie left of the wall");
    }
    if (goal.second <= wall_col) throw ConfigError("key door: goal must lie right of the wall");
    if (max_steps < 1) throw ConfigError("key door: max_steps must be >= 1");
    if (!(gamma > 0.0 && gamma <= 1.0)) throw ConfigError("key door: gamma must lie in (0,1]");
}

KeyDoor::KeyDoor(KeyDoorConfig config) : config_(config) { config_.validate(); }

std::size_t KeyDoor::num_states() const {
    return static_cast<std::size_t>(config_.width * config_.height) * 4;
}

StateId KeyDoor::encode(const Decoded& d) const {
    const int cell = d.row * config_.width + d.col;
    return StateId{static_cast<std::size_t>(cell * 4 + (d.has_key ? 2 : 0) + (d.door_open ? 1 : 0))};
}

KeyDoor::Decoded KeyDoor::decode(StateId s) const {
    const int idx = static_cast<int>(s.index);
    const int cell = idx / 4;
    return {cell / config_.width, cell % config_.width, (idx & 2) != 0, (idx & 1) != 0};
}

StateId KeyDoor::start_state() const {
    return encode({config_.start.first, config_.start.second, false, false});
}

bool KeyDoor::is_wall(int row, int col, bool door_open) const {
    return col == config_.wall_col && !(row == config_.door_row && door_open);
}

bool KeyDoor::is_terminal(StateId s) const {
    const Decoded d = decode(s);
    return d.row == config_.goal.first && d.col == config_.goal.second;
}

Transition KeyDoor::model(StateId s, ActionId a) const {
    Decoded d = decode(s);
    int row = d.row;
    int col = d.col;
    switch (a.index) {
        case kUp: --row; break;
        case kDown: ++row; break;
        case kLeft: --col; break;
        case kRight: ++col; break;
        case kPickup:
            if (d.row == config_.key.first && d.col == config_.key.second) d.has_key = true;
            break;
        case kToggle: {
            const int dr = std::abs(d.row - config_.door_row);
            const int dc = std::abs(d.col - config_.wall_col);
            if (d.has_key && dr + dc == 1) d.door_open = true;
            break;
        }
        default: throw ContractViolation("key door: invalid action");
    }
    const bool in_grid = row >= 0 && row < config_.height && col >= 0 && col < config_.width;
    if (in_grid && !is_wall(row, col, d.door_open)) {
        d.row = row;
        d.col = col;
    }
    const StateId next = encode(d);
    if (is_terminal(next)) return {next, config_.goal_reward, true};
    return {next, config_.step_reward, false};
}

KeyDoor key_door(KeyDoorConfig config) { return KeyDoor(config); }

// ---------------------------------------------------------------------------
// Random MDPs
// ---------------------------------------------------------------------------

void RandomMdpConfig::validate() const {
    if (num_states < 2 || num_states > 6) throw ConfigError("random mdp: num_states must lie in [2,6]");
    if (num_actions < 1 || num_actions > 3) throw ConfigError("random mdp: num_actions must lie in [1,3]");
    if (horizon < 1 || horizon > 6) throw ConfigError("random mdp: horizon must lie in [1,6]");
    if (!(reward_min <= reward_max)) throw ConfigError("random mdp: empty reward range");
    if (!(gamma > 0.0 && gamma <= 1.0)) throw ConfigError("random mdp: gamma must lie in (0,1]");
}

TabularMdp random_episodic_mdp(const RandomMdpConfig& config) {
    config.validate();
    Rng rng(config.seed);
    std::uniform_int_distribution<std::size_t> pick_state(0, config.num_states - 1);
    std::uniform_real_distribution<double> pick_reward(config.reward_min, config.reward_max);
    std::uniform_real_distribution<double> pick_prob(0.1, 0.9);

    TabularMdp mdp(config.num_states, config.num_actions, config.gamma, config.horizon);
    const StateId terminal{config.num_states - 1};
    mdp.set_terminal(terminal);
    for (std::size_t s = 0; s + 1 < config.num_states; ++s) {
        for (std::size_t a = 0; a < config.num_actions; ++a) {
            const StateId first{pick_state(rng)};
            if (config.deterministic) {
                mdp.add_outcome(StateId{s}, ActionId{a}, first, 1.0, pick_reward(rng));
                continue;
            }
            StateId second{pick_state(rng)};
            while (second == first) second = StateId{pick_state(rng)};
            const double p = pick_prob(rng);
            mdp.add_outcome(StateId{s}, ActionId{a}, first, p, pick_reward(rng));
            mdp.add_outcome(StateId{s}, ActionId{a}, second, 1.0 - p, pick_reward(rng));
        }
    }
    mdp.set_initial({{StateId{0}, 1.0}});
    mdp.validate();

    const std::size_t nodes = history_node_count(mdp, config.node_cap);
    if (nodes > config.node_cap) {
        throw ConfigError("random mdp: history tree exceeds " + std::to_string(config.node_cap) +
                          " decision nodes");
    }
    if (std::pow(static_cast<double>(config.num_actions), static_cast<double>(nodes)) > 1e6) {
        throw ConfigError("random mdp: policy count exceeds 10^6");
    }
    return mdp;
}

}  // namespace grm
