#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "grm/core.hpp"

namespace grm {

// ---------------------------------------------------------------------------
// Explicit dynamics table
// ---------------------------------------------------------------------------

struct Outcome {
    StateId next;
    double probability = 1.0;
    double reward = 0.0;
};

/// Finite-horizon episodic MDP given as explicit tables. Terminal states are
/// absorbing; an episode also ends after `horizon` steps.
class TabularMdp {
public:
    TabularMdp() = default;
    TabularMdp(std::size_t num_states, std::size_t num_actions, double gamma, int horizon);

    std::size_t num_states() const { return num_states_; }
    std::size_t num_actions() const { return num_actions_; }
    double gamma() const { return gamma_; }
    int horizon() const { return horizon_; }

    void add_outcome(StateId s, ActionId a, StateId next, double probability, double reward);
    void set_terminal(StateId s, bool terminal = true);
    void set_initial(std::vector<std::pair<StateId, double>> distribution);

    const std::vector<Outcome>& outcomes(StateId s, ActionId a) const;
    bool is_terminal(StateId s) const { return terminal_.at(s.index); }
    const std::vector<std::pair<StateId, double>>& initial() const { return initial_; }

    /// Rows and the initial distribution must each sum to 1 within 1e-12;
    /// terminal states may have empty rows. Throws ConfigError.
    void validate() const;

    friend bool operator==(const TabularMdp&, const TabularMdp&);

private:
    std::size_t index(StateId s, ActionId a) const;

    std::size_t num_states_ = 0;
    std::size_t num_actions_ = 0;
    double gamma_ = 1.0;
    int horizon_ = 1;
    std::vector<std::vector<Outcome>> rows_;
    std::vector<bool> terminal_;
    std::vector<std::pair<StateId, double>> initial_;
};

void to_json(nlohmann::json& j, const TabularMdp& mdp);
void from_json(const nlohmann::json& j, TabularMdp& mdp);

/// Number of decision nodes in the full history tree of `mdp` (every action at
/// every node, every outcome). Counting stops once `cap` is exceeded and
/// returns cap + 1.
std::size_t history_node_count(const TabularMdp& mdp, std::size_t cap);

/// Samples episodes from a TabularMdp.
class TabularEnv final : public EpisodicEnv {
public:
    explicit TabularEnv(std::shared_ptr<const TabularMdp> mdp);

    std::size_t num_states() const override { return mdp_->num_states(); }
    std::size_t num_actions() const override { return mdp_->num_actions(); }
    double gamma() const override { return mdp_->gamma(); }
    int max_steps() const override { return mdp_->horizon(); }

    StateId reset(Rng& rng) override;
    StepOutcome step(ActionId action, Rng& rng) override;

    const TabularMdp& mdp() const { return *mdp_; }

private:
    std::shared_ptr<const TabularMdp> mdp_;
    StateId current_;
    int t_ = 0;
    bool done_ = true;
};

// ---------------------------------------------------------------------------
// Deterministic grid worlds
// ---------------------------------------------------------------------------

struct Transition {
    StateId next;
    double reward = 0.0;
    bool terminal = false;
};

/// Base for deterministic environments with a single start state. Subclasses
/// provide the transition model; reset/step and the tabular view are shared.
class DeterministicEnv : public EpisodicEnv {
public:
    StateId reset(Rng& rng) override;
    StepOutcome step(ActionId action, Rng& rng) override;

    virtual StateId start_state() const = 0;
    virtual Transition model(StateId s, ActionId a) const = 0;
    virtual bool is_terminal(StateId s) const = 0;

    TabularMdp to_tabular() const;
    StateId current() const { return current_; }

private:
    StateId current_;
    int t_ = 0;
    bool done_ = true;
};

enum GridAction : std::size_t { kUp = 0, kDown = 1, kLeft = 2, kRight = 3 };

struct CliffWalkConfig {
    int width = 12;
    int height = 4;
    double step_reward = -1.0;
    double cliff_reward = -100.0;
    double goal_reward = 100.0;
    int max_steps = 50;
    double gamma = 0.99;

    void validate() const;
};

/// Start bottom-left, goal bottom-right, the rest of the bottom row is cliff.
class CliffWalk final : public DeterministicEnv {
public:
    explicit CliffWalk(CliffWalkConfig config);

    std::size_t num_states() const override;
    std::size_t num_actions() const override { return 4; }
    double gamma() const override { return config_.gamma; }
    int max_steps() const override { return config_.max_steps; }

    StateId start_state() const override { return state_at(config_.height - 1, 0); }
    Transition model(StateId s, ActionId a) const override;
    bool is_terminal(StateId s) const override;

    StateId goal_state() const { return state_at(config_.height - 1, config_.width - 1); }
    StateId state_at(int row, int col) const;
    std::pair<int, int> position(StateId s) const;
    bool is_cliff(StateId s) const;
    const CliffWalkConfig& config() const { return config_; }

private:
    CliffWalkConfig config_;
};

CliffWalk cliff_walk(CliffWalkConfig config = {});
/// 4 x 50 grid, 100-step cap.
CliffWalk long_cliff_walk(double gamma = 0.99);

/// Arrow grid of a per-state action table; cliffs as 'C', goal as 'G'.
std::string render_policy(const CliffWalk& env, const std::vector<ActionId>& policy);

enum KeyDoorAction : std::size_t { kPickup = 4, kToggle = 5 };

struct KeyDoorConfig {
    int width = 6;
    int height = 6;
    int wall_col = 2;        // full-height wall, passable only through the door
    int door_row = 3;
    std::pair<int, int> start = {0, 0};
    std::pair<int, int> key = {4, 1};
    std::pair<int, int> goal = {5, 5};
    int max_steps = 100;
    double goal_reward = 1.0;
    double step_reward = 0.0;
    double gamma = 0.995;

    void validate() const;
};

/// Fully observable key-door grid: state = (position, has_key, door_open).
class KeyDoor final : public DeterministicEnv {
public:
    explicit KeyDoor(KeyDoorConfig config);

    std::size_t num_states() const override;
    std::size_t num_actions() const override { return 6; }
    double gamma() const override { return config_.gamma; }
    int max_steps() const override { return config_.max_steps; }

    StateId start_state() const override;
    Transition model(StateId s, ActionId a) const override;
    bool is_terminal(StateId s) const override;

    struct Decoded {
        int row = 0;
        int col = 0;
        bool has_key = false;
        bool door_open = false;
    };
    StateId encode(const Decoded& d) const;
    Decoded decode(StateId s) const;
    const KeyDoorConfig& config() const { return config_; }

private:
    bool is_wall(int row, int col, bool door_open) const;

    KeyDoorConfig config_;
};

KeyDoor key_door(KeyDoorConfig config = {});

// ---------------------------------------------------------------------------
// Random fixtures for the oracle
// ---------------------------------------------------------------------------

struct RandomMdpConfig {
    std::size_t num_states = 3;
    std::size_t num_actions = 2;
    int horizon = 3;
    double reward_min = -1.0;
    double reward_max = 1.0;
    bool deterministic = true;
    double gamma = 0.9;
    std::uint64_t seed = 0;
    std::size_t node_cap = 20;  // history-tree decision nodes

    void validate() const;
};

/// State 0 is the start, the last state is terminal. Stochastic rows have two
/// distinct successors. Throws ConfigError when the history tree exceeds
/// `node_cap` or the policy count would exceed 10^6.
TabularMdp random_episodic_mdp(const RandomMdpConfig& config);

}  // namespace grm
