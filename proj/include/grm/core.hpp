#pragma once

#include <compare>
#include <cstddef>
#include <iosfwd>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace grm {

using Rng = std::mt19937_64;

// ---------------------------------------------------------------------------
// Error types
// ---------------------------------------------------------------------------

/// A caller broke an operation's precondition (bad action index, bad policy, ...).
class ContractViolation : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// A non-finite value appeared in a reward or network output.
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A matching function broke the [0,1] range or over-matched a reward.
class MatchingError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// An exhaustive enumeration would exceed its configured size cap.
class CapacityError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid configuration (environment, experiment or generator parameters).
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// ---------------------------------------------------------------------------
// Identifiers and transitions
// ---------------------------------------------------------------------------

struct StateId {
    std::size_t index = 0;
    friend auto operator<=>(const StateId&, const StateId&) = default;
};

struct ActionId {
    std::size_t index = 0;
    friend auto operator<=>(const ActionId&, const ActionId&) = default;
};

struct StepOutcome {
    StateId state;
    ActionId action;
    StateId next_state;
    double extrinsic_reward = 0.0;
    bool terminated = false;
    bool truncated = false;
    int timestep = 0;

    bool ends_episode() const { return terminated || truncated; }
};

/// Stateful episodic environment over an enumerated state space.
class EpisodicEnv {
public:
    virtual ~EpisodicEnv() = default;

    virtual std::size_t num_states() const = 0;
    virtual std::size_t num_actions() const = 0;
    virtual double gamma() const = 0;
    virtual int max_steps() const = 0;

    virtual StateId reset(Rng& rng) = 0;
    /// Advances one step. Throws ContractViolation for an out-of-range action
    /// or when called after the episode ended.
    virtual StepOutcome step(ActionId action, Rng& rng) = 0;
};

// ---------------------------------------------------------------------------
// Trajectories and returns
// ---------------------------------------------------------------------------

/// sum_{n=t}^{N-1} gamma^{n-t} r_n. Throws std::out_of_range unless 0 <= t <= N.
double discounted_return(const std::vector<double>& rewards, double gamma, std::size_t t);

struct Trajectory {
    std::vector<StateId> states;      // N + 1
    std::vector<ActionId> actions;    // N
    std::vector<double> extrinsic;    // N
    std::optional<std::vector<double>> intrinsic_raw;     // N when an IM ran
    std::optional<std::vector<double>> intrinsic_shaped;  // N when a shaper ran
    bool terminated = false;
    bool truncated = false;

    std::size_t length() const { return actions.size(); }
    double extrinsic_total() const;

    /// Throws ContractViolation if the per-step lists disagree in length.
    void check_consistent() const;
};

/// One line per step: t,state,action,extrinsic,intrinsic_raw,intrinsic_shaped.
/// Missing intrinsic streams are written as empty fields.
void write_trajectory_csv(std::ostream& out, const Trajectory& traj);

}  // namespace grm
