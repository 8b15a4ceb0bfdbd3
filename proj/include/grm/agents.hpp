#pragma once

#include <cstdint>
#include <vector>

#include "grm/core.hpp"

namespace grm {

class QTable {
public:
    QTable(std::size_t num_states, std::size_t num_actions, double init = 0.0);

    double& operator()(StateId s, ActionId a) { return values_[s.index * num_actions_ + a.index]; }
    double operator()(StateId s, ActionId a) const { return values_[s.index * num_actions_ + a.index]; }

    double max(StateId s) const;
    std::size_t num_states() const { return num_states_; }
    std::size_t num_actions() const { return num_actions_; }
    const std::vector<double>& values() const { return values_; }

    friend bool operator==(const QTable&, const QTable&) = default;

private:
    std::size_t num_states_;
    std::size_t num_actions_;
    std::vector<double> values_;
};

/// epsilon(k) = max(floor, start - k * decay_per_episode)
struct EpsilonSchedule {
    double start = 1.0;
    double decay_per_episode = 5e-3;
    double floor = 0.1;

    double at(int episode) const;
};

struct QLearningConfig {
    double learning_rate = 0.1;
    double gamma = 0.99;
    int episodes = 5000;
    std::uint64_t seed = 0;

    void validate() const;
};

/// One-step Q-learning backup. Bootstrapping is dropped on terminated (not
/// truncated) transitions. Throws NumericError for a non-finite reward or Q-value.
void q_update(QTable& table, const StepOutcome& transition, double shaped_total_reward,
              const QLearningConfig& cfg);

/// Epsilon-greedy; greedy ties are broken uniformly at random.
ActionId select_action(const QTable& table, StateId s, double epsilon, Rng& rng);

/// Lowest-index argmax per state.
std::vector<ActionId> greedy_policy(const QTable& table);

}  // namespace grm
