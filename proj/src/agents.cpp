#include "grm/agents.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace grm {

QTable::QTable(std::size_t num_states, std::size_t num_actions, double init)
    : num_states_(num_states), num_actions_(num_actions), values_(num_states * num_actions, init) {
    if (num_states == 0 || num_actions == 0) throw ConfigError("QTable: empty state or action space");
}

double QTable::max(StateId s) const {
    const auto first = values_.begin() + static_cast<std::ptrdiff_t>(s.index * num_actions_);
    return *std::max_element(first, first + static_cast<std::ptrdiff_t>(num_actions_));
}

double EpsilonSchedule::at(int episode) const {
    return std::max(floor, start - static_cast<double>(episode) * decay_per_episode);
}

void QLearningConfig::validate() const {
    if (!(learning_rate > 0.0 && learning_rate <= 1.0)) throw ConfigError("agent.lr must lie in (0,1]");
    if (!(gamma > 0.0 && gamma <= 1.0)) throw ConfigError("agent gamma must lie in (0,1]");
    if (episodes < 1) throw ConfigError("agent.episodes must be >= 1");
}

void q_update(QTable& table, const StepOutcome& transition, double shaped_total_reward,
              const QLearningConfig& cfg) {
    if (!std::isfinite(shaped_total_reward)) throw NumericError("q_update: non-finite reward");
    if (transition.state.index >= table.num_states() || transition.next_state.index >= table.num_states() ||
        transition.action.index >= table.num_actions()) {
        throw ContractViolation("q_update: index out of range");
    }
    const double bootstrap = transition.terminated ? 0.0 : cfg.gamma * table.max(transition.next_state);
    double& q = table(transition.state, transition.action);
    const double updated = q + cfg.learning_rate * (shaped_total_reward + bootstrap - q);
    if (!std::isfinite(updated)) throw NumericError("q_update: Q-value overflowed");
    q = updated;
}

ActionId select_action(const QTable& table, StateId s, double epsilon, Rng& rng) {
    const std::size_t n = table.num_actions();
    if (std::uniform_real_distribution<double>(0.0, 1.0)(rng) < epsilon) {
        return ActionId{std::uniform_int_distribution<std::size_t>(0, n - 1)(rng)};
    }
    const double best = table.max(s);
    std::array<std::size_t, 64> ties{};
    std::size_t count = 0;
    for (std::size_t a = 0; a < n && count < 64; ++a) {
        if (table(s, ActionId{a}) == best) ties[count++] = a;
    }
    if (count == 1) return ActionId{ties[0]};
    return ActionId{ties[std::uniform_int_distribution<std::size_t>(0, count - 1)(rng)]};
}

std::vector<ActionId> greedy_policy(const QTable& table) {
    std::vector<ActionId> policy(table.num_states());
    for (std::size_t s = 0; s < table.num_states(); ++s) {
        std::size_t best = 0;
        for (std::size_t a = 1; a < table.num_actions(); ++a) {
            if (table(StateId{s}, ActionId{a}) > table(StateId{s}, ActionId{best})) best = a;
        }
        policy[s] = ActionId{best};
    }
    return policy;
}

}  // namespace grm
