#pragma once

#include <functional>

#include "grm/core.hpp"
#include "grm/intrinsic.hpp"
#include "grm/shaping.hpp"

namespace grm {

using PolicyFn = std::function<ActionId(StateId, Rng&)>;

/// Per-step rewards seen by a learner: `intrinsic` is the shaped reward when
/// a shaper is attached, otherwise the (optionally mean-adjusted) raw reward,
/// and 0 without an intrinsic module.
struct StepRewards {
    double raw = 0.0;
    double intrinsic = 0.0;
};

using StepObserver = std::function<void(const StepOutcome&, const StepRewards&)>;

struct RolloutHooks {
    IntrinsicModule* intrinsic = nullptr;
    RunningMean* normalizer = nullptr;  // applied to raw rewards before shaping
    GrmShaper* shaper = nullptr;
    StepObserver on_step;
    int episode = 0;
};

/// Runs one episode. The shaper is reset first and settled on the episode's
/// last step (termination or truncation). Throws ContractViolation if the
/// policy returns an out-of-range action.
Trajectory rollout(EpisodicEnv& env, const PolicyFn& policy, Rng& rng, const RolloutHooks& hooks = {});

/// Replays `actions` from reset; stops early if the episode ends.
Trajectory replay_actions(EpisodicEnv& env, const std::vector<ActionId>& actions, Rng& rng);

}  // namespace grm
