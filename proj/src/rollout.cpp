#include "grm/rollout.hpp"

namespace grm {

Trajectory rollout(EpisodicEnv& env, const PolicyFn& policy, Rng& rng, const RolloutHooks& hooks) {
    Trajectory traj;
    const StateId s0 = env.reset(rng);
    traj.states.push_back(s0);
    if (hooks.intrinsic) {
        hooks.intrinsic->begin_episode(s0);
        traj.intrinsic_raw.emplace();
    }
    if (hooks.shaper) {
        hooks.shaper->reset();
        traj.intrinsic_shaped.emplace();
    }
    const EpisodeContext ctx{hooks.episode, {}};

    StateId s = s0;
    for (int t = 0; t < env.max_steps(); ++t) {
        const ActionId a = policy(s, rng);
        if (a.index >= env.num_actions()) {
            throw ContractViolation("policy returned action " + std::to_string(a.index) + " outside [0, " +
                                    std::to_string(env.num_actions()) + ")");
        }
        const StepOutcome step = env.step(a, rng);
        const bool last = step.ends_episode();

        StepRewards rewards;
        if (hooks.intrinsic) {
            rewards.raw = hooks.intrinsic->observe(step, ctx);
            traj.intrinsic_raw->push_back(rewards.raw);
            double adjusted = hooks.normalizer ? hooks.normalizer->normalize(rewards.raw) : rewards.raw;
            if (hooks.shaper) {
                adjusted = hooks.shaper->step(adjusted, last);
                traj.intrinsic_shaped->push_back(adjusted);
            }
            rewards.intrinsic = adjusted;
        } else if (hooks.shaper) {
            rewards.intrinsic = hooks.shaper->step(0.0, last);
            traj.intrinsic_shaped->push_back(rewards.intrinsic);
        }

        traj.actions.push_back(a);
        traj.extrinsic.push_back(step.extrinsic_reward);
        traj.states.push_back(step.next_state);
        if (hooks.on_step) hooks.on_step(step, rewards);

        s = step.next_state;
        if (last) {
            traj.terminated = step.terminated;
            traj.truncated = step.truncated;
            break;
        }
    }
    return traj;
}

Trajectory replay_actions(EpisodicEnv& env, const std::vector<ActionId>& actions, Rng& rng) {
    std::size_t next = 0;
    PolicyFn scripted = [&](StateId, Rng&) {
        if (next >= actions.size()) throw ContractViolation("replay_actions: episode outlived the action list");
        return actions[next++];
    };
    return rollout(env, scripted, rng);
}

}  // namespace grm
