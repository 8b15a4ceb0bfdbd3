#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "grm/core.hpp"

namespace grm {

/// Per-episode information handed to intrinsic modules alongside each step.
/// `planned_actions` is only populated when the whole action sequence is known
/// up front (replays, probes); well-behaved modules never read past
/// `timestep`.
struct EpisodeContext {
    int episode = 0;
    std::span<const ActionId> planned_actions;
};

/// Producer of a raw intrinsic reward F_t for each transition.
class IntrinsicModule {
public:
    virtual ~IntrinsicModule() = default;

    virtual void begin_episode(StateId initial_state) = 0;
    virtual double observe(const StepOutcome& step, const EpisodeContext& context) = 0;
    virtual std::unique_ptr<IntrinsicModule> clone() const = 0;
    virtual std::string name() const = 0;

    /// True when the output is a function of the current episode's
    /// trajectory alone, so an oracle may recompute it per branch.
    virtual bool replayable() const { return true; }
};

/// alpha / n(s): n counts visits within the current episode, including the
/// initial state at reset.
class CountBonus final : public IntrinsicModule {
public:
    explicit CountBonus(double alpha);

    void begin_episode(StateId initial_state) override;
    double observe(const StepOutcome& step, const EpisodeContext& context) override;
    std::unique_ptr<IntrinsicModule> clone() const override;
    std::string name() const override { return "count"; }

    void visit(StateId s);
    /// alpha / n(s); 0 for a state never visited this episode.
    double bonus(StateId s) const;
    int visits(StateId s) const;
    double alpha() const { return alpha_; }

private:
    double alpha_;
    std::vector<int> counts_;
};

struct RndConfig {
    std::size_t num_states = 1;
    std::size_t hidden = 16;
    std::size_t output = 8;
    double learning_rate = 1e-6;
    double scale = 1000.0;
    double init_range = 0.05;  // weights ~ U[-init_range, init_range]
    std::uint64_t seed = 0;
};

/// Random network distillation over one-hot states: a frozen random target
/// network and a trainable predictor of the same shape (tanh hidden layer,
/// linear output). The reward is scale * mean squared prediction error.
/// Predictor state persists across episodes.
class RndLite final : public IntrinsicModule {
public:
    explicit RndLite(const RndConfig& config);

    void begin_episode(StateId initial_state) override;
    double observe(const StepOutcome& step, const EpisodeContext& context) override;
    std::unique_ptr<IntrinsicModule> clone() const override;
    std::string name() const override { return "rnd"; }
    bool replayable() const override { return false; }

    /// Reward for `s`, then one SGD step on the predictor at `s`.
    /// Throws NumericError on a non-finite output.
    double reward_and_update(StateId s);
    double reward(StateId s) const;

    /// Test hook: makes the predictor identical to the target.
    void copy_target_into_predictor();
    const RndConfig& config() const { return config_; }

private:
    struct Net {
        std::vector<double> w1;  // hidden x states
        std::vector<double> b1;
        std::vector<double> w2;  // output x hidden
        std::vector<double> b2;
    };
    void forward(const Net& net, std::size_t s, std::vector<double>& hidden,
                 std::vector<double>& out) const;
    double error(std::size_t s, std::vector<double>& hidden, std::vector<double>& pred) const;

    RndConfig config_;
    Net target_;
    Net predictor_;
};

/// Cumulative mean of every raw intrinsic reward seen in a run.
class RunningMean {
public:
    void add(double x);
    /// f - (mean of strictly earlier values, 0 when empty); then folds f in.
    double normalize(double f);

    double mean() const { return mean_; }
    std::size_t count() const { return count_; }

private:
    std::size_t count_ = 0;
    double mean_ = 0.0;
};

/// Replays a recorded trajectory through a fresh clone of `prototype` with the
/// full action sequence visible in the context. Returns F_0..F_{N-1}.
std::vector<double> replay_intrinsic(const IntrinsicModule& prototype, const Trajectory& traj);

/// Runs clones of `module` along prefix+future_a and prefix+future_b on a
/// deterministic environment (reset with the same seed each time) and reports
/// whether every F_t emitted on the shared prefix is bit-identical.
bool future_agnosticism_probe(const IntrinsicModule& module, EpisodicEnv& env,
                              std::span<const ActionId> prefix, std::span<const ActionId> future_a,
                              std::span<const ActionId> future_b, std::uint64_t seed = 0);

}  // namespace grm
