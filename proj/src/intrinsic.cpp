#include "grm/intrinsic.hpp"

#include <algorithm>
#include <cmath>

namespace grm {

// ---------------------------------------------------------------------------
// CountBonus
// ---------------------------------------------------------------------------

CountBonus::CountBonus(double alpha) : alpha_(alpha) {
    if (!(alpha >= 0.0) || !std::isfinite(alpha)) throw ConfigError("count bonus: alpha must be finite and >= 0");
}

void CountBonus::begin_episode(StateId initial_state) {
    counts_.assign(counts_.size(), 0);
    visit(initial_state);
}

void CountBonus::visit(StateId s) {
    if (s.index >= counts_.size()) counts_.resize(s.index + 1, 0);
    ++counts_[s.index];
}

int CountBonus::visits(StateId s) const {
    return s.index < counts_.size() ? counts_[s.index] : 0;
}

double CountBonus::bonus(StateId s) const {
    const int n = visits(s);
    return n == 0 ? 0.0 : alpha_ / static_cast<double>(n);
}

double CountBonus::observe(const StepOutcome& step, const EpisodeContext&) {
    visit(step.next_state);
    return bonus(step.next_state);
}

std::unique_ptr<IntrinsicModule> CountBonus::clone() const { return std::make_unique<CountBonus>(*this); }

// ---------------------------------------------------------------------------
// RndLite
// ---------------------------------------------------------------------------

RndLite::RndLite(const RndConfig& config) : config_(config) {
    if (config.num_states == 0 || config.hidden == 0 || config.output == 0) {
        throw ConfigError("rnd: network dimensions must be positive");
    }
    if (!(config.learning_rate >= 0.0) || !(config.scale >= 0.0)) {
        throw ConfigError("rnd: learning rate and scale must be >= 0");
    }
    Rng rng(config.seed);
    std::uniform_real_distribution<double> init(-config.init_range, config.init_range);
    auto make_net = [&] {
        Net net;
        net.w1.resize(config.hidden * config.num_states);
        net.b1.resize(config.hidden);
        net.w2.resize(config.output * config.hidden);
        net.b2.resize(config.output);
        for (auto* v : {&net.w1, &net.b1, &net.w2, &net.b2}) {
            for (double& x : *v) x = init(rng);
        }
        return net;
    };
    target_ = make_net();
    predictor_ = make_net();
}

void RndLite::begin_episode(StateId) {}

void RndLite::forward(const Net& net, std::size_t s, std::vector<double>& hidden,
                      std::vector<double>& out) const {
    const std::size_t H = config_.hidden;
    const std::size_t S = config_.num_states;
    hidden.resize(H);
    out.resize(config_.output);
    for (std::size_t h = 0; h < H; ++h) hidden[h] = std::tanh(net.w1[h * S + s] + net.b1[h]);
    for (std::size_t k = 0; k < config_.output; ++k) {
        double acc = net.b2[k];
        for (std::size_t h = 0; h < H; ++h) acc += net.w2[k * H + h] * hidden[h];
        out[k] = acc;
    }
}

double RndLite::error(std::size_t s, std::vector<double>& hidden, std::vector<double>& pred) const {
    if (s >= config_.num_states) throw ContractViolation("rnd: state outside the one-hot encoding");
    std::vector<double> target_hidden;
    std::vector<double> target_out;
    forward(target_, s, target_hidden, target_out);
    forward(predictor_, s, hidden, pred);
    double sq = 0.0;
    for (std::size_t k = 0; k < config_.output; ++k) {
        pred[k] -= target_out[k];  // pred now holds the residual
        sq += pred[k] * pred[k];
    }
    sq /= static_cast<double>(config_.output);
    if (!std::isfinite(sq)) throw NumericError("rnd: non-finite prediction error");
    return sq;
}

double RndLite::reward(StateId s) const {
    std::vector<double> hidden;
    std::vector<double> residual;
    return config_.scale * error(s.index, hidden, residual);
}

double RndLite::reward_and_update(StateId s) {
    std::vector<double> hidden;
    std::vector<double> residual;
    const double err = error(s.index, hidden, residual);

    const std::size_t H = config_.hidden;
    const std::size_t S = config_.num_states;
    const std::size_t K = config_.output;
    const double lr = config_.learning_rate;
    // d(mean sq)/d(out_k) = 2 * residual_k / K
    std::vector<double> d_out(K);
    for (std::size_t k = 0; k < K; ++k) d_out[k] = 2.0 * residual[k] / static_cast<double>(K);
    std::vector<double> d_hidden(H, 0.0);
    for (std::size_t k = 0; k < K; ++k) {
        for (std::size_t h = 0; h < H; ++h) {
            d_hidden[h] += predictor_.w2[k * H + h] * d_out[k];
            predictor_.w2[k * H + h] -= lr * d_out[k] * hidden[h];
        }
        predictor_.b2[k] -= lr * d_out[k];
    }
    for (std::size_t h = 0; h < H; ++h) {
        const double d_pre = d_hidden[h] * (1.0 - hidden[h] * hidden[h]);
        predictor_.w1[h * S + s.index] -= lr * d_pre;
        predictor_.b1[h] -= lr * d_pre;
    }
    return config_.scale * err;
}

double RndLite::observe(const StepOutcome& step, const EpisodeContext&) {
    return reward_and_update(step.next_state);
}

std::unique_ptr<IntrinsicModule> RndLite::clone() const { return std::make_unique<RndLite>(*this); }

void RndLite::copy_target_into_predictor() { predictor_ = target_; }

// ---------------------------------------------------------------------------
// RunningMean
// ---------------------------------------------------------------------------

void RunningMean::add(double x) {
    ++count_;
    mean_ += (x - mean_) / static_cast<double>(count_);
}

double RunningMean::normalize(double f) {
    const double out = f - mean_;
    add(f);
    return out;
}

// ---------------------------------------------------------------------------
// Replay and probing
// ---------------------------------------------------------------------------

std::vector<double> replay_intrinsic(const IntrinsicModule& prototype, const Trajectory& traj) {
    traj.check_consistent();
    auto module = prototype.clone();
    module->begin_episode(traj.states.front());
    const EpisodeContext ctx{0, std::span<const ActionId>(traj.actions)};
    std::vector<double> f;
    f.reserve(traj.length());
    for (std::size_t t = 0; t < traj.length(); ++t) {
        const bool last = t + 1 == traj.length();
        StepOutcome step{traj.states[t], traj.actions[t], traj.states[t + 1], traj.extrinsic[t],
                         last && traj.terminated, last && traj.truncated, static_cast<int>(t)};
        f.push_back(module->observe(step, ctx));
    }
    return f;
}

namespace {

std::vector<double> probe_run(const IntrinsicModule& module, EpisodicEnv& env,
                              const std::vector<ActionId>& actions, std::uint64_t seed) {
    Rng rng(seed);
    auto clone = module.clone();
    const StateId s0 = env.reset(rng);
    clone->begin_episode(s0);
    const EpisodeContext ctx{0, std::span<const ActionId>(actions)};
    std::vector<double> f;
    for (const ActionId a : actions) {
        const StepOutcome step = env.step(a, rng);
        f.push_back(clone->observe(step, ctx));
        if (step.ends_episode()) break;
    }
    return f;
}

}  // namespace

bool future_agnosticism_probe(const IntrinsicModule& module, EpisodicEnv& env,
                              std::span<const ActionId> prefix, std::span<const ActionId> future_a,
                              std::span<const ActionId> future_b, std::uint64_t seed) {
    std::vector<ActionId> seq_a(prefix.begin(), prefix.end());
    seq_a.insert(seq_a.end(), future_a.begin(), future_a.end());
    std::vector<ActionId> seq_b(prefix.begin(), prefix.end());
    seq_b.insert(seq_b.end(), future_b.begin(), future_b.end());

    const auto f_a = probe_run(module, env, seq_a, seed);
    const auto f_b = probe_run(module, env, seq_b, seed);
    const std::size_t shared = std::min({prefix.size(), f_a.size(), f_b.size()});
    for (std::size_t t = 0; t < shared; ++t) {
        if (f_a[t] != f_b[t]) return false;
    }
    return true;
}

}  // namespace grm
