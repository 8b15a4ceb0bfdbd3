#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "grm/envs.hpp"
#include "grm/intrinsic.hpp"
#include "grm/rollout.hpp"

using namespace grm;

namespace {

StepOutcome arrive(StateId s, int t = 0) { return {StateId{0}, ActionId{0}, s, 0.0, false, false, t}; }

/// Deliberately broken module: rewards the action about to be taken next.
class NextActionPeeker final : public IntrinsicModule {
public:
    void begin_episode(StateId) override {}
    double observe(const StepOutcome& step, const EpisodeContext& ctx) override {
        const auto next = static_cast<std::size_t>(step.timestep + 1);
        return next < ctx.planned_actions.size() ? static_cast<double>(ctx.planned_actions[next].index) : 0.0;
    }
    std::unique_ptr<IntrinsicModule> clone() const override { return std::make_unique<NextActionPeeker>(*this); }
    std::string name() const override { return "peeker"; }
};

}  // namespace

TEST_CASE("count bonus: 1, 1/2, 1/3 on repeated visits") {
    CountBonus bonus(1.0);
    bonus.begin_episode(StateId{5});
    // The initial state counts as the first visit.
    CHECK(bonus.bonus(StateId{5}) == 1.0);
    CHECK(bonus.observe(arrive(StateId{5}), {}) == 0.5);
    CHECK(bonus.observe(arrive(StateId{5}), {}) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
    CHECK(bonus.observe(arrive(StateId{2}), {}) == 1.0);
}

TEST_CASE("count bonus: alpha scaling and episode reset") {
    CountBonus zero(0.0);
    zero.begin_episode(StateId{0});
    CHECK(zero.observe(arrive(StateId{3}), {}) == 0.0);

    CountBonus small(0.025);
    small.begin_episode(StateId{1});
    CHECK(small.observe(arrive(StateId{1}), {}) == doctest::Approx(0.0125).epsilon(1e-15));
    small.begin_episode(StateId{0});
    CHECK(small.visits(StateId{1}) == 0);
    CHECK(small.observe(arrive(StateId{1}), {}) == doctest::Approx(0.025).epsilon(1e-15));

    CHECK_THROWS_AS(CountBonus(-1.0), ConfigError);
}

TEST_CASE("rnd: copied predictor stays at zero error") {
    RndLite rnd({.num_states = 10, .seed = 3});
    rnd.copy_target_into_predictor();
    for (int i = 0; i < 100; ++i) CHECK(rnd.reward_and_update(StateId{static_cast<std::size_t>(i % 10)}) == 0.0);
}

TEST_CASE("rnd: doubling the scale doubles every reward") {
    RndConfig base{.num_states = 12, .learning_rate = 1e-3, .seed = 7};
    RndConfig doubled = base;
    doubled.scale *= 2.0;
    RndLite a(base);
    RndLite b(doubled);
    Rng rng(1);
    std::uniform_int_distribution<std::size_t> pick(0, 11);
    for (int i = 0; i < 500; ++i) {
        const StateId s{pick(rng)};
        CHECK(b.reward_and_update(s) == 2.0 * a.reward_and_update(s));
    }
}

TEST_CASE("rnd: repeated queries on one state do not increase the reward") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        RndLite rnd({.num_states = 48, .learning_rate = 0.01, .seed = seed});
        double prev = rnd.reward_and_update(StateId{seed % 48});
        CHECK(prev > 0.0);
        for (int i = 0; i < 300; ++i) {
            const double r = rnd.reward_and_update(StateId{seed % 48});
            REQUIRE(r <= prev);
            prev = r;
        }
    }
}

TEST_CASE("rnd: reward is deterministic for a seed and rejects bad input") {
    RndLite a({.num_states = 4, .seed = 9});
    RndLite b({.num_states = 4, .seed = 9});
    for (std::size_t s = 0; s < 4; ++s) CHECK(a.reward(StateId{s}) == b.reward(StateId{s}));
    CHECK_THROWS_AS(a.reward(StateId{4}), ContractViolation);
    CHECK_THROWS_AS(RndLite({.num_states = 0}), ConfigError);
}

TEST_CASE("running mean normalization uses the prior mean") {
    SUBCASE("stream 1,2,3") {
        RunningMean m;
        CHECK(m.normalize(1.0) == 1.0);
        CHECK(m.normalize(2.0) == 1.0);
        CHECK(m.normalize(3.0) == 1.5);
    }
    SUBCASE("constant stream") {
        RunningMean m;
        CHECK(m.normalize(4.5) == 4.5);
        for (int i = 0; i < 20; ++i) CHECK(m.normalize(4.5) == 0.0);
    }
    SUBCASE("mean tracks all values") {
        RunningMean m;
        for (double x : {2.0, 4.0, 9.0}) m.add(x);
        CHECK(m.mean() == 5.0);
        CHECK(m.count() == 3);
    }
}

TEST_CASE("future agnosticism probe") {
    auto env = cliff_walk();
    const std::vector<ActionId> prefix{ActionId{kUp}, ActionId{kRight}, ActionId{kRight}};
    const std::vector<ActionId> fut_a{ActionId{kRight}, ActionId{kRight}};
    const std::vector<ActionId> fut_b{ActionId{kUp}, ActionId{kLeft}};

    CHECK(future_agnosticism_probe(CountBonus(1.0), env, prefix, fut_a, fut_b));

    RndLite rnd({.num_states = env.num_states(), .learning_rate = 0.01, .seed = 4});
    CHECK(future_agnosticism_probe(rnd, env, prefix, fut_a, fut_b));

    CHECK_FALSE(future_agnosticism_probe(NextActionPeeker(), env, prefix, fut_a, fut_b));
}

TEST_CASE("replay_intrinsic reproduces a live count-bonus stream") {
    auto env = key_door();
    Rng rng(8);
    PolicyFn random_policy = [](StateId, Rng& r) { return ActionId{std::uniform_int_distribution<std::size_t>(0, 5)(r)}; };
    CountBonus live(0.3);
    for (int ep = 0; ep < 10; ++ep) {
        const auto traj = rollout(env, random_policy, rng, {&live, nullptr, nullptr, {}, ep});
        CHECK(replay_intrinsic(CountBonus(0.3), traj) == *traj.intrinsic_raw);
    }
}
