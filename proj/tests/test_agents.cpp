#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "grm/agents.hpp"
#include "grm/envs.hpp"
#include "grm/rollout.hpp"

using namespace grm;

namespace {

StepOutcome transition(std::size_t s, std::size_t a, std::size_t next, bool terminated) {
    return {StateId{s}, ActionId{a}, StateId{next}, 0.0, terminated, false, 0};
}

}  // namespace

TEST_CASE("q_update hand arithmetic") {
    SUBCASE("terminal backup from zero") {
        QTable q(2, 2);
        q_update(q, transition(0, 1, 1, true), 1.0, {.learning_rate = 0.5});
        CHECK(q(StateId{0}, ActionId{1}) == 0.5);
    }
    SUBCASE("bootstrapped backup") {
        QTable q(2, 2, 1.0);
        q_update(q, transition(0, 0, 1, false), 1.0, {.learning_rate = 1.0, .gamma = 0.99});
        CHECK(q(StateId{0}, ActionId{0}) == doctest::Approx(1.99).epsilon(1e-15));
    }
    SUBCASE("truncation still bootstraps") {
        QTable q(2, 1, 2.0);
        StepOutcome step = transition(0, 0, 1, false);
        step.truncated = true;
        q_update(q, step, 0.0, {.learning_rate = 1.0, .gamma = 0.5});
        CHECK(q(StateId{0}, ActionId{0}) == 1.0);
    }
    SUBCASE("zero learning rate leaves the table alone") {
        QTable q(3, 2, 0.25);
        const QTable before = q;
        q_update(q, transition(1, 1, 2, false), 7.0, {.learning_rate = 0.0});
        CHECK(q == before);
    }
    SUBCASE("non-finite reward") {
        QTable q(2, 2);
        CHECK_THROWS_AS(q_update(q, transition(0, 0, 1, false), std::nan(""), {}), NumericError);
    }
}

TEST_CASE("epsilon schedule is linear with a floor") {
    EpsilonSchedule eps;
    CHECK(eps.at(0) == 1.0);
    CHECK(eps.at(100) == doctest::Approx(0.5));
    CHECK(eps.at(180) == doctest::Approx(0.1));
    CHECK(eps.at(5000) == 0.1);
}

TEST_CASE("select_action sampling") {
    Rng rng(12);
    const int draws = 10000;

    SUBCASE("epsilon 1 is uniform") {
        QTable q(1, 4);
        q(StateId{0}, ActionId{2}) = 5.0;
        std::array<int, 4> counts{};
        for (int i = 0; i < draws; ++i) ++counts[select_action(q, StateId{0}, 1.0, rng).index];
        const double p = 0.25;
        const double sigma = std::sqrt(draws * p * (1 - p));
        for (int c : counts) CHECK(std::abs(c - draws * p) < 3 * sigma);
    }
    SUBCASE("epsilon 0 with a unique maximizer") {
        QTable q(1, 4);
        q(StateId{0}, ActionId{3}) = 0.1;
        for (int i = 0; i < 200; ++i) CHECK(select_action(q, StateId{0}, 0.0, rng).index == 3);
    }
    SUBCASE("epsilon 0 breaks ties uniformly") {
        QTable q(1, 3);
        q(StateId{0}, ActionId{0}) = 1.0;
        q(StateId{0}, ActionId{2}) = 1.0;
        int first = 0;
        for (int i = 0; i < draws; ++i) {
            const auto a = select_action(q, StateId{0}, 0.0, rng).index;
            REQUIRE(a != 1);
            first += a == 0 ? 1 : 0;
        }
        const double sigma = std::sqrt(draws * 0.25);
        CHECK(std::abs(first - draws / 2.0) < 3 * sigma);
    }
}

TEST_CASE("greedy_policy picks the lowest-index argmax") {
    QTable q(2, 4);
    q(StateId{0}, ActionId{1}) = 1.0;
    const auto policy = greedy_policy(q);
    CHECK(policy[0].index == 1);
    CHECK(policy[1].index == 0);
}

TEST_CASE("q-learning on the cliff walk converges to the 13-step path") {
    auto env = cliff_walk();
    const QLearningConfig cfg{.learning_rate = 0.1, .gamma = env.gamma(), .episodes = 3000, .seed = 1};
    const EpsilonSchedule schedule;
    QTable q(env.num_states(), env.num_actions());
    Rng rng(cfg.seed);
    for (int ep = 0; ep < cfg.episodes; ++ep) {
        const double eps = schedule.at(ep);
        PolicyFn behaviour = [&](StateId s, Rng& r) { return select_action(q, s, eps, r); };
        rollout(env, behaviour, rng,
                {nullptr, nullptr, nullptr,
                 [&](const StepOutcome& step, const StepRewards&) { q_update(q, step, step.extrinsic_reward, cfg); }, ep});
    }
    const auto policy = greedy_policy(q);
    const auto traj = rollout(env, [&](StateId s, Rng&) { return policy[s.index]; }, rng);
    CHECK(traj.length() == 13);
    CHECK(traj.extrinsic_total() == 88.0);
}

TEST_CASE("config validation") {
    CHECK_THROWS_AS((QLearningConfig{.learning_rate = -0.1}.validate()), ConfigError);
    CHECK_THROWS_AS((QLearningConfig{.gamma = 1.5}.validate()), ConfigError);
    CHECK_NOTHROW(QLearningConfig{}.validate());
}
