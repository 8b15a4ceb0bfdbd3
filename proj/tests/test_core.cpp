#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <sstream>

#include "grm/core.hpp"
#include "grm/envs.hpp"
#include "grm/oracle.hpp"
#include "grm/rollout.hpp"

using namespace grm;

TEST_CASE("discounted_return matches hand sums") {
    CHECK(discounted_return({}, 0.9, 0) == 0.0);
    CHECK(discounted_return({1, 2, 3}, 0.5, 0) == doctest::Approx(2.75).epsilon(1e-15));
    CHECK(discounted_return({1, 2, 3}, 0.5, 1) == doctest::Approx(3.5).epsilon(1e-15));
    CHECK(discounted_return({1, 2, 3}, 0.5, 3) == 0.0);
}

TEST_CASE("discounted_return rejects t beyond the episode") {
    CHECK_THROWS_AS(discounted_return({1, 2}, 0.9, 3), std::out_of_range);
}

TEST_CASE("discounted_return satisfies the one-step recursion") {
    Rng rng(11);
    std::uniform_real_distribution<double> reward(-10.0, 10.0);
    std::uniform_real_distribution<double> gamma_dist(0.5, 1.0);
    std::uniform_int_distribution<int> len(0, 40);
    for (int trial = 0; trial < 500; ++trial) {
        std::vector<double> r(static_cast<std::size_t>(len(rng)));
        for (double& x : r) x = reward(rng);
        const double gamma = gamma_dist(rng);
        for (std::size_t t = 0; t < r.size(); ++t) {
            const double lhs = discounted_return(r, gamma, t);
            const double rhs = r[t] + gamma * discounted_return(r, gamma, t + 1);
            REQUIRE(std::abs(lhs - rhs) < 1e-9);
        }
    }
}

TEST_CASE("trajectory csv has one line per step") {
    Trajectory traj;
    traj.states = {StateId{0}, StateId{1}, StateId{2}};
    traj.actions = {ActionId{3}, ActionId{1}};
    traj.extrinsic = {-1.0, 100.0};
    traj.intrinsic_raw = std::vector<double>{0.5, 0.25};
    std::ostringstream out;
    write_trajectory_csv(out, traj);
    CHECK(out.str() == "t,state,action,extrinsic,intrinsic_raw,intrinsic_shaped\n"
                       "0,0,3,-1,0.5,\n"
                       "1,1,1,100,0.25,\n");

    traj.extrinsic.pop_back();
    CHECK_THROWS_AS(traj.check_consistent(), ContractViolation);
}

namespace {

PolicyFn fixed_action(std::size_t a) {
    return [a](StateId, Rng&) { return ActionId{a}; };
}

PolicyFn table_policy(std::vector<ActionId> table) {
    return [table = std::move(table)](StateId s, Rng&) { return table.at(s.index); };
}

}  // namespace

TEST_CASE("rollout on a deterministic env replays its reward table") {
    auto env = cliff_walk();
    Rng rng(0);
    const auto traj = rollout(env, fixed_action(kUp), rng);
    const auto mdp = env.to_tabular();
    REQUIRE(traj.length() == 50);
    for (std::size_t t = 0; t < traj.length(); ++t) {
        const auto& row = mdp.outcomes(traj.states[t], traj.actions[t]);
        REQUIRE(row.size() == 1);
        CHECK(row[0].next == traj.states[t + 1]);
        CHECK(row[0].reward == traj.extrinsic[t]);
    }
    CHECK(traj.truncated);
    CHECK_FALSE(traj.terminated);
    CHECK(traj.extrinsic_total() == -50.0);
    CHECK_FALSE(traj.intrinsic_raw.has_value());
}

TEST_CASE("rollout of the optimal cliff-walk policy: 13 steps, return 88") {
    auto env = cliff_walk();
    const auto values = value_iteration(env.to_tabular());
    Rng rng(0);
    const auto traj = rollout(env, table_policy(greedy_policy(values.q)), rng);
    CHECK(traj.length() == 13);
    CHECK(traj.extrinsic_total() == 88.0);
    CHECK(traj.terminated);
}

TEST_CASE("rollout with identity matching yields an all-zero shaped stream") {
    auto env = cliff_walk();
    CountBonus im(1.0);
    GrmShaper shaper(std::make_shared<IdentityMatching>(), env.gamma());
    Rng rng(5);
    PolicyFn random_policy = [](StateId, Rng& r) { return ActionId{std::uniform_int_distribution<std::size_t>(0, 3)(r)}; };
    for (int ep = 0; ep < 20; ++ep) {
        const auto traj = rollout(env, random_policy, rng, {&im, nullptr, &shaper, {}, ep});
        REQUIRE(traj.intrinsic_shaped.has_value());
        REQUIRE(traj.intrinsic_raw.has_value());
        for (double x : *traj.intrinsic_shaped) CHECK(x == 0.0);
    }
}

TEST_CASE("rollout with any valid shaper has a zero discounted shaped sum") {
    auto env = cliff_walk();
    Rng rng(17);
    PolicyFn random_policy = [](StateId, Rng& r) { return ActionId{std::uniform_int_distribution<std::size_t>(0, 3)(r)}; };
    for (const char* spec : {"pbim", "delay-1", "delay-3", "delay-10"}) {
        CountBonus im(0.7);
        RunningMean mean;
        GrmShaper shaper(make_matching(spec), env.gamma());
        for (int ep = 0; ep < 50; ++ep) {
            const auto traj = rollout(env, random_policy, rng, {&im, &mean, &shaper, {}, ep});
            CHECK(std::abs(discounted_return(*traj.intrinsic_shaped, env.gamma(), 0)) < 1e-9);
        }
    }
}

TEST_CASE("rollout rejects invalid actions") {
    auto env = cliff_walk();
    Rng rng(0);
    CHECK_THROWS_AS(rollout(env, fixed_action(7), rng), ContractViolation);
}

TEST_CASE("replaying recorded actions reproduces the trajectory bit for bit") {
    auto env = key_door();
    Rng rng(3);
    PolicyFn random_policy = [](StateId, Rng& r) { return ActionId{std::uniform_int_distribution<std::size_t>(0, 5)(r)}; };
    for (int ep = 0; ep < 10; ++ep) {
        const auto original = rollout(env, random_policy, rng);
        Rng replay_rng(99);
        const auto replayed = replay_actions(env, original.actions, replay_rng);
        CHECK(replayed.states == original.states);
        CHECK(replayed.actions == original.actions);
        CHECK(replayed.extrinsic == original.extrinsic);
    }
}

TEST_CASE("step observer sees extrinsic and shaped rewards in order") {
    auto env = cliff_walk();
    CountBonus im(1.0);
    GrmShaper shaper(std::make_shared<PbimMatching>(), env.gamma());
    std::vector<double> seen;
    Rng rng(0);
    const auto traj = rollout(env, fixed_action(kRight), rng,
                              {&im, nullptr, &shaper, [&](const StepOutcome&, const StepRewards& r) { seen.push_back(r.intrinsic); }, 0});
    REQUIRE(traj.length() == 1);  // straight into the cliff
    CHECK(seen == *traj.intrinsic_shaped);
    CHECK(seen[0] == 0.0);  // single-step episode self-cancels
}
