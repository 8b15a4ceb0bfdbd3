#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <deque>

#include "grm/oracle.hpp"
#include "grm/rollout.hpp"

using namespace grm;

namespace {

TabularMdp self_loop_mdp(std::size_t actions, int horizon) {
    TabularMdp mdp(1, actions, 0.9, horizon);
    for (std::size_t a = 0; a < actions; ++a) mdp.add_outcome(StateId{0}, ActionId{a}, StateId{0}, 1.0, 0.0);
    return mdp;
}

/// 0 --a0--> 1, 0 --a1--> 2; states 1 and 2 loop on themselves.
TabularMdp branching_chain(int horizon) {
    TabularMdp mdp(3, 2, 0.9, horizon);
    mdp.add_outcome(StateId{0}, ActionId{0}, StateId{1}, 1.0, 1.0);
    mdp.add_outcome(StateId{0}, ActionId{1}, StateId{2}, 1.0, 0.0);
    for (std::size_t s : {1, 2}) {
        for (std::size_t a = 0; a < 2; ++a) mdp.add_outcome(StateId{s}, ActionId{a}, StateId{s}, 1.0, 0.5);
    }
    return mdp;
}

/// Every state, every action: two equally likely successors.
TabularMdp dense_stochastic(std::size_t states, std::size_t actions, int horizon) {
    TabularMdp mdp(states, actions, 0.9, horizon);
    for (std::size_t s = 0; s < states; ++s) {
        for (std::size_t a = 0; a < actions; ++a) {
            mdp.add_outcome(StateId{s}, ActionId{a}, StateId{(s + a) % states}, 0.5, 0.0);
            mdp.add_outcome(StateId{s}, ActionId{a}, StateId{(s + a + 1) % states}, 0.5, 1.0);
        }
    }
    return mdp;
}

RandomMdpConfig small_config(std::uint64_t seed) {
    RandomMdpConfig cfg;
    cfg.seed = seed;
    switch (seed % 3) {
        case 0: cfg.num_states = 4; cfg.num_actions = 2; cfg.horizon = 3; break;
        case 1: cfg.num_states = 3; cfg.num_actions = 3; cfg.horizon = 2; break;
        default: cfg.num_states = 3; cfg.num_actions = 2; cfg.horizon = 2; cfg.deterministic = false; break;
    }
    return cfg;
}

/// Shortest start-to-goal path on the cliff grid, cliffs excluded.
int bfs_shortest_path(const CliffWalk& env) {
    const auto mdp = env.to_tabular();
    std::vector<int> dist(mdp.num_states(), -1);
    std::deque<StateId> queue{env.start_state()};
    dist[env.start_state().index] = 0;
    while (!queue.empty()) {
        const StateId s = queue.front();
        queue.pop_front();
        if (s == env.goal_state()) return dist[s.index];
        if (mdp.is_terminal(s)) continue;
        for (std::size_t a = 0; a < mdp.num_actions(); ++a) {
            const StateId next = mdp.outcomes(s, ActionId{a}).front().next;
            if (env.is_cliff(next) || dist[next.index] >= 0) continue;
            dist[next.index] = dist[s.index] + 1;
            queue.push_back(next);
        }
    }
    return -1;
}

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

TEST_CASE("policy enumeration counts") {
    CHECK(enumerate_policies(self_loop_mdp(2, 1)).size() == 2);
    CHECK(enumerate_policies(branching_chain(2)).size() == 8);

    const auto policies = enumerate_policies(branching_chain(2));
    for (std::size_t id = 0; id < policies.size(); ++id) CHECK(policies[id].id == id);
    CHECK(policies[0].decisions != policies[7].decisions);

    try {
        enumerate_policies(dense_stochastic(6, 3, 6));
        FAIL("expected a capacity error");
    } catch (const CapacityError& e) {
        CHECK(std::string(e.what()).find("nodes") != std::string::npos);
    }
}

TEST_CASE("exact_return: identity shaping equals raw") {
    for (std::uint64_t seed = 0; seed < 12; ++seed) {
        const auto mdp = random_episodic_mdp(small_config(seed));
        const auto spec = make_shaping_spec("identity", 1.0);
        for (const auto& policy : enumerate_policies(mdp)) {
            const auto r = exact_return(mdp, policy, spec);
            CHECK(r.shaped == doctest::Approx(r.raw).epsilon(1e-12));
        }
    }
}

TEST_CASE("exact_return: valid matchings add zero in expectation") {
    for (std::uint64_t seed = 0; seed < 12; ++seed) {
        const auto mdp = random_episodic_mdp(small_config(seed));
        for (const char* m : {"pbim", "delay-1", "delay-2"}) {
            const auto spec = make_shaping_spec(m, 2.0);
            for (const auto& policy : enumerate_policies(mdp)) {
                const auto r = exact_return(mdp, policy, spec);
                CHECK(std::abs(r.shaped - r.raw) < 1e-9);
            }
        }
    }
}

TEST_CASE("exact_return matches a hand-computed chain") {
    // Policy 0 always picks action 0: reward 1 then 0.5 -> 1 + 0.9 * 0.5.
    const auto mdp = branching_chain(2);
    const auto policies = enumerate_policies(mdp);
    const auto r = exact_return(mdp, policies[0], make_shaping_spec("none", 0.0));
    CHECK(r.raw == doctest::Approx(1.45));
    CHECK(r.shaped == doctest::Approx(1.45));

    // Raw count bonus: state 1 first seen at t=0, revisited at t=1.
    const auto raw = exact_return(mdp, policies[0], make_shaping_spec("raw", 1.0));
    CHECK(raw.shaped == doctest::Approx(1.45 + 1.0 + 0.9 * 0.5));
}

TEST_CASE("oracle refuses modules it cannot replay") {
    const auto mdp = branching_chain(2);
    const auto tree = build_history_tree(mdp);
    CHECK_NOTHROW(check_oracle_intrinsic(mdp, tree, CountBonus(1.0)));
    CHECK_THROWS_AS(check_oracle_intrinsic(mdp, tree, RndLite({.num_states = 3})), ContractViolation);
    CHECK_THROWS_AS(check_oracle_intrinsic(mdp, tree, NextActionPeeker()), ContractViolation);

    ShapingSpec peeking{std::make_shared<NextActionPeeker>(), make_matching("pbim"), "peeker"};
    CHECK_THROWS_AS(policy_preservation_check(mdp, peeking), ContractViolation);
}

TEST_CASE("policy preservation: identity always passes") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const auto report = policy_preservation_check(random_episodic_mdp(small_config(seed)),
                                                      make_shaping_spec("identity", 1.0));
        CHECK(report.pass);
        CHECK(report.raw_optimal == report.shaped_optimal);
    }
}

TEST_CASE("policy preservation: PBIM and delay matchings on 100 random MDPs") {
    for (const char* m : {"pbim", "delay-1", "delay-2", "delay-10"}) {
        int passed = 0;
        for (std::uint64_t seed = 0; seed < 100; ++seed) {
            const auto report = policy_preservation_check(random_episodic_mdp(small_config(seed)),
                                                          make_shaping_spec(m, 1.0));
            passed += report.pass ? 1 : 0;
        }
        CHECK_MESSAGE(passed == 100, m);
    }
}

TEST_CASE("procrastination fixture: raw count bonus prefers stalling, PBIM does not") {
    const auto mdp = procrastination_fixture(1.0, 0.99);
    const auto tree = build_history_tree(mdp);
    REQUIRE(tree.roots.size() == 1);
    const std::size_t root = tree.roots.front().node;
    const auto policies = enumerate_policies(mdp);

    const auto raw = policy_preservation_check(mdp, make_shaping_spec("raw", 1.0));
    CHECK_FALSE(raw.pass);
    CHECK(raw.raw_optimum == doctest::Approx(1.0));
    for (std::size_t id : raw.raw_optimal) CHECK(policies[id].decisions[root].index == 0);
    REQUIRE_FALSE(raw.shaped_optimal.empty());
    for (std::size_t id : raw.shaped_optimal) CHECK(policies[id].decisions[root].index == 1);
    // Advancing immediately earns 1 + 1 (goal bonus); stalling three times earns 3.926.
    CHECK(raw.shaped_optimum > 3.9);

    const auto shaped = policy_preservation_check(mdp, make_shaping_spec("pbim", 1.0));
    CHECK(shaped.pass);
    const auto delayed = policy_preservation_check(mdp, make_shaping_spec("delay-1", 1.0));
    CHECK(delayed.pass);
}

TEST_CASE("procrastination condition") {
    for (double gamma : {0.5, 0.9, 0.99})
        for (int n = 1; n < 4; ++n)
            for (int t = 1; t < 4; ++t) CHECK_FALSE(procrastination_check(0.0, gamma, n, t));
    CHECK(procrastination_check(0.025, 0.995, 1, 1));
    CHECK_FALSE(procrastination_check(0.005, 0.99, 1, 1));
    CHECK_THROWS_AS(procrastination_check(1.0, 0.9, 0, 1), ContractViolation);
    CHECK_THROWS_AS(procrastination_fixture(0.0, 0.99), ConfigError);
}

TEST_CASE("report serializes to json") {
    const auto report = policy_preservation_check(branching_chain(2), make_shaping_spec("pbim", 1.0));
    const nlohmann::json j = report;
    CHECK(j.at("label") == "pbim");
    CHECK(j.at("pass") == true);
    CHECK(j.at("policy_count") == 8);
}

TEST_CASE("value iteration") {
    SUBCASE("single terminal transition") {
        TabularMdp mdp(2, 1, 0.9, 5);
        mdp.add_outcome(StateId{0}, ActionId{0}, StateId{1}, 1.0, 2.5);
        mdp.set_terminal(StateId{1});
        CHECK(value_iteration(mdp).v[0] == 2.5);
    }
    SUBCASE("cliff walk with gamma 1 follows the BFS shortest path") {
        CliffWalkConfig cfg;
        cfg.gamma = 1.0;
        auto env = cliff_walk(cfg);
        const int shortest = bfs_shortest_path(env);
        CHECK(shortest == 13);
        const auto values = value_iteration(env.to_tabular());
        CHECK(values.v[env.start_state().index] == 88.0);
        const auto policy = greedy_policy(values.q);
        Rng rng(0);
        const auto traj = rollout(env, [&](StateId s, Rng&) { return policy[s.index]; }, rng);
        CHECK(static_cast<int>(traj.length()) == shortest);
    }
    SUBCASE("agrees with brute-force policy search on small MDPs") {
        for (std::uint64_t seed = 0; seed < 20; ++seed) {
            const auto mdp = random_episodic_mdp(small_config(seed));
            double best = -1e18;
            for (const auto& p : enumerate_policies(mdp)) best = std::max(best, exact_return(mdp, p, {}).raw);
            CHECK(value_iteration(mdp).v[0] == doctest::Approx(best).epsilon(1e-12));
        }
    }
}
