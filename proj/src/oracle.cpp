#include "grm/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

namespace grm {

// ---------------------------------------------------------------------------
// History tree and policies
// ---------------------------------------------------------------------------

namespace {

struct TreeBuilder {
    const TabularMdp& mdp;
    std::size_t cap;
    HistoryTree tree;

    std::size_t expand(StateId s, int t) {
        if (mdp.is_terminal(s) || t >= mdp.horizon()) return HistoryTree::kLeaf;
        if (tree.nodes.size() >= cap) {
            throw CapacityError("history tree has " + std::to_string(history_node_count(mdp, 10'000'000)) +
                                " decision nodes, cap is " + std::to_string(cap));
        }
        const std::size_t id = tree.nodes.size();
        tree.nodes.push_back({s, t, {}});
        std::vector<std::vector<std::size_t>> children(mdp.num_actions());
        for (std::size_t a = 0; a < mdp.num_actions(); ++a) {
            for (const auto& o : mdp.outcomes(s, ActionId{a})) {
                children[a].push_back(o.probability > 0.0 ? expand(o.next, t + 1) : HistoryTree::kLeaf);
            }
        }
        tree.nodes[id].children = std::move(children);
        return id;
    }
};

}  // namespace

HistoryTree build_history_tree(const TabularMdp& mdp, const OracleLimits& limits) {
    mdp.validate();
    TreeBuilder builder{mdp, limits.node_cap, {}};
    for (const auto& [s, p] : mdp.initial()) {
        if (p <= 0.0) continue;
        const std::size_t node = builder.expand(s, 0);
        builder.tree.roots.push_back({s, p, node});
    }
    return std::move(builder.tree);
}

std::size_t policy_count(const HistoryTree& tree, std::size_t num_actions, const OracleLimits& limits) {
    const double count = std::pow(static_cast<double>(num_actions), static_cast<double>(tree.nodes.size()));
    if (count > static_cast<double>(limits.policy_cap)) {
        throw CapacityError(std::to_string(tree.nodes.size()) + " history nodes give " + std::to_string(count) +
                            " policies, cap is " + std::to_string(limits.policy_cap));
    }
    return static_cast<std::size_t>(std::llround(count));
}

HistoryPolicy policy_from_id(const HistoryTree& tree, std::size_t num_actions, std::size_t id) {
    HistoryPolicy policy{id, std::vector<ActionId>(tree.nodes.size())};
    std::size_t rest = id;
    for (auto& d : policy.decisions) {
        d = ActionId{rest % num_actions};
        rest /= num_actions;
    }
    return policy;
}

std::vector<HistoryPolicy> enumerate_policies(const TabularMdp& mdp, const OracleLimits& limits) {
    const HistoryTree tree = build_history_tree(mdp, limits);
    const std::size_t count = policy_count(tree, mdp.num_actions(), limits);
    std::vector<HistoryPolicy> out;
    out.reserve(count);
    for (std::size_t id = 0; id < count; ++id) out.push_back(policy_from_id(tree, mdp.num_actions(), id));
    return out;
}

ShapingSpec make_shaping_spec(const std::string& spec, double alpha) {
    if (spec == "none") return {};
    auto im = std::make_shared<CountBonus>(alpha);
    if (spec == "raw") return {im, nullptr, "raw"};
    return {im, make_matching(spec), spec};
}

// ---------------------------------------------------------------------------
// Exact returns
// ---------------------------------------------------------------------------

namespace {

double discounted_sum(const std::vector<double>& r, double gamma) { return discounted_return(r, gamma, 0); }

/// Extra reward stream added on top of the extrinsic one for a full path.
std::vector<double> added_stream(const ShapingSpec& spec, const Trajectory& path, double gamma) {
    if (!spec.intrinsic) return std::vector<double>(path.length(), 0.0);
    auto f = replay_intrinsic(*spec.intrinsic, path);
    if (!spec.matching || f.empty()) return f;
    return grm_transform(f, spec.matching, gamma);
}

struct PathWalker {
    const TabularMdp& mdp;
    const HistoryTree& tree;
    Trajectory path;
    std::vector<std::size_t> node_stack;  // history nodes along `path`

    template <typename Decide, typename Leaf>
    void walk(std::size_t node, double weight, Decide&& decide, Leaf&& leaf) {
        const auto& n = tree.nodes[node];
        node_stack.push_back(node);
        const std::vector<std::size_t> actions = decide(node);
        for (const std::size_t a : actions) {
            const auto& outs = mdp.outcomes(n.state, ActionId{a});
            for (std::size_t k = 0; k < outs.size(); ++k) {
                const auto& o = outs[k];
                if (o.probability <= 0.0) continue;
                path.actions.push_back(ActionId{a});
                path.extrinsic.push_back(o.reward);
                path.states.push_back(o.next);
                const std::size_t child = n.children[a][k];
                if (child == HistoryTree::kLeaf) {
                    path.terminated = mdp.is_terminal(o.next);
                    path.truncated = !path.terminated;
                    leaf(weight * o.probability);
                } else {
                    walk(child, weight * o.probability, decide, leaf);
                }
                path.states.pop_back();
                path.extrinsic.pop_back();
                path.actions.pop_back();
            }
        }
        node_stack.pop_back();
    }

    template <typename Decide, typename Leaf>
    void walk_all(Decide&& decide, Leaf&& leaf) {
        for (const auto& root : tree.roots) {
            path = Trajectory{};
            path.states.push_back(root.state);
            if (root.node == HistoryTree::kLeaf) {
                path.terminated = true;
                leaf(root.probability);
            } else {
                walk(root.node, root.probability, decide, leaf);
            }
        }
    }
};

ReturnPair evaluate(const TabularMdp& mdp, const HistoryTree& tree, const HistoryPolicy& policy,
                    const ShapingSpec& spec) {
    if (policy.decisions.size() != tree.nodes.size()) {
        throw ContractViolation("history policy does not cover the history tree");
    }
    ReturnPair out;
    PathWalker walker{mdp, tree, {}, {}};
    walker.walk_all(
        [&](std::size_t node) { return std::vector<std::size_t>{policy.decisions[node].index}; },
        [&](double weight) {
            const double raw = discounted_sum(walker.path.extrinsic, mdp.gamma());
            const double added = discounted_sum(added_stream(spec, walker.path, mdp.gamma()), mdp.gamma());
            out.raw += weight * raw;
            out.shaped += weight * (raw + added);
        });
    return out;
}

}  // namespace

void check_oracle_intrinsic(const TabularMdp& mdp, const HistoryTree& tree, const IntrinsicModule& module) {
    if (!module.replayable()) {
        throw ContractViolation("intrinsic module '" + module.name() +
                                "' depends on more than the current trajectory; the oracle cannot replay it");
    }
    // F_0..F_{t-1} must agree on every continuation below a depth-t history node.
    std::vector<std::optional<std::vector<double>>> seen(tree.nodes.size());
    PathWalker walker{mdp, tree, {}, {}};
    std::vector<std::size_t> all_actions(mdp.num_actions());
    for (std::size_t a = 0; a < all_actions.size(); ++a) all_actions[a] = a;

    walker.walk_all([&](std::size_t) { return all_actions; },
                    [&](double) {
                        const auto f = replay_intrinsic(module, walker.path);
                        const auto& nodes = walker.node_stack;
                        for (std::size_t d = 1; d < nodes.size(); ++d) {
                            auto& slot = seen[nodes[d]];
                            const std::vector<double> prefix(f.begin(), f.begin() + static_cast<std::ptrdiff_t>(d));
                            if (!slot) {
                                slot = prefix;
                            } else if (*slot != prefix) {
                                throw ContractViolation("intrinsic module '" + module.name() +
                                                        "' is not future-agnostic: F_t changed with later actions");
                            }
                        }
                    });
}

ReturnPair exact_return(const TabularMdp& mdp, const HistoryPolicy& policy, const ShapingSpec& spec,
                        const OracleLimits& limits) {
    const HistoryTree tree = build_history_tree(mdp, limits);
    if (spec.intrinsic) check_oracle_intrinsic(mdp, tree, *spec.intrinsic);
    return evaluate(mdp, tree, policy, spec);
}

// ---------------------------------------------------------------------------
// Optimal-set comparison
// ---------------------------------------------------------------------------

void to_json(nlohmann::json& j, const PolicySetReport& r) {
    j = nlohmann::json{{"label", r.label},
                       {"policy_count", r.policy_count},
                       {"raw_optimum", r.raw_optimum},
                       {"shaped_optimum", r.shaped_optimum},
                       {"raw_optimal", r.raw_optimal},
                       {"shaped_optimal", r.shaped_optimal},
                       {"raw_values", r.raw_values},
                       {"shaped_values", r.shaped_values},
                       {"tol", r.tol},
                       {"pass", r.pass}};
}

PolicySetReport policy_preservation_check(const TabularMdp& mdp, const ShapingSpec& spec, double tol,
                                          const OracleLimits& limits) {
    const HistoryTree tree = build_history_tree(mdp, limits);
    const std::size_t count = policy_count(tree, mdp.num_actions(), limits);
    if (spec.intrinsic) check_oracle_intrinsic(mdp, tree, *spec.intrinsic);

    PolicySetReport report;
    report.label = spec.label;
    report.policy_count = count;
    report.tol = tol;
    report.raw_values.resize(count);
    report.shaped_values.resize(count);
    for (std::size_t id = 0; id < count; ++id) {
        const auto values = evaluate(mdp, tree, policy_from_id(tree, mdp.num_actions(), id), spec);
        report.raw_values[id] = values.raw;
        report.shaped_values[id] = values.shaped;
    }
    report.raw_optimum = *std::max_element(report.raw_values.begin(), report.raw_values.end());
    report.shaped_optimum = *std::max_element(report.shaped_values.begin(), report.shaped_values.end());
    for (std::size_t id = 0; id < count; ++id) {
        if (report.raw_values[id] >= report.raw_optimum - tol) report.raw_optimal.push_back(id);
        if (report.shaped_values[id] >= report.shaped_optimum - tol) report.shaped_optimal.push_back(id);
    }
    report.pass = report.raw_optimal == report.shaped_optimal;
    return report;
}

// ---------------------------------------------------------------------------
// Procrastination
// ---------------------------------------------------------------------------

bool procrastination_check(double alpha, double gamma, int n, int t) {
    if (n < 1 || t < 1) throw ContractViolation("procrastination_check: n and t must be >= 1");
    double gain = 0.0;
    for (int k = 0; k < t; ++k) gain += alpha * std::pow(gamma, k) / static_cast<double>(n + k + 1);
    return 1.0 - std::pow(gamma, t) < gain;
}

TabularMdp procrastination_fixture(double alpha, double gamma) {
    constexpr int kHorizon = 4;
    bool satisfiable = false;
    for (int n = 1; n <= kHorizon && !satisfiable; ++n) {
        for (int t = 1; t < kHorizon && !satisfiable; ++t) satisfiable = procrastination_check(alpha, gamma, n, t);
    }
    if (!satisfiable) {
        throw ConfigError("procrastination fixture: alpha=" + std::to_string(alpha) + ", gamma=" +
                          std::to_string(gamma) + " never makes stalling worthwhile");
    }
    const StateId start{0};
    const StateId side{1};
    const StateId goal{2};
    const ActionId advance{0};
    const ActionId stall{1};
    TabularMdp mdp(3, 2, gamma, kHorizon);
    mdp.add_outcome(start, advance, goal, 1.0, 1.0);
    mdp.add_outcome(start, stall, side, 1.0, 0.0);
    mdp.add_outcome(side, advance, goal, 1.0, 1.0);
    mdp.add_outcome(side, stall, start, 1.0, 0.0);
    mdp.set_terminal(goal);
    mdp.set_initial({{start, 1.0}});
    mdp.validate();
    return mdp;
}

// ---------------------------------------------------------------------------
// Value iteration
// ---------------------------------------------------------------------------

ValueResult value_iteration(const TabularMdp& mdp, double tol) {
    mdp.validate();
    const std::size_t S = mdp.num_states();
    const std::size_t A = mdp.num_actions();
    std::vector<double> next_v(S, 0.0);
    ValueResult result{std::vector<double>(S, 0.0), QTable(S, A), 0};
    for (int stage = mdp.horizon() - 1; stage >= 0; --stage) {
        QTable q(S, A);
        std::vector<double> v(S, 0.0);
        for (std::size_t s = 0; s < S; ++s) {
            if (mdp.is_terminal(StateId{s})) continue;
            for (std::size_t a = 0; a < A; ++a) {
                double value = 0.0;
                for (const auto& o : mdp.outcomes(StateId{s}, ActionId{a})) {
                    const double cont = mdp.is_terminal(o.next) ? 0.0 : next_v[o.next.index];
                    value += o.probability * (o.reward + mdp.gamma() * cont);
                }
                q(StateId{s}, ActionId{a}) = value;
            }
            v[s] = q.max(StateId{s});
        }
        double change = 0.0;
        for (std::size_t s = 0; s < S; ++s) change = std::max(change, std::abs(v[s] - next_v[s]));
        ++result.stages;
        result.v = v;
        result.q = std::move(q);
        next_v = std::move(v);
        if (result.stages > 1 && change <= tol) break;
    }
    return result;
}

StatePotential vstar_potential(const TabularMdp& mdp, bool grzes_final_zero) {
    return {value_iteration(mdp).v, grzes_final_zero};
}

}  // namespace grm
