#pragma once

#include <cstddef>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include "json.hpp"

#include "grm/agents.hpp"
#include "grm/envs.hpp"
#include "grm/intrinsic.hpp"
#include "grm/shaping.hpp"

namespace grm {

struct OracleLimits {
    std::size_t node_cap = 20;
    std::size_t policy_cap = 1'000'000;
};

/// Every decision point reachable in `mdp` under some action sequence. Nodes
/// are stored in depth-first preorder; a child index of kLeaf marks an
/// outcome that ends the episode.
struct HistoryTree {
    static constexpr std::size_t kLeaf = std::numeric_limits<std::size_t>::max();

    struct Node {
        StateId state;
        int t = 0;
        std::vector<std::vector<std::size_t>> children;  // [action][outcome]
    };
    struct Root {
        StateId state;
        double probability = 1.0;
        std::size_t node = kLeaf;  // kLeaf if the initial state is terminal
    };

    std::vector<Node> nodes;
    std::vector<Root> roots;
};

/// Throws CapacityError (with the node count) above limits.node_cap.
HistoryTree build_history_tree(const TabularMdp& mdp, const OracleLimits& limits = {});

/// Deterministic history-dependent policy: one action per history node.
struct HistoryPolicy {
    std::size_t id = 0;
    std::vector<ActionId> decisions;
};

std::size_t policy_count(const HistoryTree& tree, std::size_t num_actions, const OracleLimits& limits = {});
HistoryPolicy policy_from_id(const HistoryTree& tree, std::size_t num_actions, std::size_t id);

/// Every policy, ids 0..count-1. Throws CapacityError above the caps.
std::vector<HistoryPolicy> enumerate_policies(const TabularMdp& mdp, const OracleLimits& limits = {});

/// What is added to the extrinsic reward: nothing (no intrinsic module), the
/// raw intrinsic stream (no matching), or its GRM transform.
struct ShapingSpec {
    std::shared_ptr<const IntrinsicModule> intrinsic;
    std::shared_ptr<const MatchingFunction> matching;
    std::string label = "none";
};

/// "none", "raw", "identity", "pbim" or "delay-<D>", over a CountBonus(alpha).
ShapingSpec make_shaping_spec(const std::string& spec, double alpha);

struct ReturnPair {
    double raw = 0.0;
    double shaped = 0.0;
};

/// Throws ContractViolation if the intrinsic module is not replayable or
/// reads beyond the present (detected over the full history tree).
void check_oracle_intrinsic(const TabularMdp& mdp, const HistoryTree& tree, const IntrinsicModule& module);

/// Exact expected discounted returns by expanding the outcome tree.
ReturnPair exact_return(const TabularMdp& mdp, const HistoryPolicy& policy, const ShapingSpec& spec,
                        const OracleLimits& limits = {});

struct PolicySetReport {
    std::string label;
    std::size_t policy_count = 0;
    double raw_optimum = 0.0;
    double shaped_optimum = 0.0;
    std::vector<std::size_t> raw_optimal;
    std::vector<std::size_t> shaped_optimal;
    std::vector<double> raw_values;
    std::vector<double> shaped_values;
    double tol = 1e-9;
    bool pass = false;
};

void to_json(nlohmann::json& j, const PolicySetReport& report);

/// Passes iff the policies within `tol` of the best raw value are exactly the
/// policies within `tol` of the best shaped value.
PolicySetReport policy_preservation_check(const TabularMdp& mdp, const ShapingSpec& spec, double tol = 1e-9,
                                          const OracleLimits& limits = {});

/// 1 - gamma^t < sum_{k=0}^{t-1} alpha gamma^k / (n + k + 1). Requires n, t >= 1.
bool procrastination_check(double alpha, double gamma, int n, int t);

/// Three states: start (0), side room (1), terminal goal (2). "advance" (0)
/// reaches the goal for reward 1, "stall" (1) swaps start and side for 0.
/// Horizon 4. Throws ConfigError when procrastination_check fails for every
/// n in [1,4], t in [1,3].
TabularMdp procrastination_fixture(double alpha, double gamma);

struct ValueResult {
    std::vector<double> v;  // stage-0 optimal values
    QTable q;               // stage-0 optimal action values
    int stages = 0;         // backups performed
};

/// Finite-horizon backward induction, stopping early once a backup changes no
/// value by more than `tol` (the stationary solution).
ValueResult value_iteration(const TabularMdp& mdp, double tol = 0.0);

/// Phi(s) = V*(s).
StatePotential vstar_potential(const TabularMdp& mdp, bool grzes_final_zero = false);

}  // namespace grm
