#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "grm/core.hpp"
#include "grm/envs.hpp"
#include "grm/intrinsic.hpp"

namespace grm {

// ---------------------------------------------------------------------------
// Matching functions
// ---------------------------------------------------------------------------

/// m(t, t'): fraction of the reward received at step t' that is subtracted,
/// with discount correction, at step t. Only consulted for t' <= t on
/// non-final steps; at an episode's final step the shaper settles whatever is
/// still outstanding, so every reward is matched exactly once in total.
class MatchingFunction {
public:
    virtual ~MatchingFunction() = default;
    virtual double fraction(int t, int t_prime) const = 0;
    virtual std::string name() const = 0;
};

/// Each reward cancelled in the step it is received.
class IdentityMatching final : public MatchingFunction {
public:
    double fraction(int t, int t_prime) const override { return t == t_prime ? 1.0 : 0.0; }
    std::string name() const override { return "identity"; }
};

/// Everything matched at the final step.
class PbimMatching final : public MatchingFunction {
public:
    double fraction(int, int) const override { return 0.0; }
    std::string name() const override { return "pbim"; }
};

/// Each reward matched exactly `delay` steps after receipt, or at the final
/// step if the episode ends first.
class DelayMatching final : public MatchingFunction {
public:
    explicit DelayMatching(int delay);
    double fraction(int t, int t_prime) const override { return t - t_prime == delay_ ? 1.0 : 0.0; }
    std::string name() const override { return "delay-" + std::to_string(delay_); }
    int delay() const { return delay_; }

private:
    int delay_;
};

/// Explicit fraction table, row t and column t'; entries outside the table are 0.
class TableMatching final : public MatchingFunction {
public:
    explicit TableMatching(std::vector<std::vector<double>> table, std::string name = "table");
    double fraction(int t, int t_prime) const override;
    std::string name() const override { return name_; }

private:
    std::vector<std::vector<double>> table_;
    std::string name_;
};

/// Parses "identity", "pbim" or "delay-<D>". Throws ConfigError.
std::shared_ptr<const MatchingFunction> make_matching(const std::string& spec);

/// Effective fractions for an episode of `length` steps: rows are the
/// matching step j, columns the receipt step i. Non-final rows come from `m`;
/// the last row holds the settled remainder. Throws MatchingError.
std::vector<std::vector<double>> effective_matching(const MatchingFunction& m, std::size_t length);

// ---------------------------------------------------------------------------
// Streaming GRM transform
// ---------------------------------------------------------------------------

struct LedgerEntry {
    int t = 0;
    double reward = 0.0;
    double matched = 0.0;
    double remaining = 1.0;
};

/// Turns a stream of intrinsic rewards F_t into GRM-shaped rewards
/// F'_t = F_t - sum_i gamma^(i-t) F_i m(t, i). Fully matched entries leave
/// the ledger; the final step settles all outstanding mass.
class GrmShaper {
public:
    GrmShaper(std::shared_ptr<const MatchingFunction> matching, double gamma);

    double step(double f, bool is_final);
    void reset();

    int time() const { return t_; }
    const std::vector<LedgerEntry>& ledger() const { return ledger_; }
    const MatchingFunction& matching() const { return *matching_; }
    double gamma() const { return gamma_; }

private:
    std::shared_ptr<const MatchingFunction> matching_;
    double gamma_;
    int t_ = 0;
    std::vector<LedgerEntry> ledger_;
};

/// gamma^(exponent) for exponent <= 0; evaluated in log space for long lags.
/// Throws NumericError if the factor overflows.
double discount_factor(double gamma, int exponent);

/// PBIM conversion in closed form. When `normalized`, each F_t is first
/// replaced by F_t minus the mean of all strictly earlier values in
/// `mean_source`, which is updated in place.
std::vector<double> pbim_transform(const std::vector<double>& f, double gamma, bool normalized,
                                   RunningMean& mean_source);

/// Potential Phi_0..Phi_N whose differences gamma*Phi_{t+1} - Phi_t reproduce
/// the GRM-shaped stream of `f` under `m`; Phi_N = c.
std::vector<double> grm_potential(const MatchingFunction& m, const std::vector<double>& f, double gamma,
                                  double c);

/// Inverse construction: F_0..F_{N-1} whose GRM transform under `m` equals
/// gamma*Phi_{t+1} - Phi_t on every non-final step. The final step of a GRM
/// stream is fixed by settlement, so it matches the potential difference only
/// when gamma^N Phi_N == Phi_0 (see potential_boundary_gap); F_{N-1} is
/// returned as 0 since it cancels against itself. Throws MatchingError if
/// m(t, t) == 1 on a non-final step.
std::vector<double> f_from_potential(const MatchingFunction& m, const std::vector<double>& phi, double gamma);

/// gamma^N Phi_N - Phi_0: the discounted sum of the potential-based stream.
double potential_boundary_gap(const std::vector<double>& phi, double gamma);

/// Runs a whole stream through a fresh GrmShaper, last element final.
std::vector<double> grm_transform(const std::vector<double>& f, std::shared_ptr<const MatchingFunction> m,
                                  double gamma);

// ---------------------------------------------------------------------------
// Boundary condition
// ---------------------------------------------------------------------------

/// Maps a complete trajectory to its potentials Phi_0..Phi_N.
using PotentialEvaluator = std::function<std::vector<double>(const Trajectory&)>;

struct BoundaryEntry {
    std::size_t node = 0;
    int t = 0;
    ActionId action;
    double expected = 0.0;  // E[gamma^(N-t) Phi_N - Phi_t | history, action]
};

struct BoundaryReport {
    std::vector<BoundaryEntry> entries;
    double max_expected_spread = 0.0;  // max over histories of (max_a - min_a) of the expectation
    double max_pathwise_spread = 0.0;  // max over histories of the residual range across all continuations
    std::size_t histories = 0;
    std::size_t paths = 0;
};

/// Enumerates every complete trajectory of `mdp` (every action, every
/// outcome). Expectations use the transition probabilities and a uniform
/// continuation policy. Throws CapacityError above `path_cap` trajectories.
BoundaryReport boundary_residual(const TabularMdp& mdp, const PotentialEvaluator& potential, double gamma,
                                 std::size_t path_cap = 200000);

// ---------------------------------------------------------------------------
// Classic state potentials
// ---------------------------------------------------------------------------

struct StatePotential {
    std::vector<double> phi;
    bool grzes_final_zero = false;
};

/// gamma*Phi(s') - Phi(s); with grzes_final_zero, Phi(s') is taken as 0 on the final step.
double classic_pbrs_step(const StatePotential& pot, StateId s, StateId s_next, double gamma, bool is_final);

}  // namespace grm
