#include "grm/shaping.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace grm {

namespace {

constexpr double kFractionTol = 1e-12;

void check_fraction(double frac, int t, int t_prime) {
    if (!(frac >= 0.0 && frac <= 1.0)) {
        std::ostringstream msg;
        msg << "matching fraction m(" << t << ", " << t_prime << ") = " << frac << " outside [0,1]";
        throw MatchingError(msg.str());
    }
}

void check_cumulative(double matched, int t_prime) {
    if (matched > 1.0 + kFractionTol) {
        std::ostringstream msg;
        msg << "reward from step " << t_prime << " matched " << matched << " times in total";
        throw MatchingError(msg.str());
    }
}

}  // namespace

// ---------------------------------------------------------------------------
// Matching functions
// ---------------------------------------------------------------------------

DelayMatching::DelayMatching(int delay) : delay_(delay) {
    if (delay < 0) throw ConfigError("delay matching: delay must be >= 0");
}

TableMatching::TableMatching(std::vector<std::vector<double>> table, std::string name)
    : table_(std::move(table)), name_(std::move(name)) {}

double TableMatching::fraction(int t, int t_prime) const {
    if (t < 0 || t_prime < 0 || static_cast<std::size_t>(t) >= table_.size()) return 0.0;
    const auto& row = table_[static_cast<std::size_t>(t)];
    return static_cast<std::size_t>(t_prime) < row.size() ? row[static_cast<std::size_t>(t_prime)] : 0.0;
}

std::shared_ptr<const MatchingFunction> make_matching(const std::string& spec) {
    if (spec == "identity") return std::make_shared<IdentityMatching>();
    if (spec == "pbim") return std::make_shared<PbimMatching>();
    if (spec.rfind("delay-", 0) == 0) {
        try {
            std::size_t used = 0;
            const int d = std::stoi(spec.substr(6), &used);
            if (used == spec.size() - 6) return std::make_shared<DelayMatching>(d);
        } catch (const std::logic_error&) {
        }
    }
    throw ConfigError("unknown matching spec '" + spec + "'");
}

std::vector<std::vector<double>> effective_matching(const MatchingFunction& m, std::size_t length) {
    std::vector<std::vector<double>> eff(length, std::vector<double>(length, 0.0));
    std::vector<double> matched(length, 0.0);
    for (std::size_t j = 0; j + 1 < length; ++j) {
        for (std::size_t i = 0; i < length; ++i) {
            const int t = static_cast<int>(j);
            const int tp = static_cast<int>(i);
            const double frac = m.fraction(t, tp);
            check_fraction(frac, t, tp);
            if (i > j) {
                if (frac != 0.0) throw MatchingError("matching function subtracts a reward before it is received");
                continue;
            }
            const double used = std::min(frac, 1.0 - matched[i]);
            matched[i] += frac;
            check_cumulative(matched[i], tp);
            eff[j][i] = std::max(used, 0.0);
        }
    }
    if (length > 0) {
        for (std::size_t i = 0; i < length; ++i) eff[length - 1][i] = std::max(1.0 - matched[i], 0.0);
    }
    return eff;
}

// ---------------------------------------------------------------------------
// GrmShaper
// ---------------------------------------------------------------------------

double discount_factor(double gamma, int exponent) {
    double value;
    if (std::abs(exponent) > 200) {
        value = std::exp(static_cast<double>(exponent) * std::log(gamma));
    } else {
        value = std::pow(gamma, exponent);
    }
    if (!std::isfinite(value) || value == 0.0) {
        std::ostringstream msg;
        msg << "discount factor gamma^" << exponent << " with gamma=" << gamma << " is not representable";
        throw NumericError(msg.str());
    }
    return value;
}

GrmShaper::GrmShaper(std::shared_ptr<const MatchingFunction> matching, double gamma)
    : matching_(std::move(matching)), gamma_(gamma) {
    if (!matching_) throw ConfigError("GrmShaper: null matching function");
    if (!(gamma > 0.0 && gamma <= 1.0)) throw ConfigError("GrmShaper: gamma must lie in (0,1]");
}

void GrmShaper::reset() {
    t_ = 0;
    ledger_.clear();
}

double GrmShaper::step(double f, bool is_final) {
    if (!std::isfinite(f)) throw NumericError("GrmShaper: non-finite intrinsic reward");
    const int t = t_;
    ledger_.push_back({t, f, 0.0, 1.0});

    double subtracted = 0.0;
    for (auto& e : ledger_) {
        double frac;
        if (is_final) {
            frac = e.remaining;
        } else {
            frac = matching_->fraction(t, e.t);
            check_fraction(frac, t, e.t);
            check_cumulative(e.matched + frac, e.t);
            frac = std::min(frac, e.remaining);
        }
        if (frac == 0.0) continue;
        subtracted += discount_factor(gamma_, e.t - t) * e.reward * frac;
        e.matched += frac;
        e.remaining = 1.0 - e.matched;
        if (e.remaining < kFractionTol) {
            e.matched = 1.0;
            e.remaining = 0.0;
        }
    }
    std::erase_if(ledger_, [](const LedgerEntry& e) { return e.remaining == 0.0; });

    if (is_final) {
        reset();
    } else {
        ++t_;
    }
    return f - subtracted;
}

std::vector<double> grm_transform(const std::vector<double>& f, std::shared_ptr<const MatchingFunction> m,
                                  double gamma) {
    GrmShaper shaper(std::move(m), gamma);
    std::vector<double> out;
    out.reserve(f.size());
    for (std::size_t t = 0; t < f.size(); ++t) out.push_back(shaper.step(f[t], t + 1 == f.size()));
    return out;
}

// ---------------------------------------------------------------------------
// Closed forms and potentials
// ---------------------------------------------------------------------------

std::vector<double> pbim_transform(const std::vector<double>& f, double gamma, bool normalized,
                                   RunningMean& mean_source) {
    if (f.empty()) throw ContractViolation("pbim_transform: empty reward stream");
    std::vector<double> adjusted = f;
    if (normalized) {
        for (double& x : adjusted) x = mean_source.normalize(x);
    }
    const int n = static_cast<int>(adjusted.size());
    std::vector<double> out(adjusted);
    double final_step = 0.0;
    for (int i = 0; i + 1 < n; ++i) final_step -= discount_factor(gamma, i + 1 - n) * adjusted[static_cast<std::size_t>(i)];
    out.back() = final_step;
    return out;
}

std::vector<double> grm_potential(const MatchingFunction& m, const std::vector<double>& f, double gamma,
                                  double c) {
    const std::size_t n = f.size();
    const auto eff = effective_matching(m, n);
    std::vector<double> phi(n + 1, 0.0);
    phi[n] = c;
    for (std::size_t t = 0; t < n; ++t) {
        const int ti = static_cast<int>(t);
        double matched = 0.0;
        for (std::size_t j = t; j < n; ++j) {
            for (std::size_t i = 0; i <= j; ++i) {
                if (eff[j][i] == 0.0) continue;
                matched += discount_factor(gamma, static_cast<int>(i) - ti) * f[i] * eff[j][i];
            }
        }
        const double intrinsic_return = discounted_return(f, gamma, t);
        phi[t] = matched - intrinsic_return + discount_factor(gamma, static_cast<int>(n) - ti) * c;
    }
    return phi;
}

std::vector<double> f_from_potential(const MatchingFunction& m, const std::vector<double>& phi, double gamma) {
    if (phi.size() < 2) throw ContractViolation("f_from_potential: need Phi_0..Phi_N with N >= 1");
    const std::size_t n = phi.size() - 1;
    const auto eff = effective_matching(m, n);
    std::vector<double> f(n, 0.0);
    for (std::size_t t = 0; t + 1 < n; ++t) {
        const int ti = static_cast<int>(t);
        const double denom = 1.0 - m.fraction(ti, ti);
        if (std::abs(denom) < 1e-15) {
            throw MatchingError("f_from_potential: m(" + std::to_string(t) + ", " + std::to_string(t) +
                                ") = 1 leaves F_t undetermined");
        }
        double carried = 0.0;
        for (std::size_t i = 0; i < t; ++i) {
            if (eff[t][i] == 0.0) continue;
            carried += discount_factor(gamma, static_cast<int>(i) - ti) * f[i] * eff[t][i];
        }
        f[t] = (gamma * phi[t + 1] - phi[t] + carried) / denom;
    }
    return f;
}

double potential_boundary_gap(const std::vector<double>& phi, double gamma) {
    if (phi.empty()) throw ContractViolation("potential_boundary_gap: empty potential");
    const int n = static_cast<int>(phi.size()) - 1;
    return discount_factor(gamma, n) * phi.back() - phi.front();
}

// ---------------------------------------------------------------------------
// Boundary residual by exhaustive enumeration
// ---------------------------------------------------------------------------

namespace {

struct ActionAccumulator {
    double weight = 0.0;
    double weighted_sum = 0.0;
};

struct NodeAccumulator {
    int t = 0;
    std::vector<ActionAccumulator> per_action;
    double min_residual = std::numeric_limits<double>::infinity();
    double max_residual = -std::numeric_limits<double>::infinity();
};

struct BoundaryWalker {
    const TabularMdp& mdp;
    const PotentialEvaluator& potential;
    double gamma;
    std::size_t path_cap;

    std::vector<NodeAccumulator> nodes;
    Trajectory path;
    std::vector<std::size_t> node_stack;
    std::size_t paths = 0;

    void leaf(double weight, bool terminated) {
        if (++paths > path_cap) {
            throw CapacityError("boundary_residual: more than " + std::to_string(path_cap) + " trajectories");
        }
        path.terminated = terminated;
        path.truncated = !terminated;
        const auto phi = potential(path);
        const std::size_t n = path.length();
        if (phi.size() != n + 1) throw ContractViolation("potential evaluator returned the wrong length");
        for (std::size_t t = 0; t < n; ++t) {
            const double residual =
                discount_factor(gamma, static_cast<int>(n - t)) * phi[n] - phi[t];
            auto& node = nodes[node_stack[t]];
            auto& acc = node.per_action[path.actions[t].index];
            acc.weight += weight;
            acc.weighted_sum += weight * residual;
            node.min_residual = std::min(node.min_residual, residual);
            node.max_residual = std::max(node.max_residual, residual);
        }
    }

    void expand(StateId s, int t, double weight) {
        if (mdp.is_terminal(s) || t >= mdp.horizon()) {
            leaf(weight, mdp.is_terminal(s));
            return;
        }
        const std::size_t id = nodes.size();
        nodes.push_back({t, std::vector<ActionAccumulator>(mdp.num_actions()), std::numeric_limits<double>::infinity(),
                         -std::numeric_limits<double>::infinity()});
        node_stack.push_back(id);
        const double action_weight = 1.0 / static_cast<double>(mdp.num_actions());
        for (std::size_t a = 0; a < mdp.num_actions(); ++a) {
            for (const auto& o : mdp.outcomes(s, ActionId{a})) {
                if (o.probability <= 0.0) continue;
                path.actions.push_back(ActionId{a});
                path.extrinsic.push_back(o.reward);
                path.states.push_back(o.next);
                expand(o.next, t + 1, weight * action_weight * o.probability);
                path.states.pop_back();
                path.extrinsic.pop_back();
                path.actions.pop_back();
            }
        }
        node_stack.pop_back();
    }
};

}  // namespace

BoundaryReport boundary_residual(const TabularMdp& mdp, const PotentialEvaluator& potential, double gamma,
                                 std::size_t path_cap) {
    BoundaryWalker walker{mdp, potential, gamma, path_cap, {}, {}, {}, 0};
    for (const auto& [s0, p] : mdp.initial()) {
        if (p <= 0.0) continue;
        walker.path = Trajectory{};
        walker.path.states.push_back(s0);
        walker.expand(s0, 0, p);
    }

    BoundaryReport report;
    report.paths = walker.paths;
    report.histories = walker.nodes.size();
    for (std::size_t id = 0; id < walker.nodes.size(); ++id) {
        const auto& node = walker.nodes[id];
        double lo = std::numeric_limits<double>::infinity();
        double hi = -std::numeric_limits<double>::infinity();
        for (std::size_t a = 0; a < node.per_action.size(); ++a) {
            const auto& acc = node.per_action[a];
            if (acc.weight <= 0.0) continue;
            const double expected = acc.weighted_sum / acc.weight;
            report.entries.push_back({id, node.t, ActionId{a}, expected});
            lo = std::min(lo, expected);
            hi = std::max(hi, expected);
        }
        if (hi >= lo) report.max_expected_spread = std::max(report.max_expected_spread, hi - lo);
        if (node.max_residual >= node.min_residual) {
            report.max_pathwise_spread = std::max(report.max_pathwise_spread, node.max_residual - node.min_residual);
        }
    }
    return report;
}

// ---------------------------------------------------------------------------
// Classic PBRS
// ---------------------------------------------------------------------------

double classic_pbrs_step(const StatePotential& pot, StateId s, StateId s_next, double gamma, bool is_final) {
    const double next = (pot.grzes_final_zero && is_final) ? 0.0 : pot.phi.at(s_next.index);
    return gamma * next - pot.phi.at(s.index);
}

}  // namespace grm
