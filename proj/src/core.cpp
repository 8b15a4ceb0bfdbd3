#include "grm/core.hpp"

#include <iomanip>
#include <limits>
#include <ostream>

namespace grm {

double discounted_return(const std::vector<double>& rewards, double gamma, std::size_t t) {
    if (t > rewards.size()) {
        throw std::out_of_range("discounted_return: t=" + std::to_string(t) +
                                " exceeds episode length " + std::to_string(rewards.size()));
    }
    // Horner form, accumulated from the back.
    double acc = 0.0;
    for (std::size_t n = rewards.size(); n > t; --n) acc = rewards[n - 1] + gamma * acc;
    return acc;
}

double Trajectory::extrinsic_total() const {
    double total = 0.0;
    for (double r : extrinsic) total += r;
    return total;
}

void Trajectory::check_consistent() const {
    const std::size_t n = actions.size();
    bool ok = states.size() == n + 1 && extrinsic.size() == n;
    if (intrinsic_raw) ok = ok && intrinsic_raw->size() == n;
    if (intrinsic_shaped) ok = ok && intrinsic_shaped->size() == n;
    if (!ok) throw ContractViolation("trajectory lists have inconsistent lengths");
}

void write_trajectory_csv(std::ostream& out, const Trajectory& traj) {
    traj.check_consistent();
    const auto old_precision = out.precision(std::numeric_limits<double>::max_digits10);
    out << "t,state,action,extrinsic,intrinsic_raw,intrinsic_shaped\n";
    for (std::size_t t = 0; t < traj.length(); ++t) {
        out << t << ',' << traj.states[t].index << ',' << traj.actions[t].index << ','
            << traj.extrinsic[t] << ',';
        if (traj.intrinsic_raw) out << (*traj.intrinsic_raw)[t];
        out << ',';
        if (traj.intrinsic_shaped) out << (*traj.intrinsic_shaped)[t];
        out << '\n';
    }
    out.precision(old_precision);
}

}  // namespace grm
