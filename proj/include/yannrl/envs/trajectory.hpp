#pragma once

#include <string>
#include <vector>

#include "yannrl/numerics/types.hpp"

namespace yannrl::envs {

/// Closed-loop samples: x[k] at time t[k] with input u[k] held over
/// [t[k], t[k] + dt) and stage cost cost[k] = C(x[k], u[k]).
struct Trajectory {
    std::vector<double> t;
    std::vector<Vector> x;
    std::vector<Vector> u;
    std::vector<double> cost;
    bool infeasible = false;
    std::string infeasibility_reason;

    [[nodiscard]] std::size_t size() const { return t.size(); }
    void push(double time, const Vector& state, const Vector& input, double stage_cost);
};

/// CSV with header `t,x1..xn,u1..um,cost`; values printed with %.17g.
void write_trajectory_csv(const std::string& path, const Trajectory& traj);
[[nodiscard]] Trajectory read_trajectory_csv(const std::string& path);

[[nodiscard]] std::string format_double(double v);

}  // namespace yannrl::envs
