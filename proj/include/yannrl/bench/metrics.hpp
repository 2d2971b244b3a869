#pragma once

#include <functional>
#include <string>
#include <vector>

#include "yannrl/envs/process_env.hpp"
#include "yannrl/envs/trajectory.hpp"

namespace yannrl::bench {

/// Tracking metrics on the sample grid t_k = k dt, with e_k the error of the
/// tracked states in physical units:
///   ISE  = sum_k |e_k|_2^2 dt
///   ITAE = sum_k t_k |e_k|_1 dt
///   e_SS = mean of |e_k|_1 over the last max(1, ceil(K / 10)) samples
///   cumulative cost = sum_k C(x_k, u_k)
/// Sums run in sample order.
struct Metrics {
    double ise = 0.0;
    double itae = 0.0;
    double ess = 0.0;
    double cum_cost = 0.0;
};

[[nodiscard]] Metrics compute_metrics(const envs::Trajectory& traj, const Vector& setpoint,
                                      const std::vector<int>& tracked, double dt);

/// Maps a physical state and step index to a physical input.
using Controller = std::function<Vector(const Vector& x, int step)>;

struct Rollout {
    envs::Trajectory trajectory;  // rows k = 0 .. steps-1: x_k, u_k, C(x_k, u_k)
    Vector final_state;
    bool infeasible = false;
    std::string reason;
};

/// Noiseless closed loop. Stops after the step that triggers an
/// infeasibility event; that step's row is kept.
[[nodiscard]] Rollout closed_loop(const envs::ProcessEnv& env, const Vector& x0, int steps,
                                  const Controller& controller);

[[nodiscard]] Metrics rollout_metrics(const envs::ProcessEnv& env, const Rollout& rollout);

}  // namespace yannrl::bench
