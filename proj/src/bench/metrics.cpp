#include "yannrl/bench/metrics.hpp"

#include <cmath>

#include "yannrl/numerics/errors.hpp"

namespace yannrl::bench {

Metrics compute_metrics(const envs::Trajectory& traj, const Vector& setpoint, const std::vector<int>& tracked,
                        double dt) {
    Metrics m;
    const std::size_t K = traj.size();
    if (K == 0) {
        return m;
    }
    const std::size_t tail = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(0.1 * static_cast<double>(K))));
    double tail_sum = 0.0;
    for (std::size_t k = 0; k < K; ++k) {
        double sq = 0.0;
        double abs = 0.0;
        for (int i : tracked) {
            if (i < 0 || i >= traj.x[k].size()) {
                throw DimensionError("tracked state index out of range");
            }
            const double e = traj.x[k][i] - setpoint[i];
            sq += e * e;
            abs += std::abs(e);
        }
        m.ise += sq * dt;
        m.itae += static_cast<double>(k) * dt * abs * dt;
        if (k >= K - tail) {
            tail_sum += abs;
        }
        m.cum_cost += traj.cost[k];
    }
    m.ess = tail_sum / static_cast<double>(tail);
    return m;
}

Rollout closed_loop(const envs::ProcessEnv& env, const Vector& x0, int steps, const Controller& controller) {
    Rollout r;
    Vector x = x0;
    const double dt = env.spec().dt;
    for (int k = 0; k < steps; ++k) {
        const Vector u = env.spec().input_box.clamp(controller(x, k));
        r.trajectory.push(k * dt, x, u, env.stage_cost(x, u));
        const auto step = env.step(x, u);
        if (step.infeasible) {
            r.infeasible = true;
            r.reason = step.reason;
            r.final_state = step.x;
            return r;
        }
        x = step.x;
    }
    r.final_state = x;
    return r;
}

Metrics rollout_metrics(const envs::ProcessEnv& env, const Rollout& rollout) {
    return compute_metrics(rollout.trajectory, env.spec().setpoint, env.spec().tracked_states, env.spec().dt);
}

}  // namespace yannrl::bench
