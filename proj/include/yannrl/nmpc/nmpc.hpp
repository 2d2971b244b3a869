#pragma once

#include <optional>
#include <vector>

#include <json.hpp>

#include "yannrl/bench/metrics.hpp"
#include "yannrl/envs/process_env.hpp"
#include "yannrl/explicit_mpc/formulation.hpp"

namespace yannrl::nmpc {

/// Discounted tracking problem over the true sampled dynamics, in normalized
/// coordinates, with input boxes only:
///   min_V sum_{k<N} g^k (z_k'Q z_k + v_k'R v_k) + g^N z_N'P z_N
struct NmpcConfig {
    int horizon = 1;
    Matrix Q;
    Matrix R;
    Matrix P;
    double gamma = 1.0;
    Box input_box;  // normalized
    int max_iterations = 20;
    double tolerance = 1e-7;  // on |dV|_inf
    double line_search_shrink = 0.5;
    double armijo = 1e-4;
    int max_line_search = 40;
    double jacobian_step = 1e-5;  // relative central-difference step on the sampled map

    void validate() const;
};

/// Weights, terminal matrix and horizon from a linear formulation, solver
/// settings from the optional "nmpc" object of an environment control block.
[[nodiscard]] NmpcConfig config_from_formulation(const explicit_mpc::MpcFormulation& f,
                                                 const nlohmann::json& settings = nlohmann::json::object());
[[nodiscard]] NmpcConfig config_from_env(const envs::ProcessEnv& env, const nlohmann::json& control,
                                         const Tolerances& tol = default_tolerances());

struct NmpcSolution {
    Vector u;                     // first move, physical units
    Matrix V;                     // m x N normalized input sequence
    double cost = 0.0;            // true horizon cost of V
    std::vector<double> costs;    // true cost after each accepted iterate, starting with the warm start
    int iterations = 0;           // accepted SQP steps
    int qp_solves = 0;
    bool converged = false;
    bool stalled = false;         // line search found no decrease
};

/// True horizon cost of a normalized input sequence; +inf when the
/// prediction leaves the model's domain or stops being finite.
[[nodiscard]] double horizon_cost(const envs::ProcessEnv& env, const NmpcConfig& cfg, const Vector& z0,
                                  const Matrix& V);

/// Sequential linearization: roll the nominal prediction through the RK4
/// map, linearize every knot by central differences of that map, solve the
/// condensed QP for the step subject to the input boxes, then backtrack on
/// the true cost. The warm start (normalized, m x N, default zero) is
/// clamped into the box first. The returned cost never exceeds the cost of
/// the clamped warm start.
[[nodiscard]] NmpcSolution nmpc_solve(const envs::ProcessEnv& env, const NmpcConfig& cfg, const Vector& x0,
                                      const std::optional<Matrix>& warm_start = std::nullopt,
                                      const Tolerances& tol = default_tolerances());

struct NmpcStepLog {
    int step = 0;
    int iterations = 0;
    bool converged = false;
    bool stalled = false;
    double cost = 0.0;
};

struct NmpcRollout {
    bench::Rollout rollout;
    bench::Metrics metrics;
    std::vector<NmpcStepLog> log;
};

/// Receding horizon with shift-and-hold warm starts on the noiseless plant.
[[nodiscard]] NmpcRollout nmpc_rollout(const envs::ProcessEnv& env, const NmpcConfig& cfg, const Vector& x0,
                                       int steps, const Tolerances& tol = default_tolerances());

}  // namespace yannrl::nmpc
