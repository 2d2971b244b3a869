#pragma once

#include <cstdint>
#include <optional>

#include <json.hpp>

#include "yannrl/envs/process_env.hpp"
#include "yannrl/numerics/tolerances.hpp"
#include "yannrl/numerics/types.hpp"

namespace yannrl::explicit_mpc {

/// Discrete linear model z+ = A z + B v in deviation coordinates around
/// (x_ss, u_ss). For environment models the coordinates are normalized by
/// the box widths.
struct LinearSystem {
    Matrix A;
    Matrix B;
    Vector x_ss;
    Vector u_ss;
    double dt = 0.0;

    [[nodiscard]] Eigen::Index n() const { return A.rows(); }
    [[nodiscard]] Eigen::Index m() const { return B.cols(); }
};

/// Discounted constrained LQ problem
///   min sum_{k<N} g^k (z_k'Q z_k + v_k'R v_k) + g^N z_N'P z_N
///   s.t. v_k in input_box, z_k in state_box (1 <= k < N), z_N in terminal_set.
/// All sets are in the same deviation coordinates as the system.
struct MpcFormulation {
    int horizon = 1;
    LinearSystem system;
    Matrix Q;
    Matrix R;
    Matrix P;
    double gamma = 1.0;
    Box input_box;
    std::optional<Box> state_box;
    std::optional<Polyhedron> terminal_set;
    Box domain;  // parameter region handed to the multiparametric solver

    /// Throws DimensionError / Error when shapes or sets are inconsistent.
    void validate() const;
};

/// Fills P from the discounted DARE on (A, B, Q, R, gamma) and validates.
[[nodiscard]] MpcFormulation make_formulation(LinearSystem system, Matrix Q, Matrix R, double gamma,
                                              int horizon, Box input_box, Box domain,
                                              std::optional<Box> state_box = std::nullopt,
                                              std::optional<Polyhedron> terminal_set = std::nullopt,
                                              const Tolerances& tol = default_tolerances());

/// Jacobian linearization at (setpoint, steady input) followed by ZOH over
/// one sample period, in normalized deviation coordinates.
[[nodiscard]] LinearSystem linearize_env(const envs::ProcessEnv& env,
                                         const Tolerances& tol = default_tolerances());

/// Builds the formulation for an environment from its "control" block:
/// horizon, gamma, state_constraints, terminal_constraint. The domain and
/// the optional state/terminal sets are the normalized state box.
[[nodiscard]] MpcFormulation formulation_from_env(const envs::ProcessEnv& env, const nlohmann::json& control,
                                                  const Tolerances& tol = default_tolerances());

[[nodiscard]] nlohmann::json formulation_to_json(const MpcFormulation& f);

/// FNV-1a of the canonical JSON dump; ties a stored law to its problem.
[[nodiscard]] std::uint64_t formulation_hash(const MpcFormulation& f);

}  // namespace yannrl::explicit_mpc
