#pragma once

#include <optional>
#include <vector>

#include "yannrl/explicit_mpc/formulation.hpp"
#include "yannrl/numerics/qp.hpp"

namespace yannrl::explicit_mpc {

/// Stacked predictions [z_1; ...; z_N] = Phi z_0 + Gamma U for a possibly
/// time-varying system z_{k+1} = A_k z_k + B_k v_k.
struct Prediction {
    Matrix Phi;    // (N n) x n
    Matrix Gamma;  // (N n) x (N m)
};

[[nodiscard]] Prediction predict(const std::vector<Matrix>& A, const std::vector<Matrix>& B);

/// Block-diagonal discounted weights: Qbar = diag(g Q, ..., g^{N-1} Q, g^N P),
/// Rbar = diag(R, g R, ..., g^{N-1} R).
[[nodiscard]] Matrix stacked_state_weight(const Matrix& Q, const Matrix& P, double gamma, int horizon);
[[nodiscard]] Matrix stacked_input_weight(const Matrix& R, double gamma, int horizon);

/// min_U 1/2 U'HU + z'FU  s.t.  G U <= W + S z
struct CondensedQp {
    int horizon = 1;
    Eigen::Index n = 0;
    Eigen::Index m = 0;
    Matrix H;
    Matrix F;
    Matrix G;
    Vector W;
    Matrix S;

    [[nodiscard]] numerics::Qp at(const Vector& z) const;
    /// Objective value without the z-only constant.
    [[nodiscard]] double objective(const Vector& z, const Vector& U) const;
};

/// Constraint rows are ordered stage by stage: input upper/lower bounds for
/// v_k, then state bounds for z_k (k >= 1) when present, then the terminal set.
[[nodiscard]] CondensedQp condense(const MpcFormulation& f);

/// Stage-by-stage objective of the formulation, by direct simulation.
[[nodiscard]] double mpc_objective(const MpcFormulation& f, const Vector& z, const Vector& U);

/// First move of the online QP at z, or empty when the QP is infeasible.
[[nodiscard]] std::optional<Vector> online_mpc(const CondensedQp& qp, const Vector& z,
                                               const Tolerances& tol = default_tolerances());

}  // namespace yannrl::explicit_mpc
