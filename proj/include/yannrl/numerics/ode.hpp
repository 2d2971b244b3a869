#pragma once

#include "yannrl/numerics/tolerances.hpp"
#include "yannrl/numerics/types.hpp"

namespace yannrl::numerics {

/// Classic fourth-order Runge-Kutta step of dx/dt = f(x, u) with u held.
/// Throws IntegrationError naming the first non-finite derivative component.
[[nodiscard]] Vector rk4_step(const DynamicsFn& f, const Vector& x, const Vector& u, double dt);

struct Jacobians {
    Matrix A;  // df/dx
    Matrix B;  // df/du
};

/// Central-difference Jacobians. Coordinate i is perturbed by
/// rel_step * max(1, |v_i|).
[[nodiscard]] Jacobians jacobian_fd(const DynamicsFn& f, const Vector& x, const Vector& u,
                                    double rel_step = default_tolerances().fd_relative_step);

/// Matrix exponential by scaling and squaring of a truncated Taylor series.
[[nodiscard]] Matrix expm(const Matrix& M, const Tolerances& tol = default_tolerances());

struct DiscreteModel {
    Matrix A;
    Matrix B;
};

/// Exact zero-order-hold discretization:
/// [A B; 0 I] = exp([A_c B_c; 0 0] dt).
[[nodiscard]] DiscreteModel discretize_zoh(const Matrix& A_c, const Matrix& B_c, double dt,
                                           const Tolerances& tol = default_tolerances());

}  // namespace yannrl::numerics
