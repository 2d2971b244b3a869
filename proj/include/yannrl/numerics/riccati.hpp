#pragma once

#include "yannrl/numerics/tolerances.hpp"
#include "yannrl/numerics/types.hpp"

namespace yannrl::numerics {

/// Solution of the discounted discrete algebraic Riccati equation
///   P = Q + g A'PA - g^2 A'PB (R + g B'PB)^-1 B'PA
/// obtained by value iteration on the undiscounted equation for
/// (sqrt(g) A, sqrt(g) B), starting from P = Q.
struct DareSolution {
    Matrix P;
    int iterations = 0;
    double residual = 0.0;
};

[[nodiscard]] DareSolution solve_dare(const Matrix& A, const Matrix& B, const Matrix& Q,
                                      const Matrix& R, double gamma,
                                      const Tolerances& tol = default_tolerances());

/// Max-abs residual of the discounted Riccati map at P.
[[nodiscard]] double dare_residual(const Matrix& A, const Matrix& B, const Matrix& Q,
                                   const Matrix& R, double gamma, const Matrix& P);

/// Discounted LQR gain K with u = K x, i.e. K = -(R + g B'PB)^-1 g B'PA.
[[nodiscard]] Matrix lqr_gain(const Matrix& A, const Matrix& B, const Matrix& R, double gamma,
                              const Matrix& P);

}  // namespace yannrl::numerics
