#pragma once

#include <optional>

#include "yannrl/numerics/tolerances.hpp"
#include "yannrl/numerics/types.hpp"

namespace yannrl::numerics {

enum class LpStatus { Optimal, Infeasible, Unbounded };

struct LpResult {
    LpStatus status = LpStatus::Infeasible;
    Vector x;
    double value = 0.0;
};

/// min c'x s.t. G x <= w, x free. Dense two-phase tableau simplex with
/// Bland's rule, so it terminates on degenerate problems.
[[nodiscard]] LpResult lp_minimize(const Vector& c, const Matrix& G, const Vector& w,
                                   const Tolerances& tol = default_tolerances());

struct ChebyshevBall {
    Vector center;
    double radius = 0.0;
};

/// Largest inscribed ball of {x : G x <= w}. Radius is capped at
/// tol.chebyshev_radius_cap for unbounded sets. Empty when infeasible.
[[nodiscard]] std::optional<ChebyshevBall> chebyshev_ball(const Matrix& G, const Vector& w,
                                                          const Tolerances& tol = default_tolerances());

/// Chebyshev center of {x : G x <= w} when its inscribed radius exceeds
/// strict_tol; empty otherwise.
[[nodiscard]] std::optional<ChebyshevBall> lp_feasible(const Matrix& G, const Vector& w, double strict_tol,
                                                       const Tolerances& tol = default_tolerances());

}  // namespace yannrl::numerics
