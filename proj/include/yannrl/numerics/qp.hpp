#pragma once

#include <optional>
#include <vector>

#include "yannrl/numerics/tolerances.hpp"
#include "yannrl/numerics/types.hpp"

namespace yannrl::numerics {

/// min 1/2 u'Hu + f'u  s.t.  G u <= w
struct Qp {
    Matrix H;
    Vector f;
    Matrix G;
    Vector w;

    [[nodiscard]] Eigen::Index num_variables() const { return H.rows(); }
    [[nodiscard]] Eigen::Index num_constraints() const { return G.rows(); }
};

enum class QpStatus { Optimal, Infeasible };

struct QpResult {
    QpStatus status = QpStatus::Infeasible;
    Vector u;
    std::vector<int> active_set;  // sorted constraint indices
    Vector multipliers;           // one per constraint, zero when inactive
    int iterations = 0;
};

/// Primal active-set method for strictly convex QPs. A feasible start comes
/// from the warm start when it is feasible, otherwise from a phase-1 LP.
/// Ties are broken by lowest constraint index for both adding blocking
/// constraints and dropping negative multipliers.
///
/// Throws DimensionError on inconsistent shapes, NumericalError when H is
/// not positive definite, ConvergenceError when the iteration cap trips.
[[nodiscard]] QpResult qp_solve(const Qp& qp, const std::optional<Vector>& warm_start = std::nullopt,
                                const Tolerances& tol = default_tolerances());

/// Max of stationarity, primal infeasibility, and complementarity violations.
[[nodiscard]] double kkt_residual(const Qp& qp, const QpResult& result);

}  // namespace yannrl::numerics
