#include "yannrl/numerics/riccati.hpp"

#include <cmath>
#include <string>

#include "yannrl/numerics/errors.hpp"

namespace yannrl::numerics {

namespace {

// One step of the undiscounted Riccati map for (As, Bs).
Matrix riccati_map(const Matrix& As, const Matrix& Bs, const Matrix& Q, const Matrix& R, const Matrix& P) {
    const Matrix PB = P * Bs;
    const Matrix S = R + Bs.transpose() * PB;
    const Matrix gain = S.ldlt().solve(PB.transpose() * As);
    Matrix next = Q + As.transpose() * P * As - (As.transpose() * PB) * gain;
    return 0.5 * (next + next.transpose());
}

void check_shapes(const Matrix& A, const Matrix& B, const Matrix& Q, const Matrix& R) {
    const auto n = A.rows();
    if (A.cols() != n || B.rows() != n || Q.rows() != n || Q.cols() != n || R.rows() != B.cols() ||
        R.cols() != B.cols()) {
        throw DimensionError("solve_dare: inconsistent matrix shapes");
    }
}

}  // namespace

double dare_residual(const Matrix& A, const Matrix& B, const Matrix& Q, const Matrix& R, double gamma,
                     const Matrix& P) {
    const double s = std::sqrt(gamma);
    return (riccati_map(s * A, s * B, Q, R, P) - P).cwiseAbs().maxCoeff();
}

DareSolution solve_dare(const Matrix& A, const Matrix& B, const Matrix& Q, const Matrix& R, double gamma,
                        const Tolerances& tol) {
    check_shapes(A, B, Q, R);
    if (!(gamma >= 0.0 && gamma <= 1.0)) {
        throw Error("solve_dare: gamma must lie in [0, 1]");
    }
    if (!A.allFinite() || !B.allFinite() || !Q.allFinite() || !R.allFinite()) {
        throw NumericalError("solve_dare: non-finite input");
    }
    const double s = std::sqrt(gamma);
    const Matrix As = s * A;
    const Matrix Bs = s * B;
    const Matrix Qs = 0.5 * (Q + Q.transpose());
    const Matrix Rs = 0.5 * (R + R.transpose());

    DareSolution out;
    Matrix P = Qs;
    double step = 0.0;
    for (int it = 1; it <= tol.dare_max_iterations; ++it) {
        Matrix next = riccati_map(As, Bs, Qs, Rs, P);
        if (!next.allFinite()) {
            throw ConvergenceError("solve_dare: iteration diverged (is (sqrt(g)A, sqrt(g)B) stabilizable?)",
                                   std::numeric_limits<double>::infinity());
        }
        step = (next - P).cwiseAbs().maxCoeff();
        P = std::move(next);
        const double scale = std::max(1.0, P.cwiseAbs().maxCoeff());
        if (step < tol.dare_step * scale) {
            out.P = P;
            out.iterations = it;
            out.residual = (riccati_map(As, Bs, Qs, Rs, P) - P).cwiseAbs().maxCoeff();
            if (out.residual >= tol.dare_residual * scale) {
                throw ConvergenceError("solve_dare: converged iterate fails residual check", out.residual);
            }
            return out;
        }
    }
    throw ConvergenceError("solve_dare: no convergence after " + std::to_string(tol.dare_max_iterations) +
                               " iterations",
                           step);
}

Matrix lqr_gain(const Matrix& A, const Matrix& B, const Matrix& R, double gamma, const Matrix& P) {
    const Matrix S = R + gamma * B.transpose() * P * B;
    return -S.ldlt().solve(gamma * B.transpose() * P * A);
}

}  // namespace yannrl::numerics
