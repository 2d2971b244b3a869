#include "yannrl/numerics/ode.hpp"

#include <cmath>
#include <string>

#include "yannrl/numerics/errors.hpp"

namespace yannrl::numerics {

namespace {

Vector checked_eval(const DynamicsFn& f, const Vector& x, const Vector& u, const char* stage) {
    Vector dx = f(x, u);
    if (dx.size() != x.size()) {
        throw DimensionError("dynamics returned " + std::to_string(dx.size()) + " derivatives for " +
                             std::to_string(x.size()) + " states");
    }
    if (const auto bad = first_non_finite(dx); bad >= 0) {
        throw IntegrationError(std::string("non-finite derivative in component ") + std::to_string(bad) +
                                   " at RK4 stage " + stage,
                               static_cast<long>(bad));
    }
    return dx;
}

}  // namespace

Vector rk4_step(const DynamicsFn& f, const Vector& x, const Vector& u, double dt) {
    if (!(dt > 0.0)) {
        throw Error("rk4_step: dt must be positive");
    }
    const Vector k1 = checked_eval(f, x, u, "1");
    const Vector k2 = checked_eval(f, x + 0.5 * dt * k1, u, "2");
    const Vector k3 = checked_eval(f, x + 0.5 * dt * k2, u, "3");
    const Vector k4 = checked_eval(f, x + dt * k3, u, "4");
    return x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

Jacobians jacobian_fd(const DynamicsFn& f, const Vector& x, const Vector& u, double rel_step) {
    if (!(rel_step > 0.0)) {
        throw Error("jacobian_fd: perturbation must be positive");
    }
    const auto eval = [&](const Vector& xp, const Vector& up) {
        Vector y = f(xp, up);
        if (first_non_finite(y) >= 0) {
            throw NumericalError("jacobian_fd: non-finite dynamics evaluation");
        }
        return y;
    };
    const Vector f0 = eval(x, u);
    Jacobians J{Matrix(f0.size(), x.size()), Matrix(f0.size(), u.size())};
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        const double h = rel_step * std::max(1.0, std::abs(x[i]));
        Vector xp = x;
        Vector xm = x;
        xp[i] += h;
        xm[i] -= h;
        J.A.col(i) = (eval(xp, u) - eval(xm, u)) / (xp[i] - xm[i]);
    }
    for (Eigen::Index j = 0; j < u.size(); ++j) {
        const double h = rel_step * std::max(1.0, std::abs(u[j]));
        Vector up = u;
        Vector um = u;
        up[j] += h;
        um[j] -= h;
        J.B.col(j) = (eval(x, up) - eval(x, um)) / (up[j] - um[j]);
    }
    return J;
}

Matrix expm(const Matrix& M, const Tolerances& tol) {
    if (M.rows() != M.cols()) {
        throw DimensionError("expm: matrix must be square");
    }
    if (!M.allFinite()) {
        throw NumericalError("expm: non-finite input");
    }
    const double norm1 = M.cwiseAbs().colwise().sum().maxCoeff();
    int squarings = 0;
    double scaled = norm1;
    while (scaled >= tol.expm_scaled_norm) {
        scaled *= 0.5;
        ++squarings;
    }
    const Matrix S = M / std::ldexp(1.0, squarings);

    // Horner form of sum_{k=0}^{order} S^k / k!
    const auto n = M.rows();
    Matrix E = Matrix::Identity(n, n);
    for (int k = tol.expm_taylor_order; k >= 1; --k) {
        E = Matrix::Identity(n, n) + (S * E) / static_cast<double>(k);
    }
    for (int i = 0; i < squarings; ++i) {
        E = (E * E).eval();
    }
    return E;
}

DiscreteModel discretize_zoh(const Matrix& A_c, const Matrix& B_c, double dt, const Tolerances& tol) {
    if (!(dt > 0.0)) {
        throw Error("discretize_zoh: dt must be positive");
    }
    const auto n = A_c.rows();
    const auto m = B_c.cols();
    if (A_c.cols() != n || B_c.rows() != n) {
        throw DimensionError("discretize_zoh: inconsistent A_c/B_c shapes");
    }
    Matrix aug = Matrix::Zero(n + m, n + m);
    aug.topLeftCorner(n, n) = A_c * dt;
    aug.topRightCorner(n, m) = B_c * dt;
    const Matrix E = expm(aug, tol);
    return {E.topLeftCorner(n, n), E.topRightCorner(n, m)};
}

}  // namespace yannrl::numerics
