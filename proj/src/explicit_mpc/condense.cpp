#include "yannrl/explicit_mpc/condense.hpp"

#include <cmath>

#include "yannrl/numerics/errors.hpp"

namespace yannrl::explicit_mpc {

Prediction predict(const std::vector<Matrix>& A, const std::vector<Matrix>& B) {
    if (A.empty() || A.size() != B.size()) {
        throw DimensionError("prediction needs one (A, B) pair per stage");
    }
    const auto N = static_cast<Eigen::Index>(A.size());
    const auto n = A.front().rows();
    const auto m = B.front().cols();
    Prediction p{Matrix::Zero(N * n, n), Matrix::Zero(N * n, N * m)};
    Matrix transition = Matrix::Identity(n, n);
    for (Eigen::Index k = 0; k < N; ++k) {
        const auto& Ak = A[static_cast<std::size_t>(k)];
        const auto& Bk = B[static_cast<std::size_t>(k)];
        if (Ak.rows() != n || Ak.cols() != n || Bk.rows() != n || Bk.cols() != m) {
            throw DimensionError("inconsistent stage matrices at stage " + std::to_string(k));
        }
        transition = Ak * transition;
        p.Phi.middleRows(k * n, n) = transition;
        p.Gamma.block(k * n, k * m, n, m) = Bk;
        if (k > 0) {
            p.Gamma.block(k * n, 0, n, k * m) = Ak * p.Gamma.block((k - 1) * n, 0, n, k * m);
        }
    }
    return p;
}

Matrix stacked_state_weight(const Matrix& Q, const Matrix& P, double gamma, int horizon) {
    const auto n = Q.rows();
    Matrix W = Matrix::Zero(horizon * n, horizon * n);
    for (int k = 1; k < horizon; ++k) {
        W.block((k - 1) * n, (k - 1) * n, n, n) = std::pow(gamma, k) * Q;
    }
    W.block((horizon - 1) * n, (horizon - 1) * n, n, n) = std::pow(gamma, horizon) * P;
    return W;
}

Matrix stacked_input_weight(const Matrix& R, double gamma, int horizon) {
    const auto m = R.rows();
    Matrix W = Matrix::Zero(horizon * m, horizon * m);
    for (int k = 0; k < horizon; ++k) {
        W.block(k * m, k * m, m, m) = std::pow(gamma, k) * R;
    }
    return W;
}

numerics::Qp CondensedQp::at(const Vector& z) const {
    if (z.size() != n) {
        throw DimensionError("state has the wrong dimension for this QP");
    }
    return {H, F.transpose() * z, G, W + S * z};
}

double CondensedQp::objective(const Vector& z, const Vector& U) const {
    return 0.5 * U.dot(H * U) + z.dot(F * U);
}

CondensedQp condense(const MpcFormulation& f) {
    f.validate();
    const int N = f.horizon;
    const auto n = f.system.n();
    const auto m = f.system.m();
    const auto pred = predict(std::vector<Matrix>(static_cast<std::size_t>(N), f.system.A),
                              std::vector<Matrix>(static_cast<std::size_t>(N), f.system.B));
    const Matrix Qbar = stacked_state_weight(f.Q, f.P, f.gamma, N);
    const Matrix Rbar = stacked_input_weight(f.R, f.gamma, N);

    CondensedQp qp;
    qp.horizon = N;
    qp.n = n;
    qp.m = m;
    qp.H = 2.0 * (pred.Gamma.transpose() * Qbar * pred.Gamma + Rbar);
    qp.H = 0.5 * (qp.H + qp.H.transpose()).eval();
    qp.F = 2.0 * pred.Phi.transpose() * Qbar * pred.Gamma;

    Eigen::Index rows = N * 2 * m;
    if (f.state_box) {
        rows += (N - 1) * 2 * n;
    }
    if (f.terminal_set) {
        rows += f.terminal_set->rows();
    }
    qp.G = Matrix::Zero(rows, N * m);
    qp.W = Vector::Zero(rows);
    qp.S = Matrix::Zero(rows, n);

    Eigen::Index r = 0;
    const auto add_state_rows = [&](Eigen::Index stage, const Matrix& Ax, const Vector& bx) {
        // Ax z_stage <= bx with z_stage = Phi_s z + Gamma_s U
        const auto cnt = Ax.rows();
        qp.G.middleRows(r, cnt) = Ax * pred.Gamma.middleRows((stage - 1) * n, n);
        qp.W.segment(r, cnt) = bx;
        qp.S.middleRows(r, cnt) = -Ax * pred.Phi.middleRows((stage - 1) * n, n);
        r += cnt;
    };
    const Matrix I_m = Matrix::Identity(m, m);
    for (int k = 0; k < N; ++k) {
        qp.G.block(r, k * m, m, m) = I_m;
        qp.W.segment(r, m) = f.input_box.upper;
        r += m;
        qp.G.block(r, k * m, m, m) = -I_m;
        qp.W.segment(r, m) = -f.input_box.lower;
        r += m;
        if (f.state_box && k >= 1) {
            const auto box = Polyhedron::from_box(*f.state_box);
            add_state_rows(k, box.A, box.b);
        }
    }
    if (f.terminal_set) {
        add_state_rows(N, f.terminal_set->A, f.terminal_set->b);
    }
    return qp;
}

double mpc_objective(const MpcFormulation& f, const Vector& z, const Vector& U) {
    const auto m = f.system.m();
    if (U.size() != f.horizon * m) {
        throw DimensionError("input sequence has the wrong length");
    }
    double total = 0.0;
    double weight = 1.0;
    Vector x = z;
    for (int k = 0; k < f.horizon; ++k) {
        const Vector v = U.segment(k * m, m);
        total += weight * (x.dot(f.Q * x) + v.dot(f.R * v));
        x = f.system.A * x + f.system.B * v;
        weight *= f.gamma;
    }
    return total + weight * x.dot(f.P * x);
}

std::optional<Vector> online_mpc(const CondensedQp& qp, const Vector& z, const Tolerances& tol) {
    const auto result = numerics::qp_solve(qp.at(z), std::nullopt, tol);
    if (result.status != numerics::QpStatus::Optimal) {
        return std::nullopt;
    }
    return Vector(result.u.head(qp.m));
}

}  // namespace yannrl::explicit_mpc
