#include "yannrl/numerics/qp.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "yannrl/numerics/errors.hpp"
#include "yannrl/numerics/lp.hpp"

namespace yannrl::numerics {

namespace {

void validate(const Qp& qp, const Tolerances& tol) {
    const auto n = qp.H.rows();
    const bool g_ok = qp.G.rows() == 0 || qp.G.cols() == n;
    if (qp.H.cols() != n || qp.f.size() != n || !g_ok || qp.w.size() != qp.G.rows()) {
        throw DimensionError("qp_solve: inconsistent dimensions");
    }
    if (!qp.H.allFinite() || !qp.f.allFinite() || !qp.G.allFinite() || !qp.w.allFinite()) {
        throw NumericalError("qp_solve: non-finite problem data");
    }
    if (n > 0) {
        const Matrix Hs = 0.5 * (qp.H + qp.H.transpose());
        const double min_eig = Eigen::SelfAdjointEigenSolver<Matrix>(Hs, Eigen::EigenvaluesOnly).eigenvalues()[0];
        if (!(min_eig > tol.qp_min_eigenvalue)) {
            throw NumericalError("qp_solve: Hessian not positive definite (min eigenvalue " +
                                 std::to_string(min_eig) + ")");
        }
    }
}

double violation(const Qp& qp, const Vector& u) {
    if (qp.G.rows() == 0) {
        return 0.0;
    }
    return std::max(0.0, (qp.G * u - qp.w).maxCoeff());
}

}  // namespace

double kkt_residual(const Qp& qp, const QpResult& r) {
    if (r.status != QpStatus::Optimal) {
        return std::numeric_limits<double>::infinity();
    }
    Vector grad = qp.H * r.u + qp.f;
    double res = 0.0;
    if (qp.G.rows() > 0) {
        grad += qp.G.transpose() * r.multipliers;
        const Vector slack = qp.G * r.u - qp.w;
        res = std::max(res, std::max(0.0, slack.maxCoeff()));
        res = std::max(res, std::max(0.0, (-r.multipliers).maxCoeff()));
        res = std::max(res, r.multipliers.cwiseProduct(slack).cwiseAbs().maxCoeff());
    }
    if (grad.size() > 0) {
        res = std::max(res, grad.cwiseAbs().maxCoeff());
    }
    return res;
}

QpResult qp_solve(const Qp& qp, const std::optional<Vector>& warm_start, const Tolerances& tol) {
    validate(qp, tol);
    const auto n = qp.H.rows();
    const auto nc = qp.G.rows();
    const Matrix H = 0.5 * (qp.H + qp.H.transpose());

    QpResult result;
    result.multipliers = Vector::Zero(nc);
    const double feas_tol = tol.qp_feasibility * std::max(1.0, nc > 0 ? qp.w.cwiseAbs().maxCoeff() : 0.0);

    Vector u = H.llt().solve(-qp.f);
    if (nc == 0 || violation(qp, u) <= feas_tol) {
        result.status = QpStatus::Optimal;
        result.u = std::move(u);
        return result;
    }

    if (warm_start && warm_start->size() == n && violation(qp, *warm_start) <= feas_tol) {
        u = *warm_start;
    } else {
        const LpResult phase1 = lp_minimize(Vector::Zero(n), qp.G, qp.w, tol);
        if (phase1.status != LpStatus::Optimal) {
            result.status = QpStatus::Infeasible;
            return result;
        }
        u = phase1.x;
    }

    std::vector<int> working;
    std::vector<char> in_working(static_cast<std::size_t>(nc), 0);
    for (int it = 1; it <= tol.qp_max_iterations; ++it) {
        const auto k = static_cast<Eigen::Index>(working.size());
        Matrix kkt = Matrix::Zero(n + k, n + k);
        kkt.topLeftCorner(n, n) = H;
        for (Eigen::Index r = 0; r < k; ++r) {
            const auto row = qp.G.row(working[static_cast<std::size_t>(r)]);
            kkt.block(n + r, 0, 1, n) = row;
            kkt.block(0, n + r, n, 1) = row.transpose();
        }
        Vector rhs = Vector::Zero(n + k);
        rhs.head(n) = -(H * u + qp.f);
        const Vector sol = kkt.fullPivLu().solve(rhs);
        const Vector p = sol.head(n);
        const Vector lambda = sol.tail(k);

        if (p.cwiseAbs().maxCoeff() <= tol.qp_step * std::max(1.0, u.cwiseAbs().maxCoeff())) {
            u += p;
            int drop = -1;
            for (Eigen::Index r = 0; r < k; ++r) {
                const int idx = working[static_cast<std::size_t>(r)];
                if (lambda[r] < -tol.qp_multiplier && (drop < 0 || idx < working[static_cast<std::size_t>(drop)])) {
                    drop = static_cast<int>(r);
                }
            }
            if (drop < 0) {
                result.status = QpStatus::Optimal;
                result.u = u;
                for (Eigen::Index r = 0; r < k; ++r) {
                    result.multipliers[working[static_cast<std::size_t>(r)]] = lambda[r];
                }
                result.active_set = working;
                std::sort(result.active_set.begin(), result.active_set.end());
                result.iterations = it;
                return result;
            }
            in_working[static_cast<std::size_t>(working[static_cast<std::size_t>(drop)])] = 0;
            working.erase(working.begin() + drop);
            continue;
        }

        double alpha = 1.0;
        int blocking = -1;
        for (Eigen::Index i = 0; i < nc; ++i) {
            if (in_working[static_cast<std::size_t>(i)]) {
                continue;
            }
            const double ap = qp.G.row(i).dot(p);
            if (ap <= 1e-14 * qp.G.row(i).norm() * p.norm()) {
                continue;
            }
            const double ratio = std::max(0.0, (qp.w[i] - qp.G.row(i).dot(u)) / ap);
            if (ratio < alpha) {
                alpha = ratio;
                blocking = static_cast<int>(i);
            }
        }
        u += alpha * p;
        if (blocking >= 0) {
            working.push_back(blocking);
            in_working[static_cast<std::size_t>(blocking)] = 1;
        }
    }
    throw ConvergenceError("qp_solve: active-set iteration cap exceeded (cycling guard)", violation(qp, u));
}

}  // namespace yannrl::numerics
