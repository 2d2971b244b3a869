#include "yannrl/nmpc/nmpc.hpp"

#include <cmath>
#include <limits>

#include "yannrl/explicit_mpc/condense.hpp"
#include "yannrl/numerics/errors.hpp"
#include "yannrl/numerics/json_io.hpp"
#include "yannrl/numerics/ode.hpp"
#include "yannrl/numerics/qp.hpp"

namespace yannrl::nmpc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

/// Sampled map in normalized coordinates.
Vector step_map(const envs::ProcessEnv& env, const Vector& z, const Vector& v) {
    return env.normalize_state(env.propagate(env.denormalize_state(z), env.denormalize_input(v)));
}

/// Nominal prediction z_0 .. z_N as columns; empty when it fails.
std::optional<Matrix> simulate(const envs::ProcessEnv& env, const Vector& z0, const Matrix& V) {
    Matrix Z(z0.size(), V.cols() + 1);
    Z.col(0) = z0;
    try {
        for (Eigen::Index k = 0; k < V.cols(); ++k) {
            Z.col(k + 1) = step_map(env, Z.col(k), V.col(k));
            if (first_non_finite(Z.col(k + 1)) >= 0) {
                return std::nullopt;
            }
        }
    } catch (const Error&) {
        return std::nullopt;
    }
    return Z;
}

double cost_of(const NmpcConfig& cfg, const Matrix& Z, const Matrix& V) {
    double J = 0.0;
    double w = 1.0;
    for (Eigen::Index k = 0; k < V.cols(); ++k) {
        J += w * (Z.col(k).dot(cfg.Q * Z.col(k)) + V.col(k).dot(cfg.R * V.col(k)));
        w *= cfg.gamma;
    }
    const Vector zN = Z.col(V.cols());
    return J + w * zN.dot(cfg.P * zN);
}

Vector flatten(const Matrix& V) { return Eigen::Map<const Vector>(V.data(), V.size()); }

Matrix unflatten(const Vector& U, Eigen::Index m) { return Eigen::Map<const Matrix>(U.data(), m, U.size() / m); }

}  // namespace

void NmpcConfig::validate() const {
    const auto m = input_box.size();
    const auto n = Q.rows();
    if (horizon < 1) {
        throw ConfigError("nmpc: horizon must be at least 1");
    }
    if (!(tolerance > 0.0)) {
        throw ConfigError("nmpc: tolerance must be positive");
    }
    if (!(jacobian_step > 0.0)) {
        throw ConfigError("nmpc: Jacobian step must be positive");
    }
    if (max_iterations < 1 || max_line_search < 1) {
        throw ConfigError("nmpc: iteration caps must be at least 1");
    }
    if (!(line_search_shrink > 0.0 && line_search_shrink < 1.0)) {
        throw ConfigError("nmpc: line-search shrink factor must lie in (0, 1)");
    }
    if (!(armijo >= 0.0 && armijo < 0.5)) {
        throw ConfigError("nmpc: Armijo constant must lie in [0, 0.5)");
    }
    if (!(gamma > 0.0 && gamma <= 1.0)) {
        throw ConfigError("nmpc: discount must lie in (0, 1]");
    }
    if (Q.cols() != n || P.rows() != n || P.cols() != n || R.rows() != m || R.cols() != m ||
        input_box.upper.size() != m) {
        throw DimensionError("nmpc: weight and box dimensions disagree");
    }
    if ((input_box.lower.array() > input_box.upper.array()).any()) {
        throw ConfigError("nmpc: empty input box");
    }
}

NmpcConfig config_from_formulation(const explicit_mpc::MpcFormulation& f, const nlohmann::json& settings) {
    NmpcConfig cfg;
    cfg.horizon = f.horizon;
    cfg.Q = f.Q;
    cfg.R = f.R;
    cfg.P = f.P;
    cfg.gamma = f.gamma;
    cfg.input_box = f.input_box;
    cfg.max_iterations = settings.value("max_iterations", cfg.max_iterations);
    cfg.tolerance = settings.value("tolerance", cfg.tolerance);
    cfg.line_search_shrink = settings.value("line_search_shrink", cfg.line_search_shrink);
    cfg.armijo = settings.value("armijo", cfg.armijo);
    cfg.max_line_search = settings.value("max_line_search", cfg.max_line_search);
    cfg.jacobian_step = settings.value("jacobian_step", cfg.jacobian_step);
    if (settings.contains("horizon")) {
        cfg.horizon = settings.at("horizon").get<int>();
    }
    cfg.validate();
    return cfg;
}

NmpcConfig config_from_env(const envs::ProcessEnv& env, const nlohmann::json& control, const Tolerances& tol) {
    const auto f = explicit_mpc::formulation_from_env(env, control, tol);
    return config_from_formulation(f, control.value("nmpc", nlohmann::json::object()));
}

double horizon_cost(const envs::ProcessEnv& env, const NmpcConfig& cfg, const Vector& z0, const Matrix& V) {
    const auto Z = simulate(env, z0, V);
    return Z ? cost_of(cfg, *Z, V) : kInf;
}

NmpcSolution nmpc_solve(const envs::ProcessEnv& env, const NmpcConfig& cfg, const Vector& x0,
                        const std::optional<Matrix>& warm_start, const Tolerances& tol) {
    cfg.validate();
    const auto n = env.n_states();
    const auto m = env.n_inputs();
    const int N = cfg.horizon;
    if (x0.size() != n || cfg.Q.rows() != n || m != cfg.input_box.size()) {
        throw DimensionError("nmpc_solve: problem and environment dimensions disagree");
    }
    Matrix V = warm_start ? *warm_start : Matrix::Zero(m, N);
    if (V.rows() != m || V.cols() != N) {
        throw DimensionError("nmpc_solve: warm start must be m x N");
    }
    for (Eigen::Index k = 0; k < N; ++k) {
        V.col(k) = cfg.input_box.clamp(V.col(k));
    }
    const Vector z0 = env.normalize_state(x0);
    auto Z = simulate(env, z0, V);
    if (!Z) {
        throw DomainError("nmpc_solve: the warm start leaves the model domain");
    }

    const Matrix Qbar = explicit_mpc::stacked_state_weight(cfg.Q, cfg.P, cfg.gamma, N);
    const Matrix Rbar = explicit_mpc::stacked_input_weight(cfg.R, cfg.gamma, N);
    const Eigen::Index nu = N * m;
    Matrix G(2 * nu, nu);
    G << Matrix::Identity(nu, nu), -Matrix::Identity(nu, nu);
    const Vector upper = cfg.input_box.upper.replicate(N, 1);
    const Vector lower = cfg.input_box.lower.replicate(N, 1);
    const DynamicsFn map = [&env](const Vector& z, const Vector& v) { return step_map(env, z, v); };

    NmpcSolution sol;
    sol.cost = cost_of(cfg, *Z, V);
    sol.costs.push_back(sol.cost);
    for (int it = 0; it < cfg.max_iterations; ++it) {
        std::vector<Matrix> A(static_cast<std::size_t>(N));
        std::vector<Matrix> B(static_cast<std::size_t>(N));
        try {
            for (int k = 0; k < N; ++k) {
                auto J = numerics::jacobian_fd(map, Z->col(k), V.col(k), cfg.jacobian_step);
                A[static_cast<std::size_t>(k)] = std::move(J.A);
                B[static_cast<std::size_t>(k)] = std::move(J.B);
            }
        } catch (const Error&) {
            sol.stalled = true;  // a perturbed knot left the model domain
            break;
        }
        const auto pred = explicit_mpc::predict(A, B);
        const Vector U = flatten(V);
        const Vector Zbar = Eigen::Map<const Vector>(Z->data() + n, N * n);
        numerics::Qp qp;
        qp.H = 2.0 * (pred.Gamma.transpose() * Qbar * pred.Gamma + Rbar);
        qp.H = 0.5 * (qp.H + qp.H.transpose()).eval();
        qp.f = 2.0 * (pred.Gamma.transpose() * (Qbar * Zbar) + Rbar * U);
        qp.G = G;
        qp.w.resize(2 * nu);
        qp.w << upper - U, U - lower;
        const auto res = numerics::qp_solve(qp, Vector::Zero(nu), tol);
        ++sol.qp_solves;
        if (res.status != numerics::QpStatus::Optimal) {
            throw NumericalError("nmpc_solve: box-constrained step QP reported infeasible");
        }
        const Vector& d = res.u;
        if (d.lpNorm<Eigen::Infinity>() < cfg.tolerance) {
            sol.converged = true;
            break;
        }
        // the linearization is exact to first order, so f'd is the directional derivative
        const double slope = qp.f.dot(d);
        double alpha = 1.0;
        bool accepted = false;
        for (int ls = 0; ls < cfg.max_line_search; ++ls) {
            Matrix trial = unflatten(U + alpha * d, m);
            for (Eigen::Index k = 0; k < N; ++k) {
                trial.col(k) = cfg.input_box.clamp(trial.col(k));
            }
            auto Zt = simulate(env, z0, trial);
            if (Zt) {
                const double Jt = cost_of(cfg, *Zt, trial);
                if (Jt <= sol.cost + cfg.armijo * alpha * std::min(slope, 0.0)) {
                    V = std::move(trial);
                    Z = std::move(Zt);
                    sol.cost = Jt;
                    accepted = true;
                    break;
                }
            }
            alpha *= cfg.line_search_shrink;
        }
        if (!accepted) {
            sol.stalled = true;
            break;
        }
        ++sol.iterations;
        sol.costs.push_back(sol.cost);
        if (alpha * d.lpNorm<Eigen::Infinity>() < cfg.tolerance) {
            sol.converged = true;
            break;
        }
    }
    sol.V = V;
    sol.u = env.spec().input_box.clamp(env.denormalize_input(V.col(0)));
    return sol;
}

NmpcRollout nmpc_rollout(const envs::ProcessEnv& env, const NmpcConfig& cfg, const Vector& x0, int steps,
                         const Tolerances& tol) {
    NmpcRollout out;
    std::optional<Matrix> warm;
    const bench::Controller controller = [&](const Vector& x, int step) {
        auto sol = nmpc_solve(env, cfg, x, warm, tol);
        out.log.push_back({step, sol.iterations, sol.converged, sol.stalled, sol.cost});
        Matrix next(sol.V.rows(), sol.V.cols());
        next.leftCols(sol.V.cols() - 1) = sol.V.rightCols(sol.V.cols() - 1);
        next.col(sol.V.cols() - 1) = sol.V.col(sol.V.cols() - 1);
        warm = std::move(next);
        return sol.u;
    };
    out.rollout = bench::closed_loop(env, x0, steps, controller);
    out.metrics = bench::rollout_metrics(env, out.rollout);
    return out;
}

}  // namespace yannrl::nmpc
