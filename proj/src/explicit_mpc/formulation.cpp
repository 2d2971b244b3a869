#include "yannrl/explicit_mpc/formulation.hpp"

#include "yannrl/numerics/errors.hpp"
#include "yannrl/numerics/json_io.hpp"
#include "yannrl/numerics/ode.hpp"
#include "yannrl/numerics/riccati.hpp"

namespace yannrl::explicit_mpc {

namespace {

void check_box(const Box& box, Eigen::Index dim, const char* what) {
    if (box.lower.size() != dim || box.upper.size() != dim) {
        throw DimensionError(std::string(what) + " has the wrong dimension");
    }
    if ((box.upper.array() < box.lower.array()).any()) {
        throw Error(std::string(what) + " is empty");
    }
}

void check_square(const Matrix& M, Eigen::Index dim, const char* what) {
    if (M.rows() != dim || M.cols() != dim) {
        throw DimensionError(std::string(what) + " must be " + std::to_string(dim) + "x" + std::to_string(dim));
    }
}

nlohmann::json box_to_json(const Box& box) {
    return {{"lower", vector_to_json(box.lower)}, {"upper", vector_to_json(box.upper)}};
}

}  // namespace

void MpcFormulation::validate() const {
    const auto n = system.A.rows();
    const auto m = system.B.cols();
    if (horizon < 1) {
        throw Error("horizon must be at least 1");
    }
    check_square(system.A, n, "A");
    if (system.B.rows() != n) {
        throw DimensionError("B must have as many rows as A");
    }
    check_square(Q, n, "Q");
    check_square(R, m, "R");
    check_square(P, n, "P");
    if (!(gamma > 0.0 && gamma <= 1.0)) {
        throw Error("discount must lie in (0, 1]");
    }
    check_box(input_box, m, "input box");
    check_box(domain, n, "domain");
    if (state_box) {
        check_box(*state_box, n, "state box");
    }
    if (terminal_set && (terminal_set->A.cols() != n || terminal_set->A.rows() != terminal_set->b.size())) {
        throw DimensionError("terminal set has the wrong dimension");
    }
}

MpcFormulation make_formulation(LinearSystem system, Matrix Q, Matrix R, double gamma, int horizon, Box input_box,
                                Box domain, std::optional<Box> state_box, std::optional<Polyhedron> terminal_set,
                                const Tolerances& tol) {
    MpcFormulation f;
    f.horizon = horizon;
    f.system = std::move(system);
    f.Q = std::move(Q);
    f.R = std::move(R);
    f.gamma = gamma;
    f.input_box = std::move(input_box);
    f.domain = std::move(domain);
    f.state_box = std::move(state_box);
    f.terminal_set = std::move(terminal_set);
    f.P = Matrix::Zero(f.system.A.rows(), f.system.A.rows());
    f.validate();
    f.P = numerics::solve_dare(f.system.A, f.system.B, f.Q, f.R, f.gamma, tol).P;
    return f;
}

LinearSystem linearize_env(const envs::ProcessEnv& env, const Tolerances& tol) {
    const auto& spec = env.spec();
    const auto J = numerics::jacobian_fd(env.dynamics(), spec.setpoint, spec.steady_input, tol.fd_relative_step);
    const Vector sx = spec.state_box.width();
    const Vector su = spec.input_box.width();
    const Matrix A_c = sx.cwiseInverse().asDiagonal() * J.A * sx.asDiagonal();
    const Matrix B_c = sx.cwiseInverse().asDiagonal() * J.B * su.asDiagonal();
    const auto d = numerics::discretize_zoh(A_c, B_c, spec.dt, tol);
    return {d.A, d.B, spec.setpoint, spec.steady_input, spec.dt};
}

MpcFormulation formulation_from_env(const envs::ProcessEnv& env, const nlohmann::json& control,
                                    const Tolerances& tol) {
    const int horizon = require(control, "horizon").get<int>();
    const double gamma = control.value("gamma", 0.99);
    const Box state_box = env.normalized_state_box();
    std::optional<Box> stage_box;
    if (control.value("state_constraints", false)) {
        stage_box = state_box;
    }
    std::optional<Polyhedron> terminal;
    if (control.value("terminal_constraint", false)) {
        terminal = Polyhedron::from_box(state_box);
    }
    return make_formulation(linearize_env(env, tol), env.spec().Q_w, env.spec().R, gamma, horizon,
                            env.normalized_input_box(), state_box, stage_box, terminal, tol);
}

nlohmann::json formulation_to_json(const MpcFormulation& f) {
    nlohmann::json j;
    j["horizon"] = f.horizon;
    j["gamma"] = f.gamma;
    j["A"] = matrix_to_json(f.system.A);
    j["B"] = matrix_to_json(f.system.B);
    j["x_ss"] = vector_to_json(f.system.x_ss);
    j["u_ss"] = vector_to_json(f.system.u_ss);
    j["dt"] = f.system.dt;
    j["Q"] = matrix_to_json(f.Q);
    j["R"] = matrix_to_json(f.R);
    j["P"] = matrix_to_json(f.P);
    j["input_box"] = box_to_json(f.input_box);
    j["domain"] = box_to_json(f.domain);
    j["state_box"] = f.state_box ? box_to_json(*f.state_box) : nlohmann::json();
    if (f.terminal_set) {
        j["terminal_set"] = {{"A", matrix_to_json(f.terminal_set->A)}, {"b", vector_to_json(f.terminal_set->b)}};
    } else {
        j["terminal_set"] = nullptr;
    }
    return j;
}

std::uint64_t formulation_hash(const MpcFormulation& f) { return fnv1a64(formulation_to_json(f).dump()); }

}  // namespace yannrl::explicit_mpc
