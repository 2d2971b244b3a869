#include "yannrl/envs/process_env.hpp"

#include <cmath>

#include "yannrl/envs/models.hpp"
#include "yannrl/numerics/errors.hpp"
#include "yannrl/numerics/json_io.hpp"
#include "yannrl/numerics/ode.hpp"
#include "yannrl/numerics/random.hpp"

namespace yannrl::envs {

namespace {

constexpr std::uint64_t kResetStream = 0x5e5e7;

double param(const nlohmann::json& params, const char* key, double fallback) {
    return params.contains(key) ? params.at(key).get<double>() : fallback;
}

Box box_from_json(const nlohmann::json& j) {
    Box b{vector_from_json(require(j, "lower")), vector_from_json(require(j, "upper"))};
    if (b.lower.size() != b.upper.size()) {
        throw ConfigError("box bounds have different lengths");
    }
    return b;
}

std::vector<bool> mask_from_json(const nlohmann::json& config, const char* key, Eigen::Index n, bool fallback) {
    std::vector<bool> mask(static_cast<std::size_t>(n), fallback);
    if (config.contains(key)) {
        const auto& j = config.at(key);
        if (static_cast<Eigen::Index>(j.size()) != n) {
            throw ConfigError(std::string(key) + " has the wrong length");
        }
        for (std::size_t i = 0; i < j.size(); ++i) {
            mask[i] = j[i].get<bool>();
        }
    }
    return mask;
}

Matrix diag_or_identity(const nlohmann::json& config, const char* key, Eigen::Index n) {
    if (!config.contains(key)) {
        return Matrix::Identity(n, n);
    }
    const Vector d = vector_from_json(config.at(key));
    if (d.size() != n) {
        throw ConfigError(std::string(key) + " has the wrong length");
    }
    return d.asDiagonal();
}

}  // namespace

int EnvSpec::num_steps() const { return static_cast<int>(std::lround(duration / dt)); }

ProcessEnv::ProcessEnv(EnvSpec spec, DynamicsFn dynamics) : spec_(std::move(spec)), dynamics_(std::move(dynamics)) {
    const auto n = spec_.n_states();
    const auto m = spec_.n_inputs();
    if (spec_.state_box.size() != n || spec_.reset_box.size() != n || spec_.input_box.size() != m) {
        throw ConfigError(spec_.name + ": box dimensions do not match setpoint/steady input");
    }
    if (!((spec_.input_box.upper - spec_.input_box.lower).array() > 0.0).all() ||
        !((spec_.state_box.upper - spec_.state_box.lower).array() > 0.0).all()) {
        throw ConfigError(spec_.name + ": boxes must have positive width");
    }
    if (!spec_.state_box.contains(spec_.setpoint)) {
        throw ConfigError(spec_.name + ": setpoint lies outside the state box");
    }
    if (!(spec_.dt > 0.0) || spec_.duration < spec_.dt || spec_.substeps < 1) {
        throw ConfigError(spec_.name + ": need dt > 0, duration >= dt, substeps >= 1");
    }
    if (spec_.Q_w.rows() != n || spec_.Q_w.cols() != n || spec_.R.rows() != m || spec_.R.cols() != m) {
        throw ConfigError(spec_.name + ": cost weight dimensions do not match");
    }
    for (int idx : spec_.tracked_states) {
        if (idx < 0 || idx >= n) {
            throw ConfigError(spec_.name + ": tracked state index out of range");
        }
    }
    state_scale_ = spec_.state_box.width();
    input_scale_ = spec_.input_box.width();
}

Vector ProcessEnv::propagate(const Vector& x, const Vector& u) const {
    const double h = spec_.dt / spec_.substeps;
    Vector xn = x;
    for (int k = 0; k < spec_.substeps; ++k) {
        xn = numerics::rk4_step(dynamics_, xn, u, h);
        if (spec_.nonnegative_states) {
            xn = xn.cwiseMax(0.0);
        }
    }
    return xn;
}

StepResult ProcessEnv::step(const Vector& x, const Vector& u, std::optional<std::uint64_t> noise_seed) const {
    StepResult result;
    const Vector uc = spec_.input_box.clamp(u);
    try {
        result.x = propagate(x, uc);
    } catch (const DomainError& e) {
        result.x = x;
        result.infeasible = true;
        result.reason = e.what();
        return result;
    } catch (const IntegrationError& e) {
        result.x = x;
        result.infeasible = true;
        result.reason = e.what();
        return result;
    }
    if (noise_seed && spec_.noise_std > 0.0) {
        Rng rng(*noise_seed);
        for (Eigen::Index i = 0; i < result.x.size(); ++i) {
            result.x[i] += spec_.noise_std * state_scale_[i] * rng.normal();
        }
    }
    if (!result.x.allFinite()) {
        result.infeasible = true;
        result.reason = "non-finite state";
    } else if (!spec_.state_box.contains(result.x, spec_.infeasibility_margin)) {
        result.infeasible = true;
        result.reason = "state left the operating box (infeasible operating point)";
    }
    return result;
}

double ProcessEnv::stage_cost(const Vector& x, const Vector& u) const {
    const Vector z = normalize_state(x);
    const Vector v = normalize_input(u);
    return z.dot(spec_.Q_w * z) + v.dot(spec_.R * v);
}

Vector ProcessEnv::reset(std::uint64_t seed) const {
    Rng rng(derive_seed(seed, kResetStream));
    Vector x(n_states());
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        x[i] = rng.uniform(spec_.reset_box.lower[i], spec_.reset_box.upper[i]);
    }
    return x;
}

Vector ProcessEnv::normalize_state(const Vector& x) const {
    return (x - spec_.setpoint).cwiseQuotient(state_scale_);
}
Vector ProcessEnv::denormalize_state(const Vector& z) const {
    return spec_.setpoint + z.cwiseProduct(state_scale_);
}
Vector ProcessEnv::normalize_input(const Vector& u) const {
    return (u - spec_.steady_input).cwiseQuotient(input_scale_);
}
Vector ProcessEnv::denormalize_input(const Vector& v) const {
    return spec_.steady_input + v.cwiseProduct(input_scale_);
}
Box ProcessEnv::normalized_state_box() const {
    return {normalize_state(spec_.state_box.lower), normalize_state(spec_.state_box.upper)};
}
Box ProcessEnv::normalized_input_box() const {
    return {normalize_input(spec_.input_box.lower), normalize_input(spec_.input_box.upper)};
}

SteadyState solve_steady_state(const DynamicsFn& f, const Vector& x_guess, const std::vector<bool>& x_fixed,
                               const Vector& u_guess, const std::vector<bool>& u_fixed, const Vector& x_scale,
                               const Vector& u_scale) {
    std::vector<Eigen::Index> free_x;
    std::vector<Eigen::Index> free_u;
    for (Eigen::Index i = 0; i < x_guess.size(); ++i) {
        if (!x_fixed[static_cast<std::size_t>(i)]) {
            free_x.push_back(i);
        }
    }
    for (Eigen::Index j = 0; j < u_guess.size(); ++j) {
        if (!u_fixed[static_cast<std::size_t>(j)]) {
            free_u.push_back(j);
        }
    }
    const auto nfx = static_cast<Eigen::Index>(free_x.size());
    const auto nfu = static_cast<Eigen::Index>(free_u.size());

    SteadyState ss{x_guess, u_guess, 0.0};
    for (int it = 0; it < 200; ++it) {
        const Vector r = f(ss.x, ss.u);
        ss.residual = r.norm();
        if (ss.residual < 1e-13) {
            break;
        }
        const auto J = numerics::jacobian_fd(f, ss.x, ss.u);
        Matrix Jy(r.size(), nfx + nfu);
        for (Eigen::Index k = 0; k < nfx; ++k) {
            const auto i = free_x[static_cast<std::size_t>(k)];
            Jy.col(k) = J.A.col(i) * x_scale[i];
        }
        for (Eigen::Index k = 0; k < nfu; ++k) {
            const auto j = free_u[static_cast<std::size_t>(k)];
            Jy.col(nfx + k) = J.B.col(j) * u_scale[j];
        }
        const Vector dy = Jy.completeOrthogonalDecomposition().solve(-r);
        // damped step keeps iterates away from model singularities (e.g. sqrt(0))
        double alpha = 1.0;
        for (int ls = 0; ls < 30; ++ls) {
            SteadyState trial = ss;
            for (Eigen::Index k = 0; k < nfx; ++k) {
                const auto i = free_x[static_cast<std::size_t>(k)];
                trial.x[i] += alpha * dy[k] * x_scale[i];
            }
            for (Eigen::Index k = 0; k < nfu; ++k) {
                const auto j = free_u[static_cast<std::size_t>(k)];
                trial.u[j] += alpha * dy[nfx + k] * u_scale[j];
            }
            bool ok = true;
            double trial_res = 0.0;
            try {
                const Vector rt = f(trial.x, trial.u);
                trial_res = rt.norm();
                ok = rt.allFinite() && trial_res < ss.residual;
            } catch (const DomainError&) {
                ok = false;
            }
            if (ok || ls == 29) {
                ss.x = trial.x;
                ss.u = trial.u;
                break;
            }
            alpha *= 0.5;
        }
    }
    ss.residual = f(ss.x, ss.u).norm();
    if (!(ss.residual < 1e-10)) {
        throw NumericalError("solve_steady_state: residual " + std::to_string(ss.residual) + " above 1e-10");
    }
    return ss;
}

DynamicsFn make_dynamics(const std::string& model, const nlohmann::json& params) {
    if (model == "cstr") {
        CstrParams p;
        p.q = param(params, "q", p.q);
        p.V = param(params, "V", p.V);
        p.C_Af = param(params, "C_Af", p.C_Af);
        p.T_f = param(params, "T_f", p.T_f);
        p.rho = param(params, "rho", p.rho);
        p.C_p = param(params, "C_p", p.C_p);
        p.dH_R = param(params, "dH_R", p.dH_R);
        p.E_over_R = param(params, "E_over_R", p.E_over_R);
        p.k0 = param(params, "k0", p.k0);
        p.UA = param(params, "UA", p.UA);
        return [p](const Vector& x, const Vector& u) { return cstr_dynamics(x, u, p); };
    }
    if (model == "four_tank") {
        FourTankParams p;
        const char* a_keys[4] = {"a1", "a2", "a3", "a4"};
        const char* A_keys[4] = {"A1", "A2", "A3", "A4"};
        for (int i = 0; i < 4; ++i) {
            p.a[i] = param(params, a_keys[i], p.a[i]);
            p.A[i] = param(params, A_keys[i], p.A[i]);
        }
        p.g_a = param(params, "g_a", p.g_a);
        p.gamma1 = param(params, "gamma1", p.gamma1);
        p.gamma2 = param(params, "gamma2", p.gamma2);
        p.k1 = param(params, "k1", p.k1);
        p.k2 = param(params, "k2", p.k2);
        if (!(p.gamma1 > 0.0 && p.gamma1 < 1.0 && p.gamma2 > 0.0 && p.gamma2 < 1.0)) {
            throw ConfigError("four_tank: valve splits must lie in (0, 1)");
        }
        return [p](const Vector& x, const Vector& u) { return fourtank_dynamics(x, u, p); };
    }
    if (model == "extraction_column") {
        ExtractionParams p;
        p.V_l = param(params, "V_l", p.V_l);
        p.V_g = param(params, "V_g", p.V_g);
        p.K_la = param(params, "K_la", p.K_la);
        p.m = param(params, "m", p.m);
        p.e = param(params, "e", p.e);
        p.C_X_feed = param(params, "C_X_feed", p.C_X_feed);
        p.C_Y_feed = param(params, "C_Y_feed", p.C_Y_feed);
        if (!(p.V_l > 0.0 && p.V_g > 0.0 && p.K_la >= 0.0 && p.m > 0.0)) {
            throw ConfigError("extraction_column: holdups and m must be positive, K_la nonnegative");
        }
        return [p](const Vector& x, const Vector& u) { return extraction_dynamics(x, u, p); };
    }
    if (model == "linear") {
        const Matrix A = matrix_from_json(require(params, "A"));
        const Matrix B = matrix_from_json(require(params, "B"));
        const Vector x_ref = params.contains("x_ref") ? vector_from_json(params.at("x_ref")) : Vector::Zero(A.rows());
        const Vector u_ref = params.contains("u_ref") ? vector_from_json(params.at("u_ref")) : Vector::Zero(B.cols());
        return [A, B, x_ref, u_ref](const Vector& x, const Vector& u) {
            return Vector(A * (x - x_ref) + B * (u - u_ref));
        };
    }
    throw ConfigError("unknown environment model '" + model + "'");
}

ProcessEnv make_env(const nlohmann::json& config) {
    EnvSpec spec;
    spec.name = config.value("name", require(config, "model").get<std::string>());
    const std::string model = require(config, "model").get<std::string>();
    const nlohmann::json params = config.value("params", nlohmann::json::object());
    DynamicsFn f = make_dynamics(model, params);

    spec.state_box = box_from_json(require(config, "state_box"));
    spec.input_box = box_from_json(require(config, "input_box"));
    spec.reset_box = box_from_json(require(config, "reset_box"));
    const auto n = spec.state_box.size();
    const auto m = spec.input_box.size();
    spec.state_names = config.value("state_names", std::vector<std::string>{});
    spec.input_names = config.value("input_names", std::vector<std::string>{});
    for (Eigen::Index i = static_cast<Eigen::Index>(spec.state_names.size()); i < n; ++i) {
        spec.state_names.push_back("x" + std::to_string(i + 1));
    }
    for (Eigen::Index j = static_cast<Eigen::Index>(spec.input_names.size()); j < m; ++j) {
        spec.input_names.push_back("u" + std::to_string(j + 1));
    }

    const Vector x_guess = vector_from_json(require(config, "setpoint"));
    const Vector u_guess = config.contains("steady_input_guess") ? vector_from_json(config.at("steady_input_guess"))
                                                                 : spec.input_box.center();
    if (x_guess.size() != n || u_guess.size() != m) {
        throw ConfigError(spec.name + ": setpoint/steady input length mismatch");
    }
    const auto x_fixed = mask_from_json(config, "setpoint_fixed", n, true);
    const auto u_fixed = mask_from_json(config, "steady_input_fixed", m, false);
    const auto ss = solve_steady_state(f, x_guess, x_fixed, u_guess, u_fixed, spec.state_box.width(),
                                       spec.input_box.width());
    spec.setpoint = ss.x;
    spec.steady_input = ss.u;
    if (!spec.input_box.contains(spec.steady_input)) {
        throw ConfigError(spec.name + ": steady input lies outside the input box");
    }

    spec.dt = require(config, "dt").get<double>();
    spec.duration = require(config, "duration").get<double>();
    spec.substeps = config.value("substeps", 10);
    spec.noise_std = config.value("noise_std", 0.0);
    spec.infeasibility_margin = config.value("infeasibility_margin", 0.0);
    spec.nonnegative_states = config.value("nonnegative_states", false);
    spec.Q_w = diag_or_identity(config, "Q_w_diag", n);
    spec.R = diag_or_identity(config, "R_diag", m);
    if (config.contains("tracked_states")) {
        spec.tracked_states = config.at("tracked_states").get<std::vector<int>>();
    } else {
        for (int i = 0; i < n; ++i) {
            spec.tracked_states.push_back(i);
        }
    }
    spec.seed = config.value("seed", std::uint64_t{0});
    return ProcessEnv(std::move(spec), std::move(f));
}

ProcessEnv load_env(const std::string& path) { return make_env(read_json_file(path)); }

}  // namespace yannrl::envs
