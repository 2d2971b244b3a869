// Acceptance checks: one PASS/FAIL line per criterion.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include <CLI11.hpp>

#include "yannrl/bench/experiment.hpp"
#include "yannrl/envs/process_env.hpp"
#include "yannrl/explicit_mpc/condense.hpp"
#include "yannrl/explicit_mpc/pwa_law.hpp"
#include "yannrl/nets/models.hpp"
#include "yannrl/nmpc/nmpc.hpp"
#include "yannrl/numerics/json_io.hpp"
#include "yannrl/numerics/ode.hpp"
#include "yannrl/numerics/qp.hpp"
#include "yannrl/numerics/random.hpp"
#include "yannrl/numerics/riccati.hpp"
#include "yannrl/rl/ddpg.hpp"
#include "yannrl/yann/yann.hpp"

using namespace yannrl;
namespace fs = std::filesystem;

namespace {

const std::vector<std::string> kEnvs{"cstr", "four_tank", "extraction_column"};

std::string env_path(const std::string& name) { return std::string(YANNRL_CONFIG_DIR) + "/envs/" + name + ".json"; }
std::string experiment_path(const std::string& name) {
    return std::string(YANNRL_CONFIG_DIR) + "/experiments/" + name + ".json";
}

std::string fmt(const char* f, ...) {
    char buf[512];
    va_list args;
    va_start(args, f);
    std::vsnprintf(buf, sizeof buf, f, args);
    va_end(args);
    return buf;
}

struct Outcome {
    bool pass = false;
    std::string detail;
};

struct Problem {
    envs::ProcessEnv env;
    explicit_mpc::MpcFormulation f;
    explicit_mpc::PwaLaw law;
};

Problem load_problem(const std::string& name) {
    auto env = envs::load_env(env_path(name));
    auto f = explicit_mpc::formulation_from_env(env, read_json_file(env_path(name)).at("control"));
    auto law = explicit_mpc::solve_formulation(f);
    return {std::move(env), std::move(f), std::move(law)};
}

/// Laws are reused by several criteria; each is solved once.
const Problem& problem(const std::string& name) {
    static std::map<std::string, Problem> cache;
    auto it = cache.find(name);
    if (it == cache.end()) {
        it = cache.emplace(name, load_problem(name)).first;
    }
    return it->second;
}

Vector random_in(Rng& rng, const Box& box) {
    Vector v(box.size());
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        v[i] = rng.uniform(box.lower[i], box.upper[i]);
    }
    return v;
}

Box symmetric_box(Eigen::Index n, double half) { return {Vector::Constant(n, -half), Vector::Constant(n, half)}; }

nets::MlpSpec residual_spec(std::uint64_t seed) {
    nets::MlpSpec spec;
    spec.hidden = {64, 64};
    spec.seed = seed;
    return spec;
}

// 1. explicit law against the online QP
Outcome law_equivalence() {
    const auto start = std::chrono::steady_clock::now();
    double worst = 0.0;
    std::string detail;
    for (const auto& name : kEnvs) {
        const auto& p = problem(name);
        const auto v = explicit_mpc::validate_law(p.law, explicit_mpc::condense(p.f), p.f.domain, 10000, 1);
        worst = std::max(worst, v.max_deviation);
        detail += fmt("%s %zu regions %.2g; ", name.c_str(), p.law.regions.size(), v.max_deviation);
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return {worst <= 1e-6 && secs < 60.0, detail + fmt("max dev %.3g (<= 1e-6), %.1f s (< 60 s)", worst, secs)};
}

// 2. fresh networks equal the law and the quadratic critic
Outcome exact_initialization() {
    double actor_dev = 0.0;
    double critic_dev = 0.0;
    for (const auto& name : kEnvs) {
        const auto& p = problem(name);
        const Eigen::Index n = p.law.n;
        const Eigen::Index m = p.law.m;
        const auto actor = yann::build_yann_actor(p.law, residual_spec(3), p.f.input_box);
        const auto critic = yann::build_yann_critic(p.f, residual_spec(4));
        Rng rng(5);
        Matrix Z(n, 10000);
        Matrix V(m, 10000);
        for (Eigen::Index s = 0; s < Z.cols(); ++s) {
            Z.col(s) = random_in(rng, p.f.domain);
            V.col(s) = random_in(rng, p.f.input_box);
        }
        const Matrix out = actor.act_batch(Z);
        const Vector q = critic.value_batch(Z, V);
        for (Eigen::Index s = 0; s < Z.cols(); ++s) {
            const Vector z = Z.col(s);
            const auto law = explicit_mpc::evaluate_pwa(p.law, z);
            if (!law) {
                return {false, name + ": law undefined at a domain sample"};
            }
            actor_dev = std::max(actor_dev, (out.col(s) - p.f.input_box.clamp(*law)).cwiseAbs().maxCoeff());
            const Vector v = V.col(s);
            const Vector next = p.f.system.A * z + p.f.system.B * v;
            const double oracle = z.dot(p.f.Q * z) + v.dot(p.f.R * v) + p.f.gamma * next.dot(p.f.P * next);
            critic_dev = std::max(critic_dev, std::abs(q[s] - oracle) / std::max(1.0, std::abs(oracle)));
        }
    }
    return {actor_dev == 0.0 && critic_dev <= 1e-12,
            fmt("actor max dev %.3g (== 0), critic max rel dev %.3g (<= 1e-12), 1e4 samples per env", actor_dev,
                critic_dev)};
}

/// min_v [z;v]'M[z;v]
double quadratic_min(const Matrix& M, Eigen::Index n, const Vector& z) {
    const Eigen::Index m = M.rows() - n;
    const Matrix Mzu = M.topRightCorner(n, m);
    const Matrix Muu = M.bottomRightCorner(m, m);
    const Vector v = -Muu.ldlt().solve(Mzu.transpose() * z);
    return z.dot(M.topLeftCorner(n, n) * z) + 2.0 * z.dot(Mzu * v) + v.dot(Muu * v);
}

// 3. Bellman consistency of the initial critic, law = critic argmin
Outcome bellman_consistency() {
    double residual = 0.0;
    double argmin_dev = 0.0;
    int unconstrained = 0;
    for (const auto& name : kEnvs) {
        const auto& p = problem(name);
        const Eigen::Index n = p.law.n;
        const Eigen::Index m = p.law.m;
        const auto critic = yann::build_yann_critic(p.f, residual_spec(6));
        Rng rng(7);
        for (int i = 0; i < 100; ++i) {
            const Vector z = random_in(rng, p.f.domain);
            const Vector v = random_in(rng, p.f.input_box);
            const Vector next = p.f.system.A * z + p.f.system.B * v;
            const double rhs = z.dot(p.f.Q * z) + v.dot(p.f.R * v) + p.f.gamma * quadratic_min(critic.M(), n, next);
            residual = std::max(residual, std::abs(critic.value(z, v) - rhs));
        }
        const auto actor = yann::build_yann_actor(p.law, residual_spec(8), p.f.input_box);
        const Matrix Muu = critic.M().bottomRightCorner(m, m);
        const Matrix Muz = critic.M().bottomLeftCorner(m, n);
        int found = 0;
        for (int i = 0; i < 100000 && found < 100; ++i) {
            const Vector z = random_in(rng, p.f.domain);
            const int r = explicit_mpc::locate_region(p.law, z);
            if (r < 0 || !p.law.regions[static_cast<std::size_t>(r)].active_set.empty()) {
                continue;
            }
            ++found;
            const Vector argmin = -Muu.ldlt().solve(Muz * z);
            argmin_dev = std::max(argmin_dev, (actor.act(z) - argmin).cwiseAbs().maxCoeff());
        }
        if (found == 0) {
            return {false, name + ": no sample in the unconstrained region"};
        }
        unconstrained += found;
    }
    return {residual < 1e-8 && argmin_dev < 1e-8,
            fmt("Bellman residual %.3g (< 1e-8) at 100 points per env, argmin dev %.3g (< 1e-8) at %d "
                "unconstrained states",
                residual, argmin_dev, unconstrained)};
}

double rel_err(double g, double fd) { return std::abs(g - fd) / std::max({std::abs(g), std::abs(fd), 1e-3}); }

/// Central differences of `objective` along coordinate k of `x`.
double central(const std::function<double(const Vector&)>& objective, Vector x, Eigen::Index k, double h) {
    x[k] += h;
    const double up = objective(x);
    x[k] -= 2 * h;
    return (up - objective(x)) / (2 * h);
}

// 4. backward passes against finite differences
Outcome gradient_integrity() {
    constexpr int kCoords = 50;
    constexpr double h = 1e-5;
    std::string detail;
    double worst_all = 0.0;
    Rng rng(9);

    const auto report = [&](const std::string& arch, double worst) {
        detail += fmt("%s %.2g; ", arch.c_str(), worst);
        worst_all = std::max(worst_all, worst);
    };

    for (auto act : {nets::Activation::Tanh, nets::Activation::Relu, nets::Activation::Identity}) {
        nets::MlpSpec spec;
        spec.input = 4;
        spec.hidden = {16, 16};
        spec.output = 3;
        spec.hidden_activation = act;
        spec.seed = 10;
        const nets::Mlp net(spec);
        double worst = 0.0;
        for (int i = 0; i < kCoords; ++i) {
            const Vector x = random_in(rng, symmetric_box(4, 1.0));
            const Vector c = random_in(rng, symmetric_box(3, 1.0));
            const auto g = net.backward(x, c);
            const bool on_input = rng.below(4) == 0;
            if (on_input) {
                const auto k = static_cast<Eigen::Index>(rng.below(4));
                const auto f = [&](const Vector& xx) { return c.dot(net.forward(xx)); };
                worst = std::max(worst, rel_err(g.input[k], central(f, x, k, h)));
            } else {
                const auto k = static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(net.num_parameters())));
                const auto f = [&](const Vector& p) {
                    nets::Mlp probe = net;
                    probe.set_parameters(p);
                    return c.dot(probe.forward(x));
                };
                worst = std::max(worst, rel_err(g.parameters[k], central(f, net.parameters(), k, h)));
            }
        }
        report("mlp/" + nets::activation_name(act), worst);
    }

    const Box box{Vector::Constant(2, -0.3), Vector::Constant(2, 0.7)};
    nets::MlpSpec spec;
    spec.hidden = {16, 16};
    spec.seed = 11;
    {
        const nets::VanillaActor actor(3, box, spec);
        double worst = 0.0;
        for (int i = 0; i < kCoords; ++i) {
            const Vector z = random_in(rng, symmetric_box(3, 1.0));
            const Vector c = random_in(rng, symmetric_box(2, 1.0));
            Vector g = Vector::Zero(actor.parameters().size());
            actor.backward_batch(z, c, g);
            const auto k = static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(g.size())));
            const auto f = [&](const Vector& p) {
                auto probe = actor;
                probe.parameters() = p;
                return c.dot(probe.act(z));
            };
            worst = std::max(worst, rel_err(g[k], central(f, actor.parameters(), k, h)));
        }
        report("vanilla actor", worst);
    }

    const auto check_critic = [&](const nets::CriticModel& critic, const Box& zbox, const Box& vbox) {
        double worst = 0.0;
        const Eigen::Index m = critic.input_size();
        for (int i = 0; i < kCoords; ++i) {
            const Vector z = random_in(rng, zbox);
            const Vector v = random_in(rng, vbox);
            Vector pg = Vector::Zero(critic.parameters().size());
            const Vector dv = critic.backward_batch(z, v, Vector::Ones(1), &pg).col(0);
            if (rng.below(4) == 0) {
                const auto k = static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(m)));
                const auto f = [&](const Vector& vv) { return critic.value(z, vv); };
                worst = std::max(worst, rel_err(dv[k], central(f, v, k, h)));
            } else {
                const auto k = static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(pg.size())));
                const auto f = [&](const Vector& p) {
                    auto probe = critic.clone();
                    probe->parameters() = p;
                    return probe->value(z, v);
                };
                worst = std::max(worst, rel_err(pg[k], central(f, critic.parameters(), k, h)));
            }
        }
        return worst;
    };
    report("vanilla critic", check_critic(nets::VanillaCritic(3, 2, spec), symmetric_box(3, 1.0), box));

    const auto& p = problem("cstr");
    {
        auto critic = yann::build_yann_critic(p.f, residual_spec(12));
        for (Eigen::Index i = 0; i < critic.parameters().size(); ++i) {
            critic.parameters()[i] = rng.uniform(-0.3, 0.3);
        }
        report("yann critic", check_critic(critic, p.f.domain, p.f.input_box));
    }
    {
        auto actor = yann::build_yann_actor(p.law, residual_spec(13), p.f.input_box);
        const auto last = actor.residual().num_layers() - 1;
        for (Eigen::Index i = 0; i < actor.residual().weight(last).size(); ++i) {
            actor.residual().weight(last).data()[i] = rng.uniform(-0.01, 0.01);
        }
        double worst = 0.0;
        int done = 0;
        for (int i = 0; i < 100000 && done < kCoords; ++i) {
            const Vector z = random_in(rng, p.f.domain);
            const Vector v = actor.act(z);
            // the clamp is not differentiable at the bounds; stay clear of them
            if ((v - p.f.input_box.upper).maxCoeff() > -1e-3 || (p.f.input_box.lower - v).maxCoeff() > -1e-3) {
                continue;
            }
            ++done;
            const Vector c = random_in(rng, symmetric_box(actor.input_size(), 1.0));
            Vector g = Vector::Zero(actor.parameters().size());
            actor.backward_batch(z, c, g);
            const auto k = static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(g.size())));
            const auto f = [&](const Vector& q) {
                auto probe = actor;
                probe.parameters() = q;
                return c.dot(probe.act(z));
            };
            worst = std::max(worst, rel_err(g[k], central(f, actor.parameters(), k, h)));
        }
        if (done < kCoords) {
            return {false, "yann actor: too few interior samples"};
        }
        report("yann actor", worst);
    }
    return {worst_all < 1e-5,
            detail + fmt("max rel err %.3g (< 1e-5), %d coordinates per architecture", worst_all, kCoords)};
}

Matrix random_matrix(Rng& rng, Eigen::Index r, Eigen::Index c, double half) {
    Matrix M(r, c);
    for (Eigen::Index i = 0; i < M.size(); ++i) {
        M.data()[i] = rng.uniform(-half, half);
    }
    return M;
}

// 5. Riccati, zero-order hold and QP solver
Outcome numerical_kernels() {
    Rng rng(14);
    double dare = 0.0;
    double zoh = 0.0;
    double kkt = 0.0;
    int not_optimal = 0;
    for (int i = 0; i < 100; ++i) {
        const auto n = static_cast<Eigen::Index>(1 + rng.below(5));
        const auto m = static_cast<Eigen::Index>(1 + rng.below(3));
        const Matrix A = random_matrix(rng, n, n, 0.6);
        const Matrix B = random_matrix(rng, n, m, 1.0);
        const Matrix L = random_matrix(rng, n, n, 1.0);
        const Matrix Q = L * L.transpose() + 0.1 * Matrix::Identity(n, n);
        const Matrix R = Matrix::Identity(m, m);
        const double gamma = rng.uniform(0.9, 1.0);
        const auto sol = numerics::solve_dare(A, B, Q, R, gamma);
        dare = std::max(dare, numerics::dare_residual(A, B, Q, R, gamma, sol.P));
    }
    for (const auto& name : kEnvs) {
        const auto& f = problem(name).f;
        dare = std::max(dare, numerics::dare_residual(f.system.A, f.system.B, f.Q, f.R, f.gamma, f.P));
    }
    for (int i = 0; i < 100; ++i) {
        const auto n = static_cast<Eigen::Index>(1 + rng.below(5));
        const auto m = static_cast<Eigen::Index>(1 + rng.below(3));
        const Matrix Ac = random_matrix(rng, n, n, 1.0);
        const Matrix Bc = random_matrix(rng, n, m, 1.0);
        const double dt = rng.uniform(0.01, 1.0);
        // exp(M) exp(-M) = I and the semigroup law over two steps
        const Matrix E = numerics::expm(Ac * dt);
        zoh = std::max(zoh, (E * numerics::expm(-Ac * dt) - Matrix::Identity(n, n)).cwiseAbs().maxCoeff());
        const auto one = numerics::discretize_zoh(Ac, Bc, dt);
        const auto two = numerics::discretize_zoh(Ac, Bc, 2 * dt);
        zoh = std::max(zoh, (two.A - one.A * one.A).cwiseAbs().maxCoeff());
        zoh = std::max(zoh, (two.B - (one.A * one.B + one.B)).cwiseAbs().maxCoeff());
    }
    for (int i = 0; i < 100; ++i) {
        const auto n = static_cast<Eigen::Index>(2 + rng.below(7));
        const auto p = static_cast<Eigen::Index>(n + rng.below(static_cast<std::uint64_t>(2 * n + 1)));
        const Matrix L = random_matrix(rng, n, n, 1.0);
        numerics::Qp qp;
        qp.H = L * L.transpose() + 0.1 * Matrix::Identity(n, n);
        qp.f = random_matrix(rng, n, 1, 5.0);
        qp.G = random_matrix(rng, p, n, 1.0);
        const Vector u0 = random_matrix(rng, n, 1, 1.0);
        qp.w = qp.G * u0;
        for (Eigen::Index j = 0; j < p; ++j) {
            qp.w[j] += rng.uniform(0.0, 1.0);
        }
        const auto r = numerics::qp_solve(qp);
        if (r.status != numerics::QpStatus::Optimal) {
            ++not_optimal;
            continue;
        }
        kkt = std::max(kkt, numerics::kkt_residual(qp, r));
    }
    return {dare < 1e-10 && zoh < 1e-10 && kkt < 1e-8 && not_optimal == 0,
            fmt("DARE residual %.3g (< 1e-10), ZOH identity residual %.3g (< 1e-10), QP KKT residual %.3g "
                "(< 1e-8), %d of 100 feasible QPs not solved",
                dare, zoh, kkt, not_optimal)};
}

// 6. NMPC on a linear model is the online linear MPC
Outcome linear_nmpc() {
    const auto env = envs::load_env(env_path("linear"));
    const auto control = read_json_file(env_path("linear")).at("control");
    const auto f = explicit_mpc::formulation_from_env(env, control);
    const auto cfg = nmpc::config_from_formulation(f, control.value("nmpc", nlohmann::json::object()));
    const auto qp = explicit_mpc::condense(f);
    double worst = 0.0;
    int moves = 0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const auto r = nmpc::nmpc_rollout(env, cfg, env.reset(seed), env.spec().num_steps());
        const auto& traj = r.rollout.trajectory;
        for (std::size_t k = 0; k < traj.size(); ++k) {
            const auto v = explicit_mpc::online_mpc(qp, env.normalize_state(traj.x[k]));
            if (!v) {
                return {false, fmt("online QP infeasible on seed %llu", static_cast<unsigned long long>(seed))};
            }
            worst = std::max(worst, (env.normalize_input(traj.u[k]) - *v).cwiseAbs().maxCoeff());
            ++moves;
        }
    }
    return {worst <= 1e-8, fmt("max |v_nmpc - v_online| %.3g (<= 1e-8) over %d closed-loop moves", worst, moves)};
}

struct Study {
    bench::Report report;
    std::map<std::string, bench::SummaryRow> mean;
    std::map<std::string, int> training_infeasible;
};

Study run_study(const std::string& name, const fs::path& out) {
    auto cfg = bench::load_experiment(experiment_path(name));
    cfg.output_dir = out.string();
    Study s;
    s.report = bench::run_experiment(cfg);
    for (const auto& row : s.report.summary) {
        s.mean[row.controller] = row;
    }
    for (const auto& run : s.report.runs) {
        s.training_infeasible[run.controller] += run.training_infeasible;
    }
    return s;
}

const bench::Metrics& mean_of(const Study& s, const std::string& controller) {
    const auto it = s.mean.find(controller);
    if (it == s.mean.end()) {
        throw Error("study has no controller " + controller);
    }
    return it->second.mean;
}

// 7. CSTR ordering
Outcome cstr_study(const fs::path& out) {
    const auto s = run_study("cstr", out / "cstr");
    const auto& y = mean_of(s, "yann_ddpg");
    const auto& v = mean_of(s, "vanilla_ddpg");
    const auto& o = mean_of(s, "nmpc_oracle");
    const bool pass = y.ise <= 2.0 * o.ise && y.ise < v.ise && y.itae < v.itae && y.ess < v.ess &&
                      y.cum_cost < v.cum_cost;
    return {pass, fmt("ISE yann %.4g nmpc %.4g vanilla %.4g; ITAE %.4g vs %.4g; ess %.4g vs %.4g; cost %.4g vs %.4g",
                      y.ise, o.ise, v.ise, y.itae, v.itae, y.ess, v.ess, y.cum_cost, v.cum_cost)};
}

// 8. four-tank: no infeasibility during YANN training, lower steady-state error
Outcome four_tank_study(const fs::path& out) {
    const auto s = run_study("four_tank", out / "four_tank");
    const auto& y = mean_of(s, "yann_ddpg");
    const auto& v = mean_of(s, "vanilla_ddpg");
    const int yi = s.training_infeasible.at("yann_ddpg");
    const int vi = s.training_infeasible.at("vanilla_ddpg");
    return {yi == 0 && 2.0 * y.ess <= v.ess,
            fmt("training infeasibility events yann %d (== 0) vanilla %d; ess yann %.4g vanilla %.4g, ratio %.3g "
                "(>= 2)",
                yi, vi, y.ess, v.ess, v.ess / y.ess)};
}

// 9. extraction column: cost near NMPC and far below vanilla
Outcome column_study(const fs::path& out) {
    const auto s = run_study("extraction_column", out / "extraction_column");
    const auto& y = mean_of(s, "yann_ddpg");
    const auto& v = mean_of(s, "vanilla_ddpg");
    const auto& o = mean_of(s, "nmpc_oracle");
    return {y.cum_cost <= 2.0 * o.cum_cost && v.cum_cost >= 5.0 * y.cum_cost,
            fmt("cost yann %.4g nmpc %.4g vanilla %.4g; yann/nmpc %.3g (<= 2), vanilla/yann %.3g (>= 5)", y.cum_cost,
                o.cum_cost, v.cum_cost, y.cum_cost / o.cum_cost, v.cum_cost / y.cum_cost)};
}

bool same_trajectory(const envs::Trajectory& a, const envs::Trajectory& b) {
    if (a.size() != b.size()) {
        return false;
    }
    for (std::size_t k = 0; k < a.size(); ++k) {
        if (!(a.x[k].array() == b.x[k].array()).all() || !(a.u[k].array() == b.u[k].array()).all() ||
            a.cost[k] != b.cost[k]) {
            return false;
        }
    }
    return true;
}

// 10. zero learning rates reproduce the explicit MPC closed loop
Outcome zero_update() {
    constexpr int kEpisodes = 3;
    std::string detail;
    bool pass = true;
    for (const auto& name : kEnvs) {
        const auto& p = problem(name);
        rl::TrainConfig cfg;
        cfg.mode = rl::Mode::Yann;
        cfg.gamma = p.f.gamma;
        cfg.episodes = kEpisodes;
        cfg.actor_lr = 0.0;
        cfg.critic_lr = 0.0;
        cfg.seed = 15;
        auto result = rl::train_ddpg(
            p.env, std::make_unique<yann::YannActor>(yann::build_yann_actor(p.law, residual_spec(16), p.f.input_box)),
            std::make_unique<yann::YannCritic>(yann::build_yann_critic(p.f, residual_spec(17))), cfg);
        const yann::ExplicitMpcPolicy mpc(p.law, p.f.input_box);
        const int steps = p.env.spec().num_steps();
        int identical = 0;
        for (int ep = 0; ep < kEpisodes; ++ep) {
            const Vector x0 = p.env.reset(rl::episode_seed(cfg.seed, ep));
            const auto reference = rl::evaluate_policy(p.env, mpc, x0, steps);
            const auto trained = rl::evaluate_policy(p.env, *result.actor, x0, steps);
            const auto& logged = result.log[static_cast<std::size_t>(ep)].metrics;
            if (same_trajectory(trained.rollout.trajectory, reference.rollout.trajectory) &&
                logged.cum_cost == reference.metrics.cum_cost && logged.ise == reference.metrics.ise &&
                logged.itae == reference.metrics.itae && logged.ess == reference.metrics.ess) {
                ++identical;
            }
        }
        pass = pass && identical == kEpisodes && result.updates > 0;
        detail += fmt("%s %d/%d episodes identical after %ld updates; ", name.c_str(), identical, kEpisodes,
                      result.updates);
    }
    return {pass, detail + "bit-identical required"};
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// 11. identical configuration, identical report
Outcome determinism(const fs::path& out) {
    for (const char* tag : {"first", "second"}) {
        auto cfg = bench::load_experiment(experiment_path("cstr"));
        cfg.output_dir = (out / "rerun" / tag).string();
        (void)bench::run_experiment(cfg);
    }
    const std::string a = slurp(out / "rerun" / "first" / "report.csv");
    const std::string b = slurp(out / "rerun" / "second" / "report.csv");
    return {!a.empty() && a == b, fmt("cstr report.csv %zu bytes, reruns %s", a.size(),
                                      a == b ? "byte-identical" : "differ")};
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Acceptance criteria 1-11; one PASS/FAIL line each"};
    std::string out = "acceptance_runs";
    std::vector<int> only;
    std::vector<int> expected_failures;
    app.add_option("--out", out, "directory for experiment outputs");
    app.add_option("--only", only, "run only these criteria")->check(CLI::Range(1, 11));
    app.add_option("--known-failure", expected_failures,
                   "criteria whose failure is documented; exit status then requires exactly these to fail")
        ->check(CLI::Range(1, 11));
    CLI11_PARSE(app, argc, argv);

    const fs::path dir(out);
    const std::vector<std::pair<int, std::function<Outcome()>>> criteria{
        {1, law_equivalence},
        {2, exact_initialization},
        {3, bellman_consistency},
        {4, gradient_integrity},
        {5, numerical_kernels},
        {6, linear_nmpc},
        {7, [&] { return cstr_study(dir); }},
        {8, [&] { return four_tank_study(dir); }},
        {9, [&] { return column_study(dir); }},
        {10, zero_update},
        {11, [&] { return determinism(dir); }},
    };

    std::set<int> failed;
    for (const auto& [id, check] : criteria) {
        if (!only.empty() && std::find(only.begin(), only.end(), id) == only.end()) {
            continue;
        }
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = check();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        std::printf("criterion %2d: %s  %s [%.1f s]\n", id, o.pass ? "PASS" : "FAIL", o.detail.c_str(), secs);
        std::fflush(stdout);
        if (!o.pass) {
            failed.insert(id);
        }
    }
    const std::set<int> known(expected_failures.begin(), expected_failures.end());
    std::printf("%zu failed", failed.size());
    for (int id : failed) {
        std::printf(" %d%s", id, known.count(id) ? " (known)" : "");
    }
    std::printf("\n");
    for (int id : known) {
        if (!failed.count(id) && (only.empty() || std::find(only.begin(), only.end(), id) != only.end())) {
            std::printf("criterion %d was listed as a known failure but passed\n", id);
        }
    }
    std::set<int> known_in_scope;
    for (int id : known) {
        if (only.empty() || std::find(only.begin(), only.end(), id) != only.end()) {
            known_in_scope.insert(id);
        }
    }
    return failed == known_in_scope ? 0 : 1;
}
