#include <doctest.h>

#include <cmath>
#include <fstream>
#include <sstream>

#include "yannrl/bench/metrics.hpp"
#include "yannrl/explicit_mpc/pwa_law.hpp"
#include "yannrl/numerics/json_io.hpp"
#include "yannrl/rl/ddpg.hpp"
#include "yannrl/yann/yann.hpp"

using namespace yannrl;
using namespace yannrl::rl;

namespace {

std::string config(const std::string& name) { return std::string(YANNRL_CONFIG_DIR) + "/envs/" + name + ".json"; }

/// v = theta, independent of the state.
class ConstantActor final : public nets::ActorModel {
public:
    ConstantActor(Eigen::Index n, Vector theta) : n_(n), theta_(std::move(theta)) {}
    Eigen::Index state_size() const override { return n_; }
    Eigen::Index input_size() const override { return theta_.size(); }
    Matrix act_batch(const Matrix& Z) const override { return theta_.replicate(1, Z.cols()); }
    void backward_batch(const Matrix&, const Matrix& cot, Vector& g) const override { g += cot.rowwise().sum(); }
    Vector& parameters() override { return theta_; }
    const Vector& parameters() const override { return theta_; }
    std::unique_ptr<nets::ActorModel> clone() const override { return std::make_unique<ConstantActor>(*this); }
    nlohmann::json to_json() const override { return {}; }

private:
    Eigen::Index n_;
    Vector theta_;
};

/// Q = |v - target|^2 + slope'v, no trainable parameters.
class FixedCritic final : public nets::CriticModel {
public:
    FixedCritic(Eigen::Index n, Vector target, Vector slope) : n_(n), target_(std::move(target)), slope_(std::move(slope)) {}
    Eigen::Index state_size() const override { return n_; }
    Eigen::Index input_size() const override { return target_.size(); }
    Vector value_batch(const Matrix&, const Matrix& V) const override {
        return (V.colwise() - target_).colwise().squaredNorm().transpose() + V.transpose() * slope_;
    }
    Matrix backward_batch(const Matrix&, const Matrix& V, const Vector& cot, Vector*) const override {
        return ((2.0 * (V.colwise() - target_)).colwise() + slope_) * cot.asDiagonal();
    }
    Vector& parameters() override { return empty_; }
    const Vector& parameters() const override { return empty_; }
    std::unique_ptr<nets::CriticModel> clone() const override { return std::make_unique<FixedCritic>(*this); }
    nlohmann::json to_json() const override { return {}; }

private:
    Eigen::Index n_;
    Vector target_;
    Vector slope_;
    Vector empty_;
};

nets::VanillaCritic linear_critic(Eigen::Index n, Eigen::Index m, std::uint64_t seed) {
    nets::MlpSpec spec;
    spec.hidden = {};
    spec.seed = seed;
    return {n, m, spec};
}

Transition transition(const Vector& z, const Vector& v, double cost, const Vector& zn, bool terminal) {
    return {z, v, cost, zn, terminal};
}

struct CstrSetup {
    envs::ProcessEnv env;
    explicit_mpc::MpcFormulation formulation;
    explicit_mpc::PwaLaw law;
};

CstrSetup cstr_setup() {
    auto env = envs::load_env(config("cstr"));
    auto f = explicit_mpc::formulation_from_env(env, read_json_file(config("cstr")).at("control"));
    auto law = explicit_mpc::solve_formulation(f);
    return {std::move(env), std::move(f), std::move(law)};
}

nets::MlpSpec small_spec(std::uint64_t seed) {
    nets::MlpSpec spec;
    spec.hidden = {32, 32};
    spec.seed = seed;
    return spec;
}

}  // namespace

TEST_CASE("soft_update: endpoints and midpoint") {
    Vector target = Vector::Zero(3);
    const Vector online = Vector::Constant(3, 2.0);
    soft_update(target, online, 0.5);
    CHECK((target.array() == 1.0).all());
    Vector unchanged = Vector::Constant(3, 5.0);
    soft_update(unchanged, online, 0.0);
    CHECK((unchanged.array() == 5.0).all());
    soft_update(target, online, 1.0);
    CHECK((target.array() == online.array()).all());
    Vector fixed = online;
    soft_update(fixed, online, 0.3);
    CHECK((fixed - online).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("replay buffer: ring capacity and deterministic, uniform sampling") {
    ReplayBuffer buffer(100, 7);
    for (int i = 0; i < 150; ++i) {
        buffer.push(transition(Vector::Constant(1, i), Vector::Zero(1), 0.0, Vector::Zero(1), false));
    }
    CHECK(buffer.size() == 100);
    CHECK(buffer.at(0).z[0] == 100.0);
    CHECK(buffer.at(49).z[0] == 149.0);
    CHECK(buffer.at(50).z[0] == 50.0);

    ReplayBuffer a(100, 11);
    ReplayBuffer b(100, 11);
    for (int i = 0; i < 100; ++i) {
        a.push(transition(Vector::Constant(1, i), Vector::Zero(1), 0.0, Vector::Zero(1), false));
        b.push(transition(Vector::Constant(1, i), Vector::Zero(1), 0.0, Vector::Zero(1), false));
    }
    CHECK(a.sample_indices(500) == b.sample_indices(500));

    std::vector<double> counts(100, 0.0);
    const int draws = 100000;
    for (auto i : a.sample_indices(draws)) {
        counts[i] += 1.0;
    }
    double chi2 = 0.0;
    const double expected = draws / 100.0;
    for (double c : counts) {
        CHECK(c > 0.0);
        chi2 += (c - expected) * (c - expected) / expected;
    }
    CHECK(chi2 < 148.23);  // 99 degrees of freedom, p = 0.001
}

TEST_CASE("critic_update: consistent critic is a fixed point") {
    const auto setup = cstr_setup();
    auto critic = yann::build_yann_critic(setup.formulation, small_spec(1));
    const yann::ExplicitMpcPolicy policy(setup.law, setup.formulation.input_box);
    Rng rng(3);
    std::vector<Transition> items;
    for (int i = 0; i < 16; ++i) {
        Vector z(2);
        Vector zn(2);
        Vector v(1);
        z << rng.uniform(-0.3, 0.3), rng.uniform(-0.3, 0.3);
        zn << rng.uniform(-0.3, 0.3), rng.uniform(-0.3, 0.3);
        v << rng.uniform(-0.2, 0.2);
        const double y_target = critic.value(z, v) - 0.99 * critic.value(zn, policy.act(zn));
        items.push_back(transition(z, v, y_target, zn, false));
    }
    const Batch batch = make_batch(items);
    const Vector before = critic.parameters();
    nets::AdamConfig cfg;
    nets::Adam opt(critic.parameters().size(), cfg);
    const double loss = critic_update(critic, policy, critic, batch, 0.99, opt);
    CHECK(loss < 1e-20);
    CHECK((critic.parameters() - before).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("critic_update: single terminal transition matches a hand Adam step") {
    auto critic = linear_critic(2, 1, 5);
    const auto target = critic;
    const ConstantActor target_actor(2, Vector::Constant(1, 0.7));
    Vector z(2);
    z << 0.4, -0.1;
    const Vector v = Vector::Constant(1, 0.25);
    const Batch batch = make_batch({transition(z, v, 2.0, Vector::Constant(2, 9.0), true)});
    const Vector theta = critic.parameters();
    const double q = theta[0] * z[0] + theta[1] * z[1] + theta[2] * v[0] + theta[3];
    const double y = 2.0;  // bootstrap masked
    Vector g(4);
    g << 2 * (q - y) * z[0], 2 * (q - y) * z[1], 2 * (q - y) * v[0], 2 * (q - y);
    nets::AdamConfig cfg;
    cfg.lr = 0.01;
    nets::Adam opt(4, cfg);
    const double loss = critic_update(critic, target_actor, target, batch, 0.99, opt);
    CHECK(loss == doctest::Approx((q - y) * (q - y)).epsilon(1e-14));
    for (int i = 0; i < 4; ++i) {
        const double m = (1 - cfg.beta1) * g[i] / (1 - cfg.beta1);
        const double s = (1 - cfg.beta2) * g[i] * g[i] / (1 - cfg.beta2);
        const double expected = theta[i] - cfg.lr * m / (std::sqrt(s) + cfg.eps);
        CHECK(std::abs(critic.parameters()[i] - expected) < 1e-10);
    }
}

TEST_CASE("actor_update: constant critic gives no gradient") {
    ConstantActor actor(2, Vector::Constant(1, 0.3));
    nets::VanillaCritic critic = linear_critic(2, 1, 1);
    critic.parameters().setZero();
    critic.parameters()[3] = 4.0;
    const Batch batch = make_batch({transition(Vector::Ones(2), Vector::Zero(1), 0.0, Vector::Zero(2), false)});
    nets::Adam opt(1, nets::AdamConfig{});
    CHECK(actor_update(actor, critic, batch, opt) == doctest::Approx(4.0));
    CHECK(actor.parameters()[0] == 0.3);
}

TEST_CASE("actor_update: quadratic critic drives the action to its minimizer") {
    ConstantActor actor(1, Vector::Constant(1, -0.8));
    const FixedCritic critic(1, Vector::Constant(1, 0.35), Vector::Zero(1));
    std::vector<Transition> items(8, transition(Vector::Zero(1), Vector::Zero(1), 0.0, Vector::Zero(1), false));
    const Batch batch = make_batch(items);
    nets::AdamConfig cfg;
    cfg.lr = 0.01;
    nets::Adam opt(1, cfg);
    double previous = std::abs(actor.parameters()[0] - 0.35);
    for (int i = 0; i < 100; ++i) {
        (void)actor_update(actor, critic, batch, opt);
        const double d = std::abs(actor.parameters()[0] - 0.35);
        CHECK(d < previous);
        previous = d;
    }
    for (int i = 0; i < 2000; ++i) {
        (void)actor_update(actor, critic, batch, opt);
    }
    CHECK(std::abs(actor.parameters()[0] - 0.35) < 1e-3);
}

TEST_CASE("actor_update: saturated YANN output ignores outward pressure") {
    const auto setup = cstr_setup();
    auto actor = yann::build_yann_actor(setup.law, small_spec(2), setup.formulation.input_box);
    Rng rng(4);
    Vector z;
    for (int i = 0; i < 100000; ++i) {
        const Vector c = (Vector(2) << rng.uniform(-0.5, 0.4), rng.uniform(-0.45, 0.5)).finished();
        if (actor.act(c)[0] == setup.formulation.input_box.upper[0]) {
            z = c;
            break;
        }
    }
    REQUIRE(z.size() == 2);
    // Q decreasing in v: descent wants v above its upper bound
    const FixedCritic push_out(2, Vector::Zero(1), Vector::Constant(1, -1.0));
    const auto before = actor.parameters();
    nets::Adam opt(actor.parameters().size(), nets::AdamConfig{});
    (void)actor_update(actor, push_out, make_batch({transition(z, Vector::Zero(1), 0.0, z, false)}), opt);
    CHECK((actor.parameters() - before).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("train_ddpg: zero episodes leave the networks untouched") {
    const auto setup = cstr_setup();
    auto actor = std::make_unique<yann::YannActor>(
        yann::build_yann_actor(setup.law, small_spec(3), setup.formulation.input_box));
    auto critic = std::make_unique<yann::YannCritic>(yann::build_yann_critic(setup.formulation, small_spec(4)));
    const Vector a0 = actor->parameters();
    const Vector c0 = critic->parameters();
    TrainConfig cfg;
    cfg.episodes = 0;
    const auto result = train_ddpg(setup.env, std::move(actor), std::move(critic), cfg);
    CHECK(result.log.empty());
    CHECK((result.actor->parameters().array() == a0.array()).all());
    CHECK((result.critic->parameters().array() == c0.array()).all());
}

TEST_CASE("train_ddpg: yann mode without learning reproduces the explicit MPC closed loop") {
    const auto setup = cstr_setup();
    TrainConfig cfg;
    cfg.episodes = 3;
    cfg.actor_lr = 0.0;
    cfg.critic_lr = 0.0;
    cfg.batch_size = 8;
    cfg.seed = 21;
    auto result = train_ddpg(
        setup.env,
        std::make_unique<yann::YannActor>(yann::build_yann_actor(setup.law, small_spec(5), setup.formulation.input_box)),
        std::make_unique<yann::YannCritic>(yann::build_yann_critic(setup.formulation, small_spec(6))), cfg);
    CHECK(result.updates > 0);
    const yann::ExplicitMpcPolicy mpc(setup.law, setup.formulation.input_box);
    const int steps = setup.env.spec().num_steps();
    for (int ep = 0; ep < 3; ++ep) {
        const Vector x0 = setup.env.reset(episode_seed(cfg.seed, ep));
        const auto reference = evaluate_policy(setup.env, mpc, x0, steps);
        const auto trained = evaluate_policy(setup.env, *result.actor, x0, steps);
        REQUIRE(trained.rollout.trajectory.size() == reference.rollout.trajectory.size());
        for (std::size_t k = 0; k < reference.rollout.trajectory.size(); ++k) {
            CHECK((trained.rollout.trajectory.x[k].array() == reference.rollout.trajectory.x[k].array()).all());
            CHECK((trained.rollout.trajectory.u[k].array() == reference.rollout.trajectory.u[k].array()).all());
        }
        CHECK(result.log[static_cast<std::size_t>(ep)].metrics.cum_cost == reference.metrics.cum_cost);
        CHECK(result.log[static_cast<std::size_t>(ep)].metrics.ise == reference.metrics.ise);
    }
}

TEST_CASE("train_ddpg: identical configuration gives identical logs") {
    const auto setup = cstr_setup();
    const auto run = [&] {
        TrainConfig cfg;
        cfg.mode = Mode::Vanilla;
        cfg.episodes = 3;
        cfg.batch_size = 16;
        cfg.seed = 8;
        const auto n = setup.env.n_states();
        const auto m = setup.env.n_inputs();
        auto result = train_ddpg(setup.env,
                                 std::make_unique<nets::VanillaActor>(n, setup.env.normalized_input_box(), small_spec(9)),
                                 std::make_unique<nets::VanillaCritic>(n, m, small_spec(10)), cfg);
        write_episode_log("episode_log.csv", result.log);
        std::ifstream in("episode_log.csv");
        std::stringstream ss;
        ss << in.rdbuf();
        return std::make_pair(ss.str(), Vector(result.actor->parameters()));
    };
    const auto a = run();
    const auto b = run();
    CHECK(a.first == b.first);
    CHECK((a.second.array() == b.second.array()).all());
    CHECK(a.first.rfind("episode,cum_cost,ise,itae,ess,infeasible,wall_ms\n", 0) == 0);
}

TEST_CASE("train_ddpg: CSTR yann training does not degrade the initial policy") {
    const auto setup = cstr_setup();
    TrainConfig cfg;
    cfg.episodes = 25;
    cfg.seed = 1;
    auto result = train_ddpg(
        setup.env,
        std::make_unique<yann::YannActor>(yann::build_yann_actor(setup.law, small_spec(7), setup.formulation.input_box)),
        std::make_unique<yann::YannCritic>(yann::build_yann_critic(setup.formulation, small_spec(8))), cfg);
    REQUIRE(result.log.size() == 25);
    const Vector x0 = setup.env.reset(episode_seed(cfg.seed, 0));
    const auto after = evaluate_policy(setup.env, *result.actor, x0, setup.env.spec().num_steps());
    const double first = result.log.front().metrics.cum_cost;
    MESSAGE("first episode cost " << first << ", trained policy from the same start " << after.metrics.cum_cost);
    CHECK(after.metrics.cum_cost <= 1.05 * first);
    for (const auto& r : result.log) {
        CHECK_FALSE(r.infeasible);
    }
}

TEST_CASE("evaluate_policy: steady input at the setpoint stays put") {
    const auto env = envs::load_env(config("cstr"));
    const ConstantActor hold(2, Vector::Zero(1));
    const auto e = evaluate_policy(env, hold, env.spec().setpoint, env.spec().num_steps());
    CHECK_FALSE(e.rollout.infeasible);
    CHECK(e.metrics.ise < 1e-12);
    CHECK(e.metrics.cum_cost < 1e-10);
}
