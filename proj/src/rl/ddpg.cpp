#include "yannrl/rl/ddpg.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>

#include "yannrl/envs/trajectory.hpp"
#include "yannrl/numerics/errors.hpp"
#include "yannrl/numerics/json_io.hpp"

namespace yannrl::rl {

namespace {

constexpr std::uint64_t kNoiseStream = 1;
constexpr std::uint64_t kReplayStream = 2;
constexpr std::uint64_t kEpisodeStream = 1000;

}  // namespace

ReplayBuffer::ReplayBuffer(std::size_t capacity, std::uint64_t seed) : capacity_(capacity), rng_(seed) {
    if (capacity == 0) {
        throw Error("replay buffer capacity must be positive");
    }
    items_.reserve(std::min<std::size_t>(capacity, 1 << 16));
}

void ReplayBuffer::push(Transition t) {
    if (items_.size() < capacity_) {
        items_.push_back(std::move(t));
    } else {
        items_[next_] = std::move(t);
    }
    next_ = (next_ + 1) % capacity_;
}

std::vector<std::size_t> ReplayBuffer::sample_indices(std::size_t batch) {
    if (items_.empty()) {
        throw Error("cannot sample from an empty replay buffer");
    }
    std::vector<std::size_t> idx(batch);
    for (auto& i : idx) {
        i = static_cast<std::size_t>(rng_.below(items_.size()));
    }
    return idx;
}

Batch ReplayBuffer::sample(std::size_t batch) {
    std::vector<Transition> picked;
    picked.reserve(batch);
    for (auto i : sample_indices(batch)) {
        picked.push_back(items_[i]);
    }
    return make_batch(picked);
}

Batch make_batch(const std::vector<Transition>& items) {
    if (items.empty()) {
        throw Error("empty batch");
    }
    const auto n = items.front().z.size();
    const auto m = items.front().v.size();
    const auto B = static_cast<Eigen::Index>(items.size());
    Batch b{Matrix(n, B), Matrix(m, B), Vector(B), Matrix(n, B), std::vector<bool>(items.size())};
    for (Eigen::Index s = 0; s < B; ++s) {
        const auto& t = items[static_cast<std::size_t>(s)];
        b.Z.col(s) = t.z;
        b.V.col(s) = t.v;
        b.cost[s] = t.cost;
        b.Z_next.col(s) = t.z_next;
        b.terminal[static_cast<std::size_t>(s)] = t.terminal;
    }
    return b;
}

std::string mode_name(Mode m) { return m == Mode::Yann ? "yann" : "vanilla"; }

void TrainConfig::validate() const {
    if (!(gamma > 0.0 && gamma <= 1.0)) {
        throw ConfigError("gamma must lie in (0, 1]");
    }
    if (!(tau > 0.0 && tau <= 1.0)) {
        throw ConfigError("tau must lie in (0, 1]");
    }
    if (actor_lr < 0.0 || critic_lr < 0.0) {
        throw ConfigError("learning rates must be nonnegative");
    }
    if (batch_size == 0 || buffer_capacity == 0 || episodes < 0 || updates_per_step < 0) {
        throw ConfigError("batch size, buffer capacity, episodes and updates per step must be valid counts");
    }
    if (termination_cost && gamma >= 1.0) {
        throw ConfigError("termination cost needs gamma < 1");
    }
}

double critic_update(nets::CriticModel& critic, const nets::ActorModel& target_actor,
                     const nets::CriticModel& target_critic, const Batch& batch, double gamma, nets::Adam& opt) {
    const Eigen::Index B = batch.size();
    const Vector q_next = target_critic.value_batch(batch.Z_next, target_actor.act_batch(batch.Z_next));
    Vector y = batch.cost;
    for (Eigen::Index s = 0; s < B; ++s) {
        if (!batch.terminal[static_cast<std::size_t>(s)]) {
            y[s] += gamma * q_next[s];
        }
    }
    const Vector err = critic.value_batch(batch.Z, batch.V) - y;
    const double loss = err.squaredNorm() / static_cast<double>(B);
    Vector grad = Vector::Zero(critic.parameters().size());
    (void)critic.backward_batch(batch.Z, batch.V, (2.0 / static_cast<double>(B)) * err, &grad);
    opt.step(critic.parameters(), grad);
    return loss;
}

double actor_update(nets::ActorModel& actor, const nets::CriticModel& critic, const Batch& batch, nets::Adam& opt) {
    const Eigen::Index B = batch.size();
    const Matrix V = actor.act_batch(batch.Z);
    const double loss = critic.value_batch(batch.Z, V).mean();
    const Matrix dq_dv =
        critic.backward_batch(batch.Z, V, Vector::Constant(B, 1.0 / static_cast<double>(B)), nullptr);
    Vector grad = Vector::Zero(actor.parameters().size());
    actor.backward_batch(batch.Z, dq_dv, grad);
    opt.step(actor.parameters(), grad);
    return loss;
}

void soft_update(Vector& target, const Vector& online, double tau) {
    if (target.size() != online.size()) {
        throw DimensionError("soft update between differently shaped parameter vectors");
    }
    if (tau == 1.0) {
        target = online;
        return;
    }
    target = tau * online + (1.0 - tau) * target;
}

std::uint64_t episode_seed(std::uint64_t seed, int episode) {
    return derive_seed(seed, kEpisodeStream + static_cast<std::uint64_t>(episode));
}

TrainResult train_ddpg(const envs::ProcessEnv& env, std::unique_ptr<nets::ActorModel> actor,
                       std::unique_ptr<nets::CriticModel> critic, const TrainConfig& config) {
    config.validate();
    if (actor->state_size() != env.n_states() || actor->input_size() != env.n_inputs() ||
        critic->state_size() != env.n_states() || critic->input_size() != env.n_inputs()) {
        throw DimensionError("actor/critic do not match the environment");
    }
    TrainResult result;
    auto target_actor = actor->clone();
    auto target_critic = critic->clone();
    nets::AdamConfig actor_cfg;
    actor_cfg.lr = config.actor_lr;
    nets::AdamConfig critic_cfg;
    critic_cfg.lr = config.critic_lr;
    nets::Adam actor_opt(actor->parameters().size(), actor_cfg);
    nets::Adam critic_opt(critic->parameters().size(), critic_cfg);
    ReplayBuffer buffer(config.buffer_capacity, derive_seed(config.seed, kReplayStream));
    Rng noise(derive_seed(config.seed, kNoiseStream));
    const Box vbox = env.normalized_input_box();
    const int steps = env.spec().num_steps();
    const double gamma = config.gamma;

    for (int ep = 0; ep < config.episodes; ++ep) {
        const auto start = std::chrono::steady_clock::now();
        EpisodeRecord record;
        record.episode = ep;
        envs::Trajectory traj;
        Vector x = env.reset(episode_seed(config.seed, ep));
        for (int k = 0; k < steps; ++k) {
            const Vector z = env.normalize_state(x);
            Vector v = actor->act(z);
            if (config.mode == Mode::Vanilla) {
                for (Eigen::Index j = 0; j < v.size(); ++j) {
                    v[j] += config.exploration_sigma * noise.normal();
                }
            }
            v = vbox.clamp(v);
            const Vector u = env.spec().input_box.clamp(env.denormalize_input(v));
            const double cost = env.stage_cost(x, u);
            traj.push(k * env.spec().dt, x, u, cost);
            const auto step = env.step(x, u);
            Transition t{z, v, cost, Vector(), step.infeasible};
            Vector x_next = step.x;
            if (!x_next.allFinite()) {
                x_next = x;
            }
            t.z_next = env.normalize_state(x_next);
            if (step.infeasible && config.termination_cost) {
                t.cost += gamma / (1.0 - gamma) * env.stage_cost(x_next, u);
            }
            buffer.push(std::move(t));
            ++record.steps;

            if (buffer.size() >= config.batch_size) {
                for (int it = 0; it < config.updates_per_step; ++it) {
                    const Batch batch = buffer.sample(config.batch_size);
                    (void)critic_update(*critic, *target_actor, *target_critic, batch, gamma, critic_opt);
                    (void)actor_update(*actor, *critic, batch, actor_opt);
                    soft_update(target_critic->parameters(), critic->parameters(), config.tau);
                    soft_update(target_actor->parameters(), actor->parameters(), config.tau);
                    ++result.updates;
                }
            }
            if (step.infeasible) {
                record.infeasible = true;
                break;
            }
            x = step.x;
        }
        record.metrics = bench::compute_metrics(traj, env.spec().setpoint, env.spec().tracked_states, env.spec().dt);
        if (config.record_wall_time) {
            record.wall_ms =
                std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
        }
        result.log.push_back(record);
        if (config.checkpoint_every > 0 && (ep + 1) % config.checkpoint_every == 0 && !config.checkpoint_dir.empty()) {
            std::filesystem::create_directories(config.checkpoint_dir);
            const std::string stem = config.checkpoint_dir + "/episode_" + std::to_string(ep + 1);
            write_json_file(stem + "_actor.json", actor->to_json());
            write_json_file(stem + "_critic.json", critic->to_json());
        }
    }
    result.actor = std::move(actor);
    result.critic = std::move(critic);
    return result;
}

void write_episode_log(const std::string& path, const std::vector<EpisodeRecord>& log) {
    std::ofstream out(path);
    if (!out) {
        throw Error("cannot open episode log for writing: " + path);
    }
    out << "episode,cum_cost,ise,itae,ess,infeasible,wall_ms\n";
    for (const auto& r : log) {
        out << r.episode << ',' << envs::format_double(r.metrics.cum_cost) << ','
            << envs::format_double(r.metrics.ise) << ',' << envs::format_double(r.metrics.itae) << ','
            << envs::format_double(r.metrics.ess) << ',' << (r.infeasible ? 1 : 0) << ','
            << envs::format_double(r.wall_ms) << '\n';
    }
}

bench::Controller policy_controller(const envs::ProcessEnv& env, const nets::ActorModel& actor) {
    return [&env, &actor](const Vector& x, int) { return env.denormalize_input(actor.act(env.normalize_state(x))); };
}

Evaluation evaluate_policy(const envs::ProcessEnv& env, const nets::ActorModel& actor, const Vector& x0, int steps) {
    Evaluation e;
    e.rollout = bench::closed_loop(env, x0, steps, policy_controller(env, actor));
    e.metrics = bench::rollout_metrics(env, e.rollout);
    return e;
}

}  // namespace yannrl::rl
