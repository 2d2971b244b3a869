#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "yannrl/bench/metrics.hpp"
#include "yannrl/envs/process_env.hpp"
#include "yannrl/nets/models.hpp"
#include "yannrl/numerics/random.hpp"

namespace yannrl::rl {

/// One environment step in normalized coordinates.
struct Transition {
    Vector z;
    Vector v;
    double cost = 0.0;
    Vector z_next;
    bool terminal = false;
};

struct Batch {
    Matrix Z;
    Matrix V;
    Vector cost;
    Matrix Z_next;
    std::vector<bool> terminal;

    [[nodiscard]] Eigen::Index size() const { return Z.cols(); }
};

/// Ring buffer with uniform sampling with replacement.
class ReplayBuffer {
public:
    ReplayBuffer(std::size_t capacity, std::uint64_t seed);

    void push(Transition t);
    [[nodiscard]] std::size_t size() const { return items_.size(); }
    [[nodiscard]] std::size_t capacity() const { return capacity_; }
    [[nodiscard]] const Transition& at(std::size_t i) const { return items_.at(i); }

    /// Indices into the buffer, uniform over stored items.
    [[nodiscard]] std::vector<std::size_t> sample_indices(std::size_t batch);
    [[nodiscard]] Batch sample(std::size_t batch);

private:
    std::size_t capacity_;
    std::size_t next_ = 0;
    std::vector<Transition> items_;
    Rng rng_;
};

[[nodiscard]] Batch make_batch(const std::vector<Transition>& items);

enum class Mode { Vanilla, Yann };

[[nodiscard]] std::string mode_name(Mode m);

struct TrainConfig {
    Mode mode = Mode::Yann;
    double gamma = 0.99;
    double tau = 0.005;
    double actor_lr = 1e-4;
    double critic_lr = 1e-3;
    std::size_t batch_size = 64;
    std::size_t buffer_capacity = 100000;
    int episodes = 0;
    double exploration_sigma = 0.1;  // normalized input units, vanilla only
    int updates_per_step = 1;
    std::uint64_t seed = 0;
    /// On an infeasibility termination the stored cost adds
    /// g / (1 - g) * C(x_next, u), the cost of remaining at the exit point.
    bool termination_cost = true;
    bool record_wall_time = false;
    int checkpoint_every = 0;  // episodes; 0 disables
    std::string checkpoint_dir;

    void validate() const;
};

/// Mean squared TD error step toward y = c + g (1 - terminal) Q'(z', pi'(z')).
/// Returns the loss before the step.
double critic_update(nets::CriticModel& critic, const nets::ActorModel& target_actor,
                     const nets::CriticModel& target_critic, const Batch& batch, double gamma, nets::Adam& opt);

/// One step on mean_i Q(z_i, pi(z_i)) with the critic held fixed. Returns
/// the loss before the step.
double actor_update(nets::ActorModel& actor, const nets::CriticModel& critic, const Batch& batch, nets::Adam& opt);

/// theta_target <- tau theta + (1 - tau) theta_target
void soft_update(Vector& target, const Vector& online, double tau);

struct EpisodeRecord {
    int episode = 0;
    bench::Metrics metrics;
    bool infeasible = false;
    int steps = 0;
    double wall_ms = 0.0;
};

struct TrainResult {
    std::unique_ptr<nets::ActorModel> actor;
    std::unique_ptr<nets::CriticModel> critic;
    std::vector<EpisodeRecord> log;
    long updates = 0;
};

/// Reset seed of training episode k.
[[nodiscard]] std::uint64_t episode_seed(std::uint64_t seed, int episode);

/// DDPG in normalized coordinates. Vanilla mode perturbs actions with
/// Gaussian noise; yann mode acts deterministically. Infeasibility events
/// end the episode and are logged; training continues.
[[nodiscard]] TrainResult train_ddpg(const envs::ProcessEnv& env, std::unique_ptr<nets::ActorModel> actor,
                                     std::unique_ptr<nets::CriticModel> critic, const TrainConfig& config);

/// Columns episode,cum_cost,ise,itae,ess,infeasible,wall_ms.
void write_episode_log(const std::string& path, const std::vector<EpisodeRecord>& log);

/// Physical-unit controller from a normalized policy.
[[nodiscard]] bench::Controller policy_controller(const envs::ProcessEnv& env, const nets::ActorModel& actor);

struct Evaluation {
    bench::Rollout rollout;
    bench::Metrics metrics;
};

/// Noiseless closed loop of the policy from x0 for `steps` samples.
[[nodiscard]] Evaluation evaluate_policy(const envs::ProcessEnv& env, const nets::ActorModel& actor, const Vector& x0,
                                         int steps);

}  // namespace yannrl::rl
