#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "yannrl/numerics/types.hpp"

namespace yannrl::envs {

/// Static description of a process environment. Boxes, setpoint and steady
/// input are in physical units; Q_w and R weight normalized deviations.
struct EnvSpec {
    std::string name;
    std::vector<std::string> state_names;
    std::vector<std::string> input_names;
    Box state_box;
    Box input_box;
    Box reset_box;
    Vector setpoint;
    Vector steady_input;
    double dt = 0.0;        // minutes
    double duration = 0.0;  // minutes
    int substeps = 10;
    double noise_std = 0.0;             // fraction of state-box width
    double infeasibility_margin = 0.0;  // fraction of state-box width
    bool nonnegative_states = false;
    Matrix Q_w;
    Matrix R;
    std::vector<int> tracked_states;
    std::uint64_t seed = 0;

    [[nodiscard]] Eigen::Index n_states() const { return setpoint.size(); }
    [[nodiscard]] Eigen::Index n_inputs() const { return steady_input.size(); }
    [[nodiscard]] int num_steps() const;
};

struct StepResult {
    Vector x;
    bool infeasible = false;
    std::string reason;
};

/// Nonlinear ODE environment with seeded resets and a quadratic stage cost.
/// Instances are immutable; rollout code owns the evolving state.
class ProcessEnv {
public:
    ProcessEnv(EnvSpec spec, DynamicsFn dynamics);

    [[nodiscard]] const EnvSpec& spec() const { return spec_; }
    [[nodiscard]] const DynamicsFn& dynamics() const { return dynamics_; }
    [[nodiscard]] Eigen::Index n_states() const { return spec_.n_states(); }
    [[nodiscard]] Eigen::Index n_inputs() const { return spec_.n_inputs(); }

    /// Integrates one sample period with `substeps` RK4 steps after clamping
    /// u to the input box. Leaving the state box by more than the configured
    /// margin, or a domain error inside the model, is reported as an
    /// infeasibility event rather than thrown.
    [[nodiscard]] StepResult step(const Vector& x, const Vector& u,
                                  std::optional<std::uint64_t> noise_seed = std::nullopt) const;

    /// The noiseless sample-period map used by model-based controllers.
    [[nodiscard]] Vector propagate(const Vector& x, const Vector& u) const;

    [[nodiscard]] double stage_cost(const Vector& x, const Vector& u) const;
    [[nodiscard]] Vector reset(std::uint64_t seed) const;

    [[nodiscard]] Vector normalize_state(const Vector& x) const;
    [[nodiscard]] Vector denormalize_state(const Vector& z) const;
    [[nodiscard]] Vector normalize_input(const Vector& u) const;
    [[nodiscard]] Vector denormalize_input(const Vector& v) const;
    [[nodiscard]] Box normalized_state_box() const;
    [[nodiscard]] Box normalized_input_box() const;

private:
    EnvSpec spec_;
    DynamicsFn dynamics_;
    Vector state_scale_;
    Vector input_scale_;
};

/// Solves f(x, u) = 0 for the coordinates not marked fixed, by Gauss-Newton
/// with minimum-norm steps in box-width-scaled variables. Returns the pair
/// (x, u); throws NumericalError when the residual cannot be driven below 1e-10.
struct SteadyState {
    Vector x;
    Vector u;
    double residual = 0.0;
};
[[nodiscard]] SteadyState solve_steady_state(const DynamicsFn& f, const Vector& x_guess,
                                             const std::vector<bool>& x_fixed, const Vector& u_guess,
                                             const std::vector<bool>& u_fixed, const Vector& x_scale,
                                             const Vector& u_scale);

/// Builds an environment from its JSON description (see configs/envs/).
[[nodiscard]] ProcessEnv make_env(const nlohmann::json& config);
[[nodiscard]] ProcessEnv load_env(const std::string& path);

/// Recognized model names: "cstr", "four_tank", "extraction_column", "linear".
[[nodiscard]] DynamicsFn make_dynamics(const std::string& model, const nlohmann::json& params);

}  // namespace yannrl::envs
