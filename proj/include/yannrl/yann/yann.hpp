#pragma once

#include <memory>
#include <string>

#include "yannrl/explicit_mpc/formulation.hpp"
#include "yannrl/explicit_mpc/pwa_law.hpp"
#include "yannrl/nets/models.hpp"

namespace yannrl::yann {

/// v = clamp(pwa(z) + residual(z), input box). The piecewise-affine part is
/// frozen; only the residual network trains. Its final layer starts at zero,
/// so a fresh actor reproduces the law exactly.
///
/// Clamp subgradient: pass-through strictly inside the box, zero strictly
/// outside; on the boundary the gradient passes only when a descent step
/// moves the output back inside.
class YannActor final : public nets::ActorModel {
public:
    YannActor(explicit_mpc::PwaLaw law, nets::Mlp residual, Box input_box);

    [[nodiscard]] Eigen::Index state_size() const override { return law_.n; }
    [[nodiscard]] Eigen::Index input_size() const override { return law_.m; }
    [[nodiscard]] Matrix act_batch(const Matrix& Z) const override;
    void backward_batch(const Matrix& Z, const Matrix& cotangent, Vector& param_grad) const override;
    [[nodiscard]] Vector& parameters() override { return residual_.parameters(); }
    [[nodiscard]] const Vector& parameters() const override { return residual_.parameters(); }
    [[nodiscard]] std::unique_ptr<nets::ActorModel> clone() const override;
    [[nodiscard]] nlohmann::json to_json() const override;

    [[nodiscard]] const explicit_mpc::PwaLaw& law() const { return law_; }
    [[nodiscard]] const nets::Mlp& residual() const { return residual_; }
    [[nodiscard]] nets::Mlp& residual() { return residual_; }
    [[nodiscard]] const Box& input_box() const { return box_; }

    /// Law output before the residual and the clamp.
    [[nodiscard]] Vector pwa(const Vector& z) const;

private:
    explicit_mpc::PwaLaw law_;
    nets::Mlp residual_;
    Box box_;
};

/// The explicit MPC controller as a parameter-free policy:
/// v = clamp(pwa(z), input box), the law extended by its nearest region
/// outside the domain.
class ExplicitMpcPolicy final : public nets::ActorModel {
public:
    ExplicitMpcPolicy(explicit_mpc::PwaLaw law, Box input_box);

    [[nodiscard]] Eigen::Index state_size() const override { return law_.n; }
    [[nodiscard]] Eigen::Index input_size() const override { return law_.m; }
    [[nodiscard]] Matrix act_batch(const Matrix& Z) const override;
    void backward_batch(const Matrix& Z, const Matrix& cotangent, Vector& param_grad) const override;
    [[nodiscard]] Vector& parameters() override { return empty_; }
    [[nodiscard]] const Vector& parameters() const override { return empty_; }
    [[nodiscard]] std::unique_ptr<nets::ActorModel> clone() const override;
    [[nodiscard]] nlohmann::json to_json() const override;

private:
    explicit_mpc::PwaLaw law_;
    Box box_;
    Vector empty_;
};

/// Q(z, v) = w'Mw + residual(w), w = [z; v], with
/// M = [[Q + g A'PA, g A'PB], [g B'PA, R + g B'PB]].
class YannCritic final : public nets::CriticModel {
public:
    YannCritic(Matrix M, Eigen::Index state_size, nets::Mlp residual);

    [[nodiscard]] Eigen::Index state_size() const override { return n_; }
    [[nodiscard]] Eigen::Index input_size() const override { return M_.rows() - n_; }
    [[nodiscard]] Vector value_batch(const Matrix& Z, const Matrix& V) const override;
    Matrix backward_batch(const Matrix& Z, const Matrix& V, const Vector& cotangent,
                          Vector* param_grad) const override;
    [[nodiscard]] Vector& parameters() override { return residual_.parameters(); }
    [[nodiscard]] const Vector& parameters() const override { return residual_.parameters(); }
    [[nodiscard]] std::unique_ptr<nets::CriticModel> clone() const override;
    [[nodiscard]] nlohmann::json to_json() const override;

    [[nodiscard]] const Matrix& M() const { return M_; }
    [[nodiscard]] const nets::Mlp& residual() const { return residual_; }
    [[nodiscard]] nets::Mlp& residual() { return residual_; }

private:
    Matrix M_;
    Eigen::Index n_;
    nets::Mlp residual_;
};

/// Residual network specs: hidden layers and seed are taken from `spec`;
/// widths are set from the problem and the final layer is zeroed.
[[nodiscard]] YannActor build_yann_actor(const explicit_mpc::PwaLaw& law, nets::MlpSpec spec, const Box& input_box);

[[nodiscard]] Matrix critic_matrix(const Matrix& A, const Matrix& B, const Matrix& Q, const Matrix& R,
                                   const Matrix& P, double gamma);

[[nodiscard]] YannCritic build_yann_critic(const Matrix& A, const Matrix& B, const Matrix& Q, const Matrix& R,
                                           const Matrix& P, double gamma, nets::MlpSpec spec);
[[nodiscard]] YannCritic build_yann_critic(const explicit_mpc::MpcFormulation& f, nets::MlpSpec spec);

/// Rebuilds any actor or critic from its checkpoint, dispatching on "kind".
[[nodiscard]] std::unique_ptr<nets::ActorModel> actor_from_json(const nlohmann::json& j);
[[nodiscard]] std::unique_ptr<nets::CriticModel> critic_from_json(const nlohmann::json& j);

void save_model(const std::string& path, const nlohmann::json& checkpoint);

}  // namespace yannrl::yann
