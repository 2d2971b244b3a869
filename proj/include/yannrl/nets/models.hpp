#pragma once

#include <memory>

#include <json.hpp>

#include "yannrl/nets/mlp.hpp"

namespace yannrl::nets {

/// Deterministic policy v = pi(z) on normalized coordinates. Batched calls
/// take one sample per column.
class ActorModel {
public:
    virtual ~ActorModel() = default;

    [[nodiscard]] virtual Eigen::Index state_size() const = 0;
    [[nodiscard]] virtual Eigen::Index input_size() const = 0;
    [[nodiscard]] virtual Matrix act_batch(const Matrix& Z) const = 0;
    [[nodiscard]] Vector act(const Vector& z) const { return act_batch(z); }

    /// Adds d<cot, pi(Z)>/d theta into param_grad.
    virtual void backward_batch(const Matrix& Z, const Matrix& cotangent, Vector& param_grad) const = 0;

    /// Trainable parameters only.
    [[nodiscard]] virtual Vector& parameters() = 0;
    [[nodiscard]] virtual const Vector& parameters() const = 0;

    [[nodiscard]] virtual std::unique_ptr<ActorModel> clone() const = 0;
    [[nodiscard]] virtual nlohmann::json to_json() const = 0;
};

/// State-action cost-to-go Q(z, v); smaller is better.
class CriticModel {
public:
    virtual ~CriticModel() = default;

    [[nodiscard]] virtual Eigen::Index state_size() const = 0;
    [[nodiscard]] virtual Eigen::Index input_size() const = 0;
    [[nodiscard]] virtual Vector value_batch(const Matrix& Z, const Matrix& V) const = 0;
    [[nodiscard]] double value(const Vector& z, const Vector& v) const { return value_batch(z, v)[0]; }

    /// For <cot, Q(Z, V)>: adds the parameter gradient into param_grad when
    /// it is non-null and returns dQ/dV weighted by cot, one column per sample.
    virtual Matrix backward_batch(const Matrix& Z, const Matrix& V, const Vector& cotangent,
                                  Vector* param_grad) const = 0;

    [[nodiscard]] virtual Vector& parameters() = 0;
    [[nodiscard]] virtual const Vector& parameters() const = 0;

    [[nodiscard]] virtual std::unique_ptr<CriticModel> clone() const = 0;
    [[nodiscard]] virtual nlohmann::json to_json() const = 0;
};

/// v = center + halfwidth * tanh(mlp(z)) over the normalized input box.
class VanillaActor final : public ActorModel {
public:
    VanillaActor(Mlp net, Box input_box);
    /// Hidden layers from `spec`; input/output widths and output activation
    /// are set from the box and state size.
    VanillaActor(Eigen::Index state_size, const Box& input_box, MlpSpec spec);

    [[nodiscard]] Eigen::Index state_size() const override { return net_.input_size(); }
    [[nodiscard]] Eigen::Index input_size() const override { return net_.output_size(); }
    [[nodiscard]] Matrix act_batch(const Matrix& Z) const override;
    void backward_batch(const Matrix& Z, const Matrix& cotangent, Vector& param_grad) const override;
    [[nodiscard]] Vector& parameters() override { return net_.parameters(); }
    [[nodiscard]] const Vector& parameters() const override { return net_.parameters(); }
    [[nodiscard]] std::unique_ptr<ActorModel> clone() const override;
    [[nodiscard]] nlohmann::json to_json() const override;

    [[nodiscard]] const Mlp& net() const { return net_; }
    [[nodiscard]] const Box& input_box() const { return box_; }

private:
    Mlp net_;
    Box box_;
};

/// Q = mlp([z; v]).
class VanillaCritic final : public CriticModel {
public:
    VanillaCritic(Mlp net, Eigen::Index state_size);
    VanillaCritic(Eigen::Index state_size, Eigen::Index input_size, MlpSpec spec);

    [[nodiscard]] Eigen::Index state_size() const override { return n_; }
    [[nodiscard]] Eigen::Index input_size() const override { return net_.input_size() - n_; }
    [[nodiscard]] Vector value_batch(const Matrix& Z, const Matrix& V) const override;
    Matrix backward_batch(const Matrix& Z, const Matrix& V, const Vector& cotangent,
                          Vector* param_grad) const override;
    [[nodiscard]] Vector& parameters() override { return net_.parameters(); }
    [[nodiscard]] const Vector& parameters() const override { return net_.parameters(); }
    [[nodiscard]] std::unique_ptr<CriticModel> clone() const override;
    [[nodiscard]] nlohmann::json to_json() const override;

    [[nodiscard]] const Mlp& net() const { return net_; }

private:
    Mlp net_;
    Eigen::Index n_;
};

/// Stacks Z over V.
[[nodiscard]] Matrix stack_state_input(const Matrix& Z, const Matrix& V);

[[nodiscard]] nlohmann::json box_to_json(const Box& box);
[[nodiscard]] Box box_from_json(const nlohmann::json& j);

}  // namespace yannrl::nets
