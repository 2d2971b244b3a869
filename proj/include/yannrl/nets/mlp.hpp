#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "yannrl/numerics/types.hpp"

namespace yannrl::nets {

enum class Activation { Tanh, Relu, Identity };

[[nodiscard]] std::string activation_name(Activation a);
[[nodiscard]] Activation activation_from_name(const std::string& name);

/// Layer widths and activations. Hidden layers use `hidden_activation`, the
/// final layer `output_activation`.
struct MlpSpec {
    Eigen::Index input = 1;
    std::vector<Eigen::Index> hidden{64, 64};
    Eigen::Index output = 1;
    Activation hidden_activation = Activation::Tanh;
    Activation output_activation = Activation::Identity;
    bool zero_output_init = false;
    std::uint64_t seed = 0;
};

/// Fully connected network y = act_L(W_L ... act_1(W_1 x + b_1) ... + b_L).
///
/// Parameters live in one flat vector, layer by layer, each layer as its
/// column-major weight matrix followed by its bias. Batched calls take one
/// sample per column.
class Mlp {
public:
    Mlp() = default;

    /// Weights and biases of each layer are drawn uniformly from
    /// [-1/sqrt(fan_in), 1/sqrt(fan_in)]; with zero_output_init the final
    /// layer is exactly zero.
    explicit Mlp(const MlpSpec& spec);

    /// Network with the given widths (input first) and per-layer activations,
    /// all parameters zero.
    Mlp(std::vector<Eigen::Index> widths, std::vector<Activation> activations);

    [[nodiscard]] Eigen::Index input_size() const { return widths_.front(); }
    [[nodiscard]] Eigen::Index output_size() const { return widths_.back(); }
    [[nodiscard]] std::size_t num_layers() const { return activations_.size(); }
    [[nodiscard]] const std::vector<Eigen::Index>& widths() const { return widths_; }
    [[nodiscard]] const std::vector<Activation>& activations() const { return activations_; }
    [[nodiscard]] std::uint64_t seed() const { return seed_; }
    [[nodiscard]] bool zero_output_init() const { return zero_output_init_; }

    [[nodiscard]] Eigen::Index num_parameters() const { return params_.size(); }
    [[nodiscard]] const Vector& parameters() const { return params_; }
    [[nodiscard]] Vector& parameters() { return params_; }
    void set_parameters(const Vector& p);

    [[nodiscard]] Eigen::Map<const Matrix> weight(std::size_t layer) const;
    [[nodiscard]] Eigen::Map<Matrix> weight(std::size_t layer);
    [[nodiscard]] Eigen::Map<const Vector> bias(std::size_t layer) const;
    [[nodiscard]] Eigen::Map<Vector> bias(std::size_t layer);

    [[nodiscard]] Vector forward(const Vector& x) const;
    [[nodiscard]] Matrix forward_batch(const Matrix& X) const;

    /// Reverse mode for <cotangent, forward(X)> summed over the batch: adds
    /// the parameter gradient into `param_grad` (sized num_parameters()) and
    /// returns the input gradient, one column per sample.
    Matrix backward_batch(const Matrix& X, const Matrix& cotangent, Vector& param_grad) const;

    struct Gradients {
        Vector parameters;
        Vector input;
    };
    [[nodiscard]] Gradients backward(const Vector& x, const Vector& cotangent) const;

    [[nodiscard]] nlohmann::json to_json() const;
    [[nodiscard]] static Mlp from_json(const nlohmann::json& j);

private:
    void layout();
    void check_input(const Matrix& X) const;

    std::vector<Eigen::Index> widths_;
    std::vector<Activation> activations_;
    std::vector<Eigen::Index> offsets_;  // start of each layer's block in params_
    Vector params_;
    std::uint64_t seed_ = 0;
    bool zero_output_init_ = false;
};

struct AdamConfig {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

/// Adam with bias correction on a flat parameter vector.
class Adam {
public:
    Adam() = default;
    Adam(Eigen::Index size, AdamConfig config);

    void step(Vector& params, const Vector& grad);

    [[nodiscard]] const AdamConfig& config() const { return config_; }
    [[nodiscard]] long steps() const { return t_; }
    [[nodiscard]] const Vector& first_moment() const { return m_; }
    [[nodiscard]] const Vector& second_moment() const { return v_; }

private:
    AdamConfig config_;
    Vector m_;
    Vector v_;
    long t_ = 0;
};

void save_mlp(const std::string& path, const Mlp& net);
[[nodiscard]] Mlp load_mlp(const std::string& path);

}  // namespace yannrl::nets
