#include "yannrl/nets/mlp.hpp"

#include <cmath>

#include "yannrl/numerics/errors.hpp"
#include "yannrl/numerics/json_io.hpp"
#include "yannrl/numerics/random.hpp"

namespace yannrl::nets {

namespace {

constexpr const char* kMlpFormat = "yannrl-mlp";

void apply(Activation a, Matrix& Z) {
    switch (a) {
        case Activation::Tanh:
            Z = Z.array().tanh();
            break;
        case Activation::Relu:
            Z = Z.cwiseMax(0.0);
            break;
        case Activation::Identity:
            break;
    }
}

/// Multiplies the cotangent by the activation derivative, given the layer
/// pre-activation Z and output Y.
void apply_derivative(Activation a, const Matrix& Z, const Matrix& Y, Matrix& cot) {
    switch (a) {
        case Activation::Tanh:
            cot.array() *= 1.0 - Y.array().square();
            break;
        case Activation::Relu:
            cot.array() *= (Z.array() > 0.0).cast<double>();
            break;
        case Activation::Identity:
            break;
    }
}

}  // namespace

std::string activation_name(Activation a) {
    switch (a) {
        case Activation::Tanh:
            return "tanh";
        case Activation::Relu:
            return "relu";
        case Activation::Identity:
            return "identity";
    }
    return "identity";
}

Activation activation_from_name(const std::string& name) {
    if (name == "tanh") {
        return Activation::Tanh;
    }
    if (name == "relu") {
        return Activation::Relu;
    }
    if (name == "identity") {
        return Activation::Identity;
    }
    throw ConfigError("unknown activation '" + name + "'");
}

Mlp::Mlp(std::vector<Eigen::Index> widths, std::vector<Activation> activations)
    : widths_(std::move(widths)), activations_(std::move(activations)) {
    if (widths_.size() < 2 || activations_.size() + 1 != widths_.size()) {
        throw DimensionError("an MLP needs one activation per layer and at least one layer");
    }
    for (auto w : widths_) {
        if (w < 1) {
            throw DimensionError("layer widths must be positive");
        }
    }
    layout();
}

Mlp::Mlp(const MlpSpec& spec) : seed_(spec.seed), zero_output_init_(spec.zero_output_init) {
    widths_.push_back(spec.input);
    for (auto h : spec.hidden) {
        widths_.push_back(h);
        activations_.push_back(spec.hidden_activation);
    }
    widths_.push_back(spec.output);
    activations_.push_back(spec.output_activation);
    for (auto w : widths_) {
        if (w < 1) {
            throw DimensionError("layer widths must be positive");
        }
    }
    layout();
    Rng rng(spec.seed);
    for (std::size_t l = 0; l < num_layers(); ++l) {
        const bool zero = spec.zero_output_init && l + 1 == num_layers();
        const double bound = 1.0 / std::sqrt(static_cast<double>(widths_[l]));
        auto W = weight(l);
        auto b = bias(l);
        for (Eigen::Index j = 0; j < W.cols(); ++j) {
            for (Eigen::Index i = 0; i < W.rows(); ++i) {
                W(i, j) = zero ? 0.0 : rng.uniform(-bound, bound);
            }
        }
        for (Eigen::Index i = 0; i < b.size(); ++i) {
            b[i] = zero ? 0.0 : rng.uniform(-bound, bound);
        }
    }
}

void Mlp::layout() {
    offsets_.clear();
    Eigen::Index total = 0;
    for (std::size_t l = 0; l + 1 < widths_.size(); ++l) {
        offsets_.push_back(total);
        total += widths_[l + 1] * widths_[l] + widths_[l + 1];
    }
    params_ = Vector::Zero(total);
}

void Mlp::set_parameters(const Vector& p) {
    if (p.size() != params_.size()) {
        throw DimensionError("parameter vector has the wrong length");
    }
    params_ = p;
}

Eigen::Map<const Matrix> Mlp::weight(std::size_t l) const {
    return {params_.data() + offsets_.at(l), widths_[l + 1], widths_[l]};
}
Eigen::Map<Matrix> Mlp::weight(std::size_t l) {
    return {params_.data() + offsets_.at(l), widths_[l + 1], widths_[l]};
}
Eigen::Map<const Vector> Mlp::bias(std::size_t l) const {
    return {params_.data() + offsets_.at(l) + widths_[l + 1] * widths_[l], widths_[l + 1]};
}
Eigen::Map<Vector> Mlp::bias(std::size_t l) {
    return {params_.data() + offsets_.at(l) + widths_[l + 1] * widths_[l], widths_[l + 1]};
}

void Mlp::check_input(const Matrix& X) const {
    if (widths_.empty()) {
        throw DimensionError("empty network");
    }
    if (X.rows() != input_size()) {
        throw DimensionError("network expects " + std::to_string(input_size()) + " inputs, got " +
                             std::to_string(X.rows()));
    }
}

Matrix Mlp::forward_batch(const Matrix& X) const {
    check_input(X);
    Matrix Y = X;
    for (std::size_t l = 0; l < num_layers(); ++l) {
        Matrix Z = weight(l) * Y;
        Z.colwise() += bias(l);
        apply(activations_[l], Z);
        Y = std::move(Z);
    }
    return Y;
}

Vector Mlp::forward(const Vector& x) const { return forward_batch(x); }

Matrix Mlp::backward_batch(const Matrix& X, const Matrix& cotangent, Vector& param_grad) const {
    check_input(X);
    if (cotangent.rows() != output_size() || cotangent.cols() != X.cols()) {
        throw DimensionError("cotangent shape does not match the network output");
    }
    if (param_grad.size() != params_.size()) {
        throw DimensionError("parameter gradient has the wrong length");
    }
    const std::size_t L = num_layers();
    std::vector<Matrix> inputs(L);
    std::vector<Matrix> pre(L);
    std::vector<Matrix> post(L);
    Matrix Y = X;
    for (std::size_t l = 0; l < L; ++l) {
        inputs[l] = Y;
        pre[l] = weight(l) * Y;
        pre[l].colwise() += bias(l);
        post[l] = pre[l];
        apply(activations_[l], post[l]);
        Y = post[l];
    }
    Matrix cot = cotangent;
    for (std::size_t l = L; l-- > 0;) {
        apply_derivative(activations_[l], pre[l], post[l], cot);
        const Eigen::Index rows = widths_[l + 1];
        const Eigen::Index cols = widths_[l];
        Eigen::Map<Matrix>(param_grad.data() + offsets_[l], rows, cols).noalias() += cot * inputs[l].transpose();
        Eigen::Map<Vector>(param_grad.data() + offsets_[l] + rows * cols, rows) += cot.rowwise().sum();
        cot = weight(l).transpose() * cot;
    }
    return cot;
}

Mlp::Gradients Mlp::backward(const Vector& x, const Vector& cotangent) const {
    Gradients g{Vector::Zero(params_.size()), Vector()};
    g.input = backward_batch(x, cotangent, g.parameters);
    return g;
}

nlohmann::json Mlp::to_json() const {
    nlohmann::json j;
    j["format"] = kMlpFormat;
    j["version"] = 1;
    j["widths"] = widths_;
    auto acts = nlohmann::json::array();
    for (auto a : activations_) {
        acts.push_back(activation_name(a));
    }
    j["activations"] = acts;
    j["zero_output_init"] = zero_output_init_;
    j["seed"] = seed_;
    j["parameters"] = vector_to_json(params_);
    return j;
}

Mlp Mlp::from_json(const nlohmann::json& j) {
    if (j.value("format", std::string()) != kMlpFormat || j.value("version", 0) != 1) {
        throw ConfigError("not an MLP checkpoint");
    }
    std::vector<Activation> acts;
    for (const auto& a : require(j, "activations")) {
        acts.push_back(activation_from_name(a.get<std::string>()));
    }
    Mlp net(require(j, "widths").get<std::vector<Eigen::Index>>(), std::move(acts));
    net.set_parameters(vector_from_json(require(j, "parameters")));
    net.seed_ = j.value("seed", std::uint64_t{0});
    net.zero_output_init_ = j.value("zero_output_init", false);
    return net;
}

Adam::Adam(Eigen::Index size, AdamConfig config)
    : config_(config), m_(Vector::Zero(size)), v_(Vector::Zero(size)) {}

void Adam::step(Vector& params, const Vector& grad) {
    if (params.size() != m_.size() || grad.size() != m_.size()) {
        throw DimensionError("Adam state does not match the parameter vector");
    }
    ++t_;
    m_ = config_.beta1 * m_ + (1.0 - config_.beta1) * grad;
    v_ = config_.beta2 * v_ + (1.0 - config_.beta2) * grad.cwiseAbs2();
    const double c1 = 1.0 - std::pow(config_.beta1, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(config_.beta2, static_cast<double>(t_));
    params.array() -= config_.lr * (m_.array() / c1) / ((v_.array() / c2).sqrt() + config_.eps);
}

void save_mlp(const std::string& path, const Mlp& net) { write_json_file(path, net.to_json()); }

Mlp load_mlp(const std::string& path) { return Mlp::from_json(read_json_file(path)); }

}  // namespace yannrl::nets
