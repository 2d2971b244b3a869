#include "yannrl/nets/models.hpp"

#include "yannrl/numerics/errors.hpp"
#include "yannrl/numerics/json_io.hpp"

namespace yannrl::nets {

Matrix stack_state_input(const Matrix& Z, const Matrix& V) {
    if (Z.cols() != V.cols()) {
        throw DimensionError("state and input batches differ in size");
    }
    Matrix W(Z.rows() + V.rows(), Z.cols());
    W << Z, V;
    return W;
}

nlohmann::json box_to_json(const Box& box) {
    return {{"lower", vector_to_json(box.lower)}, {"upper", vector_to_json(box.upper)}};
}

Box box_from_json(const nlohmann::json& j) {
    return {vector_from_json(require(j, "lower")), vector_from_json(require(j, "upper"))};
}

VanillaActor::VanillaActor(Mlp net, Box input_box) : net_(std::move(net)), box_(std::move(input_box)) {
    if (net_.output_size() != box_.size()) {
        throw DimensionError("actor output width does not match the input box");
    }
    if (net_.activations().back() != Activation::Tanh) {
        throw ConfigError("vanilla actor needs a tanh output layer");
    }
}

VanillaActor::VanillaActor(Eigen::Index state_size, const Box& input_box, MlpSpec spec)
    : VanillaActor(
          [&] {
              spec.input = state_size;
              spec.output = input_box.size();
              spec.output_activation = Activation::Tanh;
              return Mlp(spec);
          }(),
          input_box) {}

Matrix VanillaActor::act_batch(const Matrix& Z) const {
    Matrix Y = net_.forward_batch(Z);
    const Vector half = 0.5 * box_.width();
    return (half.asDiagonal() * Y).colwise() + box_.center();
}

void VanillaActor::backward_batch(const Matrix& Z, const Matrix& cotangent, Vector& param_grad) const {
    const Vector half = 0.5 * box_.width();
    (void)net_.backward_batch(Z, half.asDiagonal() * cotangent, param_grad);
}

std::unique_ptr<ActorModel> VanillaActor::clone() const { return std::make_unique<VanillaActor>(*this); }

nlohmann::json VanillaActor::to_json() const {
    return {{"kind", "vanilla_actor"}, {"input_box", box_to_json(box_)}, {"net", net_.to_json()}};
}

VanillaCritic::VanillaCritic(Mlp net, Eigen::Index state_size) : net_(std::move(net)), n_(state_size) {
    if (net_.output_size() != 1 || net_.input_size() <= n_) {
        throw DimensionError("critic network must map [z; v] to a scalar");
    }
}

VanillaCritic::VanillaCritic(Eigen::Index state_size, Eigen::Index input_size, MlpSpec spec)
    : VanillaCritic(
          [&] {
              spec.input = state_size + input_size;
              spec.output = 1;
              spec.output_activation = Activation::Identity;
              return Mlp(spec);
          }(),
          state_size) {}

Vector VanillaCritic::value_batch(const Matrix& Z, const Matrix& V) const {
    return net_.forward_batch(stack_state_input(Z, V)).row(0).transpose();
}

Matrix VanillaCritic::backward_batch(const Matrix& Z, const Matrix& V, const Vector& cotangent,
                                     Vector* param_grad) const {
    Vector scratch;
    if (param_grad == nullptr) {
        scratch = Vector::Zero(net_.num_parameters());
        param_grad = &scratch;
    }
    const Matrix g = net_.backward_batch(stack_state_input(Z, V), cotangent.transpose(), *param_grad);
    return g.bottomRows(V.rows());
}

std::unique_ptr<CriticModel> VanillaCritic::clone() const { return std::make_unique<VanillaCritic>(*this); }

nlohmann::json VanillaCritic::to_json() const {
    return {{"kind", "vanilla_critic"}, {"state_size", n_}, {"net", net_.to_json()}};
}

}  // namespace yannrl::nets
