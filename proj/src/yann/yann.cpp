#include "yannrl/yann/yann.hpp"

#include <cmath>

#include "yannrl/numerics/errors.hpp"
#include "yannrl/numerics/json_io.hpp"

namespace yannrl::yann {

namespace {

bool on_bound(double value, double bound) { return std::abs(value - bound) <= 1e-12 * std::max(1.0, std::abs(bound)); }

}  // namespace

YannActor::YannActor(explicit_mpc::PwaLaw law, nets::Mlp residual, Box input_box)
    : law_(std::move(law)), residual_(std::move(residual)), box_(std::move(input_box)) {
    if (law_.regions.empty()) {
        throw Error("YANN actor needs a nonempty law");
    }
    if (residual_.input_size() != law_.n || residual_.output_size() != law_.m || box_.size() != law_.m) {
        throw DimensionError("residual network or input box does not match the law");
    }
}

Vector YannActor::pwa(const Vector& z) const { return explicit_mpc::evaluate_pwa_extended(law_, z); }

Matrix YannActor::act_batch(const Matrix& Z) const {
    Matrix V = residual_.forward_batch(Z);
    for (Eigen::Index s = 0; s < Z.cols(); ++s) {
        V.col(s) = box_.clamp(pwa(Z.col(s)) + V.col(s));
    }
    return V;
}

void YannActor::backward_batch(const Matrix& Z, const Matrix& cotangent, Vector& param_grad) const {
    const Matrix raw = residual_.forward_batch(Z);
    Matrix cot = cotangent;
    for (Eigen::Index s = 0; s < Z.cols(); ++s) {
        const Vector pre = pwa(Z.col(s)) + raw.col(s);
        for (Eigen::Index j = 0; j < pre.size(); ++j) {
            const double lo = box_.lower[j];
            const double hi = box_.upper[j];
            const double g = cot(j, s);
            bool pass = pre[j] > lo && pre[j] < hi;
            if (on_bound(pre[j], hi)) {
                pass = g > 0.0;  // descent step -g lowers the output
            } else if (on_bound(pre[j], lo)) {
                pass = g < 0.0;
            }
            if (!pass) {
                cot(j, s) = 0.0;
            }
        }
    }
    (void)residual_.backward_batch(Z, cot, param_grad);
}

std::unique_ptr<nets::ActorModel> YannActor::clone() const { return std::make_unique<YannActor>(*this); }

nlohmann::json YannActor::to_json() const {
    return {{"kind", "yann_actor"},
            {"input_box", nets::box_to_json(box_)},
            {"law", explicit_mpc::law_to_json(law_)},
            {"residual", residual_.to_json()}};
}

ExplicitMpcPolicy::ExplicitMpcPolicy(explicit_mpc::PwaLaw law, Box input_box)
    : law_(std::move(law)), box_(std::move(input_box)) {
    if (law_.regions.empty() || box_.size() != law_.m) {
        throw DimensionError("explicit MPC policy needs a nonempty law matching the input box");
    }
}

Matrix ExplicitMpcPolicy::act_batch(const Matrix& Z) const {
    Matrix V(law_.m, Z.cols());
    for (Eigen::Index s = 0; s < Z.cols(); ++s) {
        V.col(s) = box_.clamp(explicit_mpc::evaluate_pwa_extended(law_, Z.col(s)));
    }
    return V;
}

void ExplicitMpcPolicy::backward_batch(const Matrix&, const Matrix&, Vector&) const {}

std::unique_ptr<nets::ActorModel> ExplicitMpcPolicy::clone() const {
    return std::make_unique<ExplicitMpcPolicy>(*this);
}

nlohmann::json ExplicitMpcPolicy::to_json() const {
    return {{"kind", "explicit_mpc"}, {"input_box", nets::box_to_json(box_)}, {"law", explicit_mpc::law_to_json(law_)}};
}

YannCritic::YannCritic(Matrix M, Eigen::Index state_size, nets::Mlp residual)
    : M_(std::move(M)), n_(state_size), residual_(std::move(residual)) {
    if (M_.rows() != M_.cols() || M_.rows() <= n_) {
        throw DimensionError("critic matrix must be square and larger than the state");
    }
    if (residual_.input_size() != M_.rows() || residual_.output_size() != 1) {
        throw DimensionError("critic residual must map [z; v] to a scalar");
    }
    M_ = 0.5 * (M_ + M_.transpose()).eval();
}

Vector YannCritic::value_batch(const Matrix& Z, const Matrix& V) const {
    const Matrix W = nets::stack_state_input(Z, V);
    const Vector quad = (W.array() * (M_ * W).array()).colwise().sum().transpose();
    return quad + residual_.forward_batch(W).row(0).transpose();
}

Matrix YannCritic::backward_batch(const Matrix& Z, const Matrix& V, const Vector& cotangent,
                                  Vector* param_grad) const {
    const Matrix W = nets::stack_state_input(Z, V);
    Vector scratch;
    if (param_grad == nullptr) {
        scratch = Vector::Zero(residual_.num_parameters());
        param_grad = &scratch;
    }
    const Matrix g = residual_.backward_batch(W, cotangent.transpose(), *param_grad);
    // d(w'Mw)/dv = 2 (M w)_v
    const Matrix quad = 2.0 * M_.bottomRows(V.rows()) * W;
    return g.bottomRows(V.rows()) + quad * cotangent.asDiagonal();
}

std::unique_ptr<nets::CriticModel> YannCritic::clone() const { return std::make_unique<YannCritic>(*this); }

nlohmann::json YannCritic::to_json() const {
    return {{"kind", "yann_critic"}, {"state_size", n_}, {"M", matrix_to_json(M_)}, {"residual", residual_.to_json()}};
}

YannActor build_yann_actor(const explicit_mpc::PwaLaw& law, nets::MlpSpec spec, const Box& input_box) {
    spec.input = law.n;
    spec.output = law.m;
    spec.output_activation = nets::Activation::Identity;
    spec.zero_output_init = true;
    return {law, nets::Mlp(spec), input_box};
}

Matrix critic_matrix(const Matrix& A, const Matrix& B, const Matrix& Q, const Matrix& R, const Matrix& P,
                     double gamma) {
    const auto n = A.rows();
    const auto m = B.cols();
    if (A.cols() != n || B.rows() != n || Q.rows() != n || Q.cols() != n || R.rows() != m || R.cols() != m ||
        P.rows() != n || P.cols() != n) {
        throw DimensionError("inconsistent dimensions for the critic matrix");
    }
    Matrix M(n + m, n + m);
    M.topLeftCorner(n, n) = Q + gamma * A.transpose() * P * A;
    M.topRightCorner(n, m) = gamma * A.transpose() * P * B;
    M.bottomLeftCorner(m, n) = gamma * B.transpose() * P * A;
    M.bottomRightCorner(m, m) = R + gamma * B.transpose() * P * B;
    return 0.5 * (M + M.transpose());
}

YannCritic build_yann_critic(const Matrix& A, const Matrix& B, const Matrix& Q, const Matrix& R, const Matrix& P,
                             double gamma, nets::MlpSpec spec) {
    spec.input = A.rows() + B.cols();
    spec.output = 1;
    spec.output_activation = nets::Activation::Identity;
    spec.zero_output_init = true;
    return {critic_matrix(A, B, Q, R, P, gamma), A.rows(), nets::Mlp(spec)};
}

YannCritic build_yann_critic(const explicit_mpc::MpcFormulation& f, nets::MlpSpec spec) {
    return build_yann_critic(f.system.A, f.system.B, f.Q, f.R, f.P, f.gamma, std::move(spec));
}

std::unique_ptr<nets::ActorModel> actor_from_json(const nlohmann::json& j) {
    const auto kind = require(j, "kind").get<std::string>();
    if (kind == "yann_actor") {
        return std::make_unique<YannActor>(explicit_mpc::law_from_json(require(j, "law")),
                                           nets::Mlp::from_json(require(j, "residual")),
                                           nets::box_from_json(require(j, "input_box")));
    }
    if (kind == "explicit_mpc") {
        return std::make_unique<ExplicitMpcPolicy>(explicit_mpc::law_from_json(require(j, "law")),
                                                   nets::box_from_json(require(j, "input_box")));
    }
    if (kind == "vanilla_actor") {
        return std::make_unique<nets::VanillaActor>(nets::Mlp::from_json(require(j, "net")),
                                                    nets::box_from_json(require(j, "input_box")));
    }
    throw ConfigError("unknown actor kind '" + kind + "'");
}

std::unique_ptr<nets::CriticModel> critic_from_json(const nlohmann::json& j) {
    const auto kind = require(j, "kind").get<std::string>();
    const auto n = require(j, "state_size").get<Eigen::Index>();
    if (kind == "yann_critic") {
        return std::make_unique<YannCritic>(matrix_from_json(require(j, "M")), n,
                                            nets::Mlp::from_json(require(j, "residual")));
    }
    if (kind == "vanilla_critic") {
        return std::make_unique<nets::VanillaCritic>(nets::Mlp::from_json(require(j, "net")), n);
    }
    throw ConfigError("unknown critic kind '" + kind + "'");
}

void save_model(const std::string& path, const nlohmann::json& checkpoint) { write_json_file(path, checkpoint); }

}  // namespace yannrl::yann
