#include "yannrl/numerics/types.hpp"

#include <cmath>

#include "yannrl/numerics/random.hpp"
#include "yannrl/numerics/tolerances.hpp"

namespace yannrl {

bool Box::contains(const Vector& v, double margin) const {
    const Vector pad = margin * width();
    return ((v - lower).array() >= -pad.array()).all() && ((upper - v).array() >= -pad.array()).all();
}

Vector Box::clamp(const Vector& v) const { return v.cwiseMax(lower).cwiseMin(upper); }

double Polyhedron::max_violation(const Vector& x) const {
    if (A.rows() == 0) {
        return -std::numeric_limits<double>::infinity();
    }
    return (A * x - b).maxCoeff();
}

Polyhedron Polyhedron::from_box(const Box& box) {
    const auto n = box.size();
    Polyhedron p;
    p.A.resize(2 * n, n);
    p.A << Matrix::Identity(n, n), -Matrix::Identity(n, n);
    p.b.resize(2 * n);
    p.b << box.upper, -box.lower;
    return p;
}

bool all_finite(const Matrix& m) { return m.allFinite(); }

Eigen::Index first_non_finite(const Vector& v) {
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (!std::isfinite(v[i])) {
            return i;
        }
    }
    return -1;
}

const Tolerances& default_tolerances() {
    static const Tolerances tol{};
    return tol;
}

std::uint64_t Rng::below(std::uint64_t n) {
    // Rejection keeps the draw exactly uniform.
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % n;
    std::uint64_t r = engine_();
    while (r >= limit) {
        r = engine_();
    }
    return r % n;
}

double Rng::normal() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) {
        u1 = uniform();
    }
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * M_PI * u2;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

}  // namespace yannrl
