#pragma once

#include <functional>

#include <Eigen/Dense>

namespace yannrl {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Continuous-time right-hand side f(x, u).
using DynamicsFn = std::function<Vector(const Vector&, const Vector&)>;

/// Axis-aligned box lower <= v <= upper.
struct Box {
    Vector lower;
    Vector upper;

    [[nodiscard]] Eigen::Index size() const { return lower.size(); }
    [[nodiscard]] Vector width() const { return upper - lower; }
    [[nodiscard]] Vector center() const { return 0.5 * (lower + upper); }
    [[nodiscard]] bool contains(const Vector& v, double margin = 0.0) const;
    [[nodiscard]] Vector clamp(const Vector& v) const;
};

/// Half-space description {x : A x <= b}.
struct Polyhedron {
    Matrix A;
    Vector b;

    [[nodiscard]] Eigen::Index dim() const { return A.cols(); }
    [[nodiscard]] Eigen::Index rows() const { return A.rows(); }
    [[nodiscard]] double max_violation(const Vector& x) const;
    [[nodiscard]] bool contains(const Vector& x, double tol) const { return max_violation(x) <= tol; }

    static Polyhedron from_box(const Box& box);
};

[[nodiscard]] bool all_finite(const Matrix& m);

/// Returns the index of the first non-finite entry, or -1.
[[nodiscard]] Eigen::Index first_non_finite(const Vector& v);

}  // namespace yannrl
