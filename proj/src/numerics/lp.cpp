#include "yannrl/numerics/lp.hpp"

#include <cmath>
#include <vector>

#include "yannrl/numerics/errors.hpp"

namespace yannrl::numerics {

namespace {

// Dense tableau. Rows 0..m-1 are constraints, row m holds reduced costs;
// the last column is the right-hand side (and minus the objective in row m).
class Tableau {
public:
    Tableau(Eigen::Index rows, Eigen::Index cols) : T_(Matrix::Zero(rows + 1, cols + 1)), basis_(rows, -1) {}

    double& at(Eigen::Index r, Eigen::Index c) { return T_(r, c); }
    double& rhs(Eigen::Index r) { return T_(r, T_.cols() - 1); }
    [[nodiscard]] double rhs(Eigen::Index r) const { return T_(r, T_.cols() - 1); }
    [[nodiscard]] Eigen::Index rows() const { return T_.rows() - 1; }
    [[nodiscard]] Eigen::Index cols() const { return T_.cols() - 1; }
    std::vector<Eigen::Index>& basis() { return basis_; }

    void set_cost(const Vector& cost) {
        const auto m = rows();
        T_.row(m).setZero();
        T_.row(m).head(cols()) = cost.transpose();
        for (Eigen::Index i = 0; i < m; ++i) {
            const double cb = cost[basis_[i]];
            if (cb != 0.0) {
                T_.row(m) -= cb * T_.row(i);
            }
        }
    }

    [[nodiscard]] double objective() const { return -T_(rows(), cols()); }

    void pivot(Eigen::Index r, Eigen::Index c) {
        T_.row(r) /= T_(r, c);
        for (Eigen::Index i = 0; i < T_.rows(); ++i) {
            if (i != r) {
                const double factor = T_(i, c);
                if (factor != 0.0) {
                    T_.row(i) -= factor * T_.row(r);
                }
            }
        }
        T_(r, c) = 1.0;
        basis_[r] = c;
    }

    enum class Outcome { Optimal, Unbounded, IterationLimit };

    // Bland's rule: lowest-index improving column enters, lowest-index basic
    // variable leaves among tied ratios.
    Outcome run(Eigen::Index allowed_cols, const Tolerances& tol) {
        const auto m = rows();
        for (int it = 0; it < tol.lp_max_iterations; ++it) {
            Eigen::Index enter = -1;
            for (Eigen::Index j = 0; j < allowed_cols; ++j) {
                if (T_(m, j) < -tol.lp_optimality) {
                    enter = j;
                    break;
                }
            }
            if (enter < 0) {
                return Outcome::Optimal;
            }
            Eigen::Index leave = -1;
            double best = std::numeric_limits<double>::infinity();
            for (Eigen::Index i = 0; i < m; ++i) {
                const double a = T_(i, enter);
                if (a > tol.lp_pivot) {
                    const double ratio = std::max(0.0, rhs(i)) / a;
                    if (leave < 0) {
                        best = ratio;
                        leave = i;
                        continue;
                    }
                    const double slack = 1e-12 * std::max(1.0, std::abs(best));
                    if (ratio < best - slack) {
                        best = ratio;
                        leave = i;
                    } else if (std::abs(ratio - best) <= slack && basis_[i] < basis_[leave]) {
                        best = std::min(best, ratio);
                        leave = i;
                    }
                }
            }
            if (leave < 0) {
                return Outcome::Unbounded;
            }
            pivot(leave, enter);
        }
        return Outcome::IterationLimit;
    }

private:
    Matrix T_;
    std::vector<Eigen::Index> basis_;
};

}  // namespace

LpResult lp_minimize(const Vector& c, const Matrix& G, const Vector& w, const Tolerances& tol) {
    const auto m = G.rows();
    const auto n = G.cols();
    if (c.size() != n || w.size() != m) {
        throw DimensionError("lp_minimize: inconsistent dimensions");
    }
    LpResult result;
    if (m == 0) {
        if (c.cwiseAbs().maxCoeff() > tol.lp_optimality) {
            result.status = LpStatus::Unbounded;
            return result;
        }
        result.status = LpStatus::Optimal;
        result.x = Vector::Zero(n);
        return result;
    }

    // Columns: x+ (n), x- (n), slack (m), artificial (one per negative rhs).
    std::vector<Eigen::Index> negative_rows;
    for (Eigen::Index i = 0; i < m; ++i) {
        if (w[i] < 0.0) {
            negative_rows.push_back(i);
        }
    }
    const Eigen::Index structural = 2 * n + m;
    const auto artificial = static_cast<Eigen::Index>(negative_rows.size());
    Tableau tab(m, structural + artificial);
    Eigen::Index next_art = structural;
    for (Eigen::Index i = 0; i < m; ++i) {
        const double sign = w[i] < 0.0 ? -1.0 : 1.0;
        for (Eigen::Index j = 0; j < n; ++j) {
            tab.at(i, j) = sign * G(i, j);
            tab.at(i, n + j) = -sign * G(i, j);
        }
        tab.at(i, 2 * n + i) = sign;
        tab.rhs(i) = sign * w[i];
        if (w[i] < 0.0) {
            tab.at(i, next_art) = 1.0;
            tab.basis()[i] = next_art++;
        } else {
            tab.basis()[i] = 2 * n + i;
        }
    }

    const double scale = std::max(1.0, w.cwiseAbs().maxCoeff());
    if (artificial > 0) {
        Vector phase1 = Vector::Zero(structural + artificial);
        phase1.tail(artificial).setOnes();
        tab.set_cost(phase1);
        if (tab.run(structural + artificial, tol) == Tableau::Outcome::IterationLimit) {
            throw ConvergenceError("lp_minimize: phase 1 iteration limit", tab.objective());
        }
        if (tab.objective() > 1e-9 * scale) {
            result.status = LpStatus::Infeasible;
            return result;
        }
        // Pivot remaining zero-level artificials out where possible.
        for (Eigen::Index i = 0; i < m; ++i) {
            if (tab.basis()[i] >= structural) {
                for (Eigen::Index j = 0; j < structural; ++j) {
                    if (std::abs(tab.at(i, j)) > 1e-9) {
                        tab.pivot(i, j);
                        break;
                    }
                }
            }
        }
    }

    Vector cost = Vector::Zero(structural + artificial);
    cost.head(n) = c;
    cost.segment(n, n) = -c;
    tab.set_cost(cost);
    const auto outcome = tab.run(structural, tol);
    if (outcome == Tableau::Outcome::IterationLimit) {
        throw ConvergenceError("lp_minimize: phase 2 iteration limit", tab.objective());
    }
    if (outcome == Tableau::Outcome::Unbounded) {
        result.status = LpStatus::Unbounded;
        return result;
    }
    result.status = LpStatus::Optimal;
    result.x = Vector::Zero(n);
    for (Eigen::Index i = 0; i < m; ++i) {
        const auto b = tab.basis()[i];
        if (b < n) {
            result.x[b] += tab.rhs(i);
        } else if (b < 2 * n) {
            result.x[b - n] -= tab.rhs(i);
        }
    }
    result.value = c.dot(result.x);
    return result;
}

std::optional<ChebyshevBall> chebyshev_ball(const Matrix& G, const Vector& w, const Tolerances& tol) {
    const auto n = G.cols();
    if (w.size() != G.rows()) {
        throw DimensionError("chebyshev_ball: inconsistent dimensions");
    }
    std::vector<Eigen::Index> keep;
    for (Eigen::Index i = 0; i < G.rows(); ++i) {
        if (G.row(i).norm() > 1e-14) {
            keep.push_back(i);
        } else if (w[i] < -tol.qp_feasibility) {
            return std::nullopt;
        }
    }
    const auto rows = static_cast<Eigen::Index>(keep.size());
    Matrix Gb = Matrix::Zero(rows + 2, n + 1);
    Vector wb = Vector::Zero(rows + 2);
    for (Eigen::Index k = 0; k < rows; ++k) {
        const auto i = keep[static_cast<std::size_t>(k)];
        Gb.row(k).head(n) = G.row(i);
        Gb(k, n) = G.row(i).norm();
        wb[k] = w[i];
    }
    Gb(rows, n) = 1.0;
    wb[rows] = tol.chebyshev_radius_cap;
    Gb(rows + 1, n) = -1.0;
    Vector c = Vector::Zero(n + 1);
    c[n] = -1.0;
    const LpResult lp = lp_minimize(c, Gb, wb, tol);
    if (lp.status != LpStatus::Optimal) {
        return std::nullopt;
    }
    return ChebyshevBall{lp.x.head(n), lp.x[n]};
}

std::optional<ChebyshevBall> lp_feasible(const Matrix& G, const Vector& w, double strict_tol,
                                         const Tolerances& tol) {
    auto ball = chebyshev_ball(G, w, tol);
    if (ball && ball->radius > strict_tol) {
        return ball;
    }
    return std::nullopt;
}

}  // namespace yannrl::numerics
