#include "yannrl/explicit_mpc/pwa_law.hpp"

#include <cinttypes>
#include <cstdio>
#include <limits>

#include "yannrl/numerics/json_io.hpp"
#include "yannrl/numerics/lp.hpp"
#include "yannrl/numerics/random.hpp"

namespace yannrl::explicit_mpc {

namespace {

constexpr const char* kLawFormat = "yannrl-pwa-law";

/// Removes zero rows and scales the rest to unit norm. Returns false when a
/// zero row is violated, i.e. the set is empty.
bool normalize_rows(Matrix& A, Vector& b, double tol) {
    std::vector<Eigen::Index> keep;
    for (Eigen::Index i = 0; i < A.rows(); ++i) {
        const double norm = A.row(i).norm();
        if (norm <= 1e-12) {
            if (b[i] < -tol) {
                return false;
            }
            continue;
        }
        A.row(i) /= norm;
        b[i] /= norm;
        keep.push_back(i);
    }
    A = A(keep, Eigen::all).eval();
    b = b(keep).eval();
    return true;
}

/// Drops rows implied by the others: row i goes when max a_i'x over the
/// remaining rows does not exceed b_i.
Polyhedron remove_redundant(Polyhedron p, const Tolerances& tol) {
    std::vector<bool> active(static_cast<std::size_t>(p.rows()), true);
    for (Eigen::Index i = 0; i < p.rows(); ++i) {
        std::vector<Eigen::Index> others;
        for (Eigen::Index k = 0; k < p.rows(); ++k) {
            if (k != i && active[static_cast<std::size_t>(k)]) {
                others.push_back(k);
            }
        }
        if (others.empty()) {
            continue;
        }
        const Vector c = -p.A.row(i).transpose();
        const auto lp = numerics::lp_minimize(c, p.A(others, Eigen::all), p.b(others), tol);
        if (lp.status == numerics::LpStatus::Optimal && -lp.value <= p.b[i] + tol.redundancy) {
            active[static_cast<std::size_t>(i)] = false;
        }
    }
    std::vector<Eigen::Index> keep;
    for (Eigen::Index i = 0; i < p.rows(); ++i) {
        if (active[static_cast<std::size_t>(i)]) {
            keep.push_back(i);
        }
    }
    return {p.A(keep, Eigen::all), p.b(keep)};
}

class Enumerator {
public:
    Enumerator(const CondensedQp& qp, const Polyhedron& domain, const Tolerances& tol)
        : qp_(qp), domain_(domain), tol_(tol) {
        const Eigen::LDLT<Matrix> ldlt(qp.H);
        HiF_ = ldlt.solve(qp.F.transpose());
        HiG_ = ldlt.solve(qp.G.transpose());
        max_size_ = qp.H.rows();
    }

    void run(PwaLaw& law) {
        law_ = &law;
        std::vector<int> set;
        visit(0, set);
    }

private:
    void visit(int start, std::vector<int>& set) {
        ++law_->diagnostics.candidates;
        examine(set);
        if (static_cast<Eigen::Index>(set.size()) == max_size_) {
            return;
        }
        for (int i = start; i < qp_.G.rows(); ++i) {
            set.push_back(i);
            if (independent(set)) {
                visit(i + 1, set);
            }
            set.pop_back();
        }
    }

    bool independent(const std::vector<int>& set) const {
        const Matrix rows = qp_.G(set, Eigen::all);
        Eigen::FullPivLU<Matrix> lu(rows);
        lu.setThreshold(tol_.rank);
        return lu.rank() == static_cast<Eigen::Index>(set.size());
    }

    void examine(const std::vector<int>& set) {
        const auto n = qp_.n;
        const auto nc = qp_.G.rows();
        Matrix T = -HiF_;
        Vector t = Vector::Zero(qp_.H.rows());
        Matrix Lx(0, n);
        Vector lc(0);
        if (!set.empty()) {
            const Matrix GA = qp_.G(set, Eigen::all);
            const Matrix HiGA = HiG_(Eigen::all, set);
            const Matrix M = GA * HiGA;
            const Eigen::LDLT<Matrix> ldlt(M);
            if (ldlt.info() != Eigen::Success || ldlt.rcond() < tol_.rank) {
                ++law_->diagnostics.degenerate;
                return;
            }
            // multipliers lambda = Lx z + lc from the reduced KKT system
            Lx = -ldlt.solve(Matrix(qp_.S(set, Eigen::all) + GA * HiF_));
            lc = -ldlt.solve(Vector(qp_.W(set)));
            T -= HiGA * Lx;
            t = -HiGA * lc;
            // simple bounds hold exactly rather than to rounding
            for (int i : set) {
                Eigen::Index j = -1;
                if (qp_.G.row(i).cwiseAbs().maxCoeff(&j) > 0.0 &&
                    (qp_.G.row(i).array() != 0.0).count() == 1) {
                    const double g = qp_.G(i, j);
                    T.row(j) = qp_.S.row(i) / g;
                    t[j] = qp_.W[i] / g;
                }
            }
        }
        std::vector<bool> in_set(static_cast<std::size_t>(nc), false);
        for (int i : set) {
            in_set[static_cast<std::size_t>(i)] = true;
        }
        const Eigen::Index rows = (nc - static_cast<Eigen::Index>(set.size())) + static_cast<Eigen::Index>(set.size()) +
                                  domain_.rows();
        Matrix A(rows, n);
        Vector b(rows);
        Eigen::Index r = 0;
        for (Eigen::Index i = 0; i < nc; ++i) {
            if (in_set[static_cast<std::size_t>(i)]) {
                continue;
            }
            A.row(r) = qp_.G.row(i) * T - qp_.S.row(i);
            b[r] = qp_.W[i] - qp_.G.row(i).dot(t);
            ++r;
        }
        A.middleRows(r, Lx.rows()) = -Lx;
        b.segment(r, lc.size()) = lc;
        r += Lx.rows();
        A.middleRows(r, domain_.rows()) = domain_.A;
        b.segment(r, domain_.rows()) = domain_.b;

        if (!normalize_rows(A, b, tol_.region_membership) ||
            !numerics::lp_feasible(A, b, tol_.region_radius, tol_)) {
            ++law_->diagnostics.empty;
            return;
        }
        CriticalRegion region;
        region.region = remove_redundant({A, b}, tol_);
        region.K = T.topRows(qp_.m);
        region.c = t.head(qp_.m);
        region.active_set = set;
        law_->regions.push_back(std::move(region));
    }

    const CondensedQp& qp_;
    const Polyhedron& domain_;
    const Tolerances& tol_;
    Matrix HiF_;
    Matrix HiG_;
    Eigen::Index max_size_ = 0;
    PwaLaw* law_ = nullptr;
};

std::string hex64(std::uint64_t v) {
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016" PRIx64, v);
    return buf;
}

}  // namespace

PwaLaw solve_mpqp(const CondensedQp& qp, const Polyhedron& domain, const Tolerances& tol) {
    if (qp.G.rows() > tol.mpqp_max_constraints) {
        throw Error("multiparametric enumeration limited to " + std::to_string(tol.mpqp_max_constraints) +
                    " constraints, got " + std::to_string(qp.G.rows()));
    }
    if (domain.dim() != qp.n || qp.H.rows() != qp.horizon * qp.m) {
        throw DimensionError("domain and QP dimensions disagree");
    }
    const Eigen::SelfAdjointEigenSolver<Matrix> eig(qp.H, Eigen::EigenvaluesOnly);
    if (eig.eigenvalues().minCoeff() <= tol.qp_min_eigenvalue) {
        throw NumericalError("condensed Hessian is not positive definite");
    }
    PwaLaw law;
    law.horizon = qp.horizon;
    law.n = qp.n;
    law.m = qp.m;
    law.membership_tol = tol.region_membership;
    law.radius_tol = tol.region_radius;
    Matrix dA = domain.A;
    Vector db = domain.b;
    if (!normalize_rows(dA, db, tol.region_membership)) {
        throw Error("empty parameter domain");
    }
    law.domain = {dA, db};
    Enumerator(qp, law.domain, tol).run(law);
    if (law.regions.empty() && numerics::lp_feasible(dA, db, tol.region_radius, tol)) {
        throw Error("no critical region found over a domain with interior");
    }
    return law;
}

PwaLaw solve_formulation(const MpcFormulation& f, const Tolerances& tol) {
    PwaLaw law = solve_mpqp(condense(f), Polyhedron::from_box(f.domain), tol);
    law.formulation_hash = formulation_hash(f);
    return law;
}

int locate_region(const PwaLaw& law, const Vector& z) {
    for (std::size_t r = 0; r < law.regions.size(); ++r) {
        if (law.regions[r].region.contains(z, law.membership_tol)) {
            return static_cast<int>(r);
        }
    }
    return -1;
}

int nearest_region(const PwaLaw& law, const Vector& z) {
    int best = -1;
    double best_violation = std::numeric_limits<double>::infinity();
    for (std::size_t r = 0; r < law.regions.size(); ++r) {
        const double v = law.regions[r].region.max_violation(z);
        if (v < best_violation) {
            best_violation = v;
            best = static_cast<int>(r);
        }
    }
    return best;
}

std::optional<Vector> evaluate_pwa(const PwaLaw& law, const Vector& z) {
    if (z.size() != law.n) {
        throw DimensionError("state has the wrong dimension for this law");
    }
    if (!law.domain.contains(z, law.membership_tol)) {
        return std::nullopt;
    }
    const int r = locate_region(law, z);
    if (r < 0) {
        throw LawIncompleteError("no critical region contains a state inside the domain");
    }
    const auto& region = law.regions[static_cast<std::size_t>(r)];
    return Vector(region.K * z + region.c);
}

Vector evaluate_pwa_extended(const PwaLaw& law, const Vector& z) {
    if (z.size() != law.n) {
        throw DimensionError("state has the wrong dimension for this law");
    }
    int r = locate_region(law, z);
    if (r < 0) {
        r = nearest_region(law, z);
    }
    if (r < 0) {
        throw LawIncompleteError("law has no regions");
    }
    const auto& region = law.regions[static_cast<std::size_t>(r)];
    return region.K * z + region.c;
}

nlohmann::json law_to_json(const PwaLaw& law) {
    nlohmann::json j;
    j["format"] = kLawFormat;
    j["version"] = 1;
    j["horizon"] = law.horizon;
    j["n_states"] = law.n;
    j["n_inputs"] = law.m;
    j["formulation_hash"] = hex64(law.formulation_hash);
    j["tolerances"] = {{"region_membership", law.membership_tol}, {"region_radius", law.radius_tol}};
    j["diagnostics"] = {{"candidates", law.diagnostics.candidates},
                        {"degenerate", law.diagnostics.degenerate},
                        {"empty", law.diagnostics.empty}};
    j["domain"] = {{"A", matrix_to_json(law.domain.A)}, {"b", vector_to_json(law.domain.b)}};
    auto regions = nlohmann::json::array();
    for (const auto& r : law.regions) {
        regions.push_back({{"active_set", r.active_set},
                           {"A", matrix_to_json(r.region.A)},
                           {"b", vector_to_json(r.region.b)},
                           {"K", matrix_to_json(r.K)},
                           {"c", vector_to_json(r.c)}});
    }
    j["regions"] = std::move(regions);
    return j;
}

PwaLaw law_from_json(const nlohmann::json& j) {
    if (j.value("format", std::string()) != kLawFormat) {
        throw ConfigError("not a piecewise-affine law file");
    }
    if (j.value("version", 0) != 1) {
        throw ConfigError("unsupported law file version");
    }
    PwaLaw law;
    law.horizon = require(j, "horizon").get<int>();
    law.n = require(j, "n_states").get<Eigen::Index>();
    law.m = require(j, "n_inputs").get<Eigen::Index>();
    law.formulation_hash = std::stoull(require(j, "formulation_hash").get<std::string>(), nullptr, 16);
    const auto& tol = require(j, "tolerances");
    law.membership_tol = require(tol, "region_membership").get<double>();
    law.radius_tol = require(tol, "region_radius").get<double>();
    if (j.contains("diagnostics")) {
        const auto& d = j["diagnostics"];
        law.diagnostics.candidates = d.value("candidates", 0L);
        law.diagnostics.degenerate = d.value("degenerate", 0L);
        law.diagnostics.empty = d.value("empty", 0L);
    }
    const auto& domain = require(j, "domain");
    law.domain = {matrix_from_json(require(domain, "A"), law.n), vector_from_json(require(domain, "b"))};
    for (const auto& r : require(j, "regions")) {
        CriticalRegion region;
        region.active_set = require(r, "active_set").get<std::vector<int>>();
        region.region = {matrix_from_json(require(r, "A"), law.n), vector_from_json(require(r, "b"))};
        region.K = matrix_from_json(require(r, "K"), law.n);
        region.c = vector_from_json(require(r, "c"));
        if (region.K.rows() != law.m || region.K.cols() != law.n || region.c.size() != law.m ||
            region.region.A.rows() != region.region.b.size()) {
            throw ConfigError("critical region with inconsistent dimensions");
        }
        law.regions.push_back(std::move(region));
    }
    return law;
}

void save_law(const std::string& path, const PwaLaw& law) { write_json_file(path, law_to_json(law)); }

PwaLaw load_law(const std::string& path) { return law_from_json(read_json_file(path)); }

LawValidation validate_law(const PwaLaw& law, const CondensedQp& qp, const Box& box, int samples,
                           std::uint64_t seed) {
    LawValidation report;
    report.worst_state = box.center();
    Rng rng(seed);
    Vector z(box.size());
    for (int s = 0; s < samples; ++s) {
        for (Eigen::Index i = 0; i < z.size(); ++i) {
            z[i] = rng.uniform(box.lower[i], box.upper[i]);
        }
        ++report.samples;
        const auto online = online_mpc(qp, z);
        if (!online) {
            ++report.infeasible;
            continue;
        }
        double deviation = std::numeric_limits<double>::infinity();
        try {
            const auto explicit_move = evaluate_pwa(law, z);
            if (explicit_move) {
                deviation = (*explicit_move - *online).lpNorm<Eigen::Infinity>();
            }
        } catch (const LawIncompleteError&) {
        }
        if (!(deviation <= report.max_deviation)) {
            report.max_deviation = deviation;
            report.worst_state = z;
        }
    }
    return report;
}

}  // namespace yannrl::explicit_mpc
