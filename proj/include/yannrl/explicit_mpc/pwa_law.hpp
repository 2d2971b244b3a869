#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "yannrl/explicit_mpc/condense.hpp"
#include "yannrl/numerics/errors.hpp"

namespace yannrl::explicit_mpc {

/// Polyhedral set of states sharing one optimal active set; the first move
/// there is K z + c. Region rows have unit 2-norm.
struct CriticalRegion {
    Polyhedron region;
    Matrix K;
    Vector c;
    std::vector<int> active_set;
};

struct MpqpDiagnostics {
    long candidates = 0;   // linearly independent active sets examined
    long degenerate = 0;   // singular reduced KKT systems
    long empty = 0;        // no interior after intersecting with the domain
};

struct PwaLaw {
    std::vector<CriticalRegion> regions;  // lexicographic by active set
    Polyhedron domain;
    int horizon = 1;
    Eigen::Index n = 0;
    Eigen::Index m = 0;
    double membership_tol = 1e-9;
    double radius_tol = 1e-7;
    std::uint64_t formulation_hash = 0;
    MpqpDiagnostics diagnostics;
};

/// Raised when a state inside the domain matches no region.
class LawIncompleteError : public Error {
public:
    using Error::Error;
};

/// Multiparametric solution by enumeration of linearly independent active
/// sets. Throws Error when the constraint count exceeds the enumeration
/// guard or when no region survives over a domain with interior.
[[nodiscard]] PwaLaw solve_mpqp(const CondensedQp& qp, const Polyhedron& domain,
                                const Tolerances& tol = default_tolerances());

/// Condenses f, solves over its domain box and stamps the formulation hash.
[[nodiscard]] PwaLaw solve_formulation(const MpcFormulation& f, const Tolerances& tol = default_tolerances());

/// Index of the first region containing z within the membership tolerance,
/// or -1.
[[nodiscard]] int locate_region(const PwaLaw& law, const Vector& z);

/// Region with the smallest maximum constraint violation (lowest index on ties).
[[nodiscard]] int nearest_region(const PwaLaw& law, const Vector& z);

/// K_r z + c_r of the first containing region; empty outside the domain.
/// Throws LawIncompleteError for an uncovered point inside the domain.
[[nodiscard]] std::optional<Vector> evaluate_pwa(const PwaLaw& law, const Vector& z);

/// Total extension of the law: the first containing region when there is one,
/// otherwise the affine piece of the nearest region.
[[nodiscard]] Vector evaluate_pwa_extended(const PwaLaw& law, const Vector& z);

[[nodiscard]] nlohmann::json law_to_json(const PwaLaw& law);
[[nodiscard]] PwaLaw law_from_json(const nlohmann::json& j);
void save_law(const std::string& path, const PwaLaw& law);
[[nodiscard]] PwaLaw load_law(const std::string& path);

struct LawValidation {
    int samples = 0;
    int infeasible = 0;  // online QP infeasible at the sample
    double max_deviation = 0.0;
    Vector worst_state;
};

/// Compares evaluate_pwa with online_mpc at uniform samples of `box`.
[[nodiscard]] LawValidation validate_law(const PwaLaw& law, const CondensedQp& qp, const Box& box,
                                         int samples, std::uint64_t seed);

}  // namespace yannrl::explicit_mpc
