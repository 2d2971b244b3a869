#pragma once

namespace yannrl {

/// Every numerical threshold used by the library. Callers that need other
/// values copy the defaults and override fields; the bench config loader
/// does this from an optional "tolerances" object.
struct Tolerances {
    // Riccati value iteration
    double dare_step = 1e-12;
    double dare_residual = 1e-10;
    int dare_max_iterations = 1'000'000;

    // Active-set QP
    double qp_min_eigenvalue = 1e-10;
    double qp_kkt = 1e-8;
    double qp_multiplier = 1e-9;
    double qp_feasibility = 1e-9;
    double qp_step = 1e-13;
    int qp_max_iterations = 1000;

    // Simplex
    double lp_pivot = 1e-11;
    double lp_optimality = 1e-11;
    int lp_max_iterations = 20'000;
    double chebyshev_radius_cap = 1e6;

    // Multiparametric QP
    double region_radius = 1e-7;
    double region_membership = 1e-9;
    double redundancy = 1e-9;
    double rank = 1e-10;
    int mpqp_max_constraints = 30;

    // Finite differences and matrix exponential
    double fd_relative_step = 1e-6;
    int expm_taylor_order = 12;
    double expm_scaled_norm = 0.5;
};

[[nodiscard]] const Tolerances& default_tolerances();

}  // namespace yannrl
