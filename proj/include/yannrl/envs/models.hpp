#pragma once

#include "yannrl/numerics/types.hpp"

namespace yannrl::envs {

/// Jacketed CSTR with one exothermic first-order reaction A -> B.
/// States [C_A (mol/L), T (K)], input [T_c (K)], time in minutes.
struct CstrParams {
    double q = 100.0;            // L/min
    double V = 100.0;            // L
    double C_Af = 1.0;           // mol/L
    double T_f = 350.0;          // K
    double rho = 1000.0;         // g/L
    double C_p = 0.239;          // J/(g K)
    double dH_R = -5.0e4;        // J/mol
    double E_over_R = 8750.0;    // K
    double k0 = 7.2e10;          // 1/min
    double UA = 5.0e4;           // J/(min K)
};

/// Throws DomainError for T <= 0.
[[nodiscard]] Vector cstr_dynamics(const Vector& x, const Vector& u, const CstrParams& p);

/// Quadruple-tank process. States [h1..h4] (m), inputs [v1, v2] (V).
struct FourTankParams {
    double a[4] = {0.0035, 0.0030, 0.0020, 0.0025};  // outlet areas
    double A[4] = {1.0, 1.0, 1.0, 1.0};              // tank areas
    double g_a = 9.81;
    double gamma1 = 0.2;
    double gamma2 = 0.2;
    double k1 = 0.00085;
    double k2 = 0.00095;
};

/// Heights are clamped at zero before the square roots.
[[nodiscard]] Vector fourtank_dynamics(const Vector& x, const Vector& u, const FourTankParams& p);

/// Five-stage countercurrent extraction column.
/// States [C_X1..C_X5, C_Y1..C_Y5], inputs [L, G]. Liquid enters stage 1
/// at C_X,feed and gas enters stage 5 at C_Y,feed.
struct ExtractionParams {
    double V_l = 5.0;
    double V_g = 5.0;
    double K_la = 5.0;   // 1/min
    double m = 1.0;
    double e = 2.0;
    double C_X_feed = 0.6;
    double C_Y_feed = 0.05;
};

inline constexpr int kExtractionStages = 5;

/// Concentrations within kNegativeConcentrationTol of zero are clamped;
/// anything more negative throws DomainError.
[[nodiscard]] Vector extraction_dynamics(const Vector& x, const Vector& u, const ExtractionParams& p);

inline constexpr double kNegativeConcentrationTol = 1e-6;

}  // namespace yannrl::envs
