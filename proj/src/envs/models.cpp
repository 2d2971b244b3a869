#include "yannrl/envs/models.hpp"

#include <cmath>
#include <string>

#include "yannrl/numerics/errors.hpp"

namespace yannrl::envs {

Vector cstr_dynamics(const Vector& x, const Vector& u, const CstrParams& p) {
    if (x.size() != 2 || u.size() != 1) {
        throw DimensionError("cstr_dynamics expects 2 states and 1 input");
    }
    const double C_A = x[0];
    const double T = x[1];
    if (!(T > 0.0)) {
        throw DomainError("cstr_dynamics: non-positive absolute temperature");
    }
    const double rate = p.k0 * std::exp(-p.E_over_R / T) * C_A;
    Vector dx(2);
    dx[0] = p.q / p.V * (p.C_Af - C_A) - rate;
    dx[1] = p.q / p.V * (p.T_f - T) - p.dH_R / (p.rho * p.C_p) * rate + p.UA / (p.rho * p.C_p * p.V) * (u[0] - T);
    return dx;
}

Vector fourtank_dynamics(const Vector& x, const Vector& u, const FourTankParams& p) {
    if (x.size() != 4 || u.size() != 2) {
        throw DimensionError("fourtank_dynamics expects 4 states and 2 inputs");
    }
    double outflow[4];
    for (int i = 0; i < 4; ++i) {
        outflow[i] = p.a[i] * std::sqrt(2.0 * p.g_a * std::max(x[i], 0.0));
    }
    Vector dx(4);
    dx[0] = (-outflow[0] + outflow[2] + p.gamma1 * p.k1 * u[0]) / p.A[0];
    dx[1] = (-outflow[1] + outflow[3] + p.gamma2 * p.k2 * u[1]) / p.A[1];
    dx[2] = (-outflow[2] + (1.0 - p.gamma2) * p.k2 * u[1]) / p.A[2];
    dx[3] = (-outflow[3] + (1.0 - p.gamma1) * p.k1 * u[0]) / p.A[3];
    return dx;
}

Vector extraction_dynamics(const Vector& x, const Vector& u, const ExtractionParams& p) {
    constexpr int n = kExtractionStages;
    if (x.size() != 2 * n || u.size() != 2) {
        throw DimensionError("extraction_dynamics expects 10 states and 2 inputs");
    }
    const auto conc = [&](Eigen::Index i) {
        if (x[i] < -kNegativeConcentrationTol) {
            throw DomainError("extraction_dynamics: negative concentration in state " + std::to_string(i));
        }
        return std::max(x[i], 0.0);
    };
    const double L = u[0];
    const double G = u[1];
    Vector dx(2 * n);
    for (int s = 0; s < n; ++s) {
        const double X = conc(s);
        const double Y = conc(n + s);
        const double X_in = s == 0 ? p.C_X_feed : conc(s - 1);
        const double Y_in = s == n - 1 ? p.C_Y_feed : conc(n + s + 1);
        const double X_eq = std::pow(Y / p.m, p.e);
        const double F = p.K_la * (X - X_eq) * p.V_l;
        dx[s] = (L * (X_in - X) - F) / p.V_l;
        dx[n + s] = (G * (Y_in - Y) + F) / p.V_g;
    }
    return dx;
}

}  // namespace yannrl::envs
