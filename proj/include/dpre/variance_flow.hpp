#pragma once

// Deterministic variance dynamics: the maps M, M_V and M^{-1}, their
// iteration, arctan coordinates, the limiting variance function R and the
// desk-scale asymptotics checks built on them.

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "dpre/disorder.hpp"

namespace dpre {

// (1/b)((1+x)^s - 1)
double map_m(int b, int s, double x);
// (1/b)((1+x)^s (1+v)^{s-1} - 1)
double map_m_v(int b, int s, double v, double x);
// Inverse of map_m for b = s: (1 + b y)^{1/b} - 1.
double map_m_inverse(int b, double y);

// M_v applied `steps` times to x without storing the orbit.
// Throws NumericError when the value exceeds 1e300.
double iterate_map(int b, int s, double v, double x, std::int64_t steps);

struct FlowTrace {
    int b = 2;
    int s = 2;
    double v = 0.0;
    std::vector<double> values;                // rho_0 .. rho_K
    std::optional<std::vector<double>> coords; // r_0 .. r_K in [0, 1)
};

/// rho_k = M_v^k(0) for k = 0..steps.
FlowTrace iterate_variance(int b, int s, double v, std::int64_t steps);

/// r_k = (2/pi) atan(2 n_eff rho_k / (pi kappa^2)).
FlowTrace arctan_coords(FlowTrace trace, double n_eff);
// Inverse of the coordinate change for one value.
double coord_to_variance(int b, double coord, double n_eff);

// L = floor(log n) and v = kappa_hat^2 / n_eff(n, r)^2.
struct CriticalWindow {
    std::int64_t L;
    double v;
};
CriticalWindow critical_window(int b, std::int64_t n, double r);

/// L rho*/kappa^2 - (1 + eta log L / L + r / L) with rho* = M_v^{n-L}(0).
double lemma32_residual(int b, std::int64_t n, double r);

/// M_v^n(0) - M^L(M_v^{n-L}(0)) >= 0.
double l2_gap(int b, std::int64_t n, double r);

struct RFunctionResult {
    double value; // estimate at the largest grid point
    std::vector<std::pair<std::int64_t, double>> sequence;
};

/// M^N(V_{N,r}) with V_{N,r} = (kappa^2/N)(1 + eta log N / N + r / N) for
/// each N of an increasing grid.
RFunctionResult r_function(int b, double r, const std::vector<std::int64_t>& n_grid);

/// Move along R by integer shifts with the exact relation R(r+1) = M(R(r)):
/// forward by map_m, backward by map_m_inverse.
double shift_r_function(int b, double value_at_r, int shift);

/// R_{b,s}(r) for b < s from the small-r expansion
/// R(x) = x + b(s-1)/(2(s-b)) x^2 + O(x^3) at x = (b/s)^K r, pushed forward K times.
double r_function_subcritical(int b, int s, double r, int K);

struct ScaledVariance {
    std::int64_t n;
    double value;
};

/// Per n: rho_n for v = tilt_variance(law, beta_hat / n), scaled by n^2
/// below kappa_hat, by log n at kappa_hat, and unscaled above. Divergent
/// orbits report +inf.
std::vector<ScaledVariance> prop22_check(int b, double beta_hat,
                                         const std::vector<std::int64_t>& n_grid,
                                         const DisorderLaw& law = DisorderLaw::gaussian());

} // namespace dpre
