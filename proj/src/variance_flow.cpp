#include "dpre/variance_flow.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "dpre/errors.hpp"
#include "dpre/scaling.hpp"

namespace dpre {

namespace {

constexpr double kOverflow = 1e300;

void require_nonnegative(double x, const char* what)
{
    if (!(x >= 0.0)) {
        throw ArgumentError(std::string(what) + " must be >= 0");
    }
}

void require_critical(int b, std::int64_t n)
{
    if (b < 2) {
        throw ArgumentError("need b >= 2");
    }
    if (n < 8) {
        throw ArgumentError("need n >= 8 so that floor(log n) >= 2");
    }
}

} // namespace

double map_m(int b, int s, double x)
{
    require_nonnegative(x, "x");
    return std::expm1(s * std::log1p(x)) / b;
}

double map_m_v(int b, int s, double v, double x)
{
    require_nonnegative(x, "x");
    require_nonnegative(v, "v");
    return std::expm1(s * std::log1p(x) + (s - 1) * std::log1p(v)) / b;
}

double map_m_inverse(int b, double y)
{
    require_nonnegative(y, "y");
    return std::expm1(std::log1p(b * y) / b);
}

double iterate_map(int b, int s, double v, double x, std::int64_t steps)
{
    require_nonnegative(x, "x");
    require_nonnegative(v, "v");
    const double shift = (s - 1) * std::log1p(v);
    for (std::int64_t k = 0; k < steps; ++k) {
        x = std::expm1(s * std::log1p(x) + shift) / b;
        if (!(x <= kOverflow)) {
            throw NumericError("variance orbit exceeds 1e300 at step " + std::to_string(k + 1));
        }
    }
    return x;
}

FlowTrace iterate_variance(int b, int s, double v, std::int64_t steps)
{
    if (steps < 0) {
        throw ArgumentError("steps must be >= 0");
    }
    FlowTrace trace{b, s, v, {}, std::nullopt};
    trace.values.reserve(static_cast<std::size_t>(steps) + 1);
    double x = 0.0;
    trace.values.push_back(x);
    for (std::int64_t k = 0; k < steps; ++k) {
        try {
            x = iterate_map(b, s, v, x, 1);
        } catch (const NumericError&) {
            throw NumericError("variance orbit exceeds 1e300 at step " + std::to_string(k + 1));
        }
        trace.values.push_back(x);
    }
    return trace;
}

FlowTrace arctan_coords(FlowTrace trace, double n_eff)
{
    if (!(n_eff > 0.0)) {
        throw ArgumentError("n_eff must be positive");
    }
    const double kappa_sq = constants(trace.b).kappa_sq;
    const double scale = 2.0 * n_eff / (std::numbers::pi * kappa_sq);
    std::vector<double> coords;
    coords.reserve(trace.values.size());
    for (double rho : trace.values) {
        coords.push_back(2.0 / std::numbers::pi * std::atan(scale * rho));
    }
    trace.coords = std::move(coords);
    return trace;
}

double coord_to_variance(int b, double coord, double n_eff)
{
    const double kappa_sq = constants(b).kappa_sq;
    return std::numbers::pi * kappa_sq / (2.0 * n_eff) * std::tan(std::numbers::pi * coord / 2.0);
}

CriticalWindow critical_window(int b, std::int64_t n, double r)
{
    require_critical(b, n);
    const auto c = constants(b);
    const double ne = n_eff(b, n, r);
    return {static_cast<std::int64_t>(std::floor(std::log(static_cast<double>(n)))),
            c.kappa_hat * c.kappa_hat / (ne * ne)};
}

double lemma32_residual(int b, std::int64_t n, double r)
{
    const auto [L, v] = critical_window(b, n, r);
    const auto c = constants(b);
    const double rho = iterate_map(b, b, v, 0.0, n - L);
    const double Ld = static_cast<double>(L);
    return Ld * rho / c.kappa_sq - (1.0 + c.eta * std::log(Ld) / Ld + r / Ld);
}

double l2_gap(int b, std::int64_t n, double r)
{
    const auto [L, v] = critical_window(b, n, r);
    const double head = iterate_map(b, b, v, 0.0, n - L);
    const double full = iterate_map(b, b, v, head, L);
    const double coarse = iterate_map(b, b, 0.0, head, L);
    return full - coarse;
}

RFunctionResult r_function(int b, double r, const std::vector<std::int64_t>& n_grid)
{
    if (n_grid.empty()) {
        throw ArgumentError("r_function needs a nonempty grid");
    }
    if (n_grid.back() < 100000) {
        throw ArgumentError("r_function grid must reach N >= 1e5");
    }
    const auto c = constants(b);
    RFunctionResult out{0.0, {}};
    std::int64_t previous = 0;
    for (const std::int64_t N : n_grid) {
        if (N <= previous) {
            throw ArgumentError("r_function grid must be increasing and positive");
        }
        previous = N;
        const double Nd = static_cast<double>(N);
        const double seed = c.kappa_sq / Nd * (1.0 + c.eta * std::log(Nd) / Nd + r / Nd);
        if (!(seed > 0.0)) {
            throw ArgumentError("V_{N,r} is not positive; grid too small for r");
        }
        double x = seed;
        for (std::int64_t k = 0; k < N; ++k) {
            x = map_m(b, b, x);
            if (x > 1e6) {
                throw NumericError("R-function iteration diverged (r too large for N=" +
                                   std::to_string(N) + ")");
            }
        }
        out.sequence.emplace_back(N, x);
        out.value = x;
    }
    return out;
}

double shift_r_function(int b, double value_at_r, int shift)
{
    double x = value_at_r;
    for (int k = 0; k < shift; ++k) {
        x = map_m(b, b, x);
    }
    for (int k = 0; k > shift; --k) {
        x = map_m_inverse(b, x);
    }
    return x;
}

double r_function_subcritical(int b, int s, double r, int K)
{
    if (b >= s) {
        throw ArgumentError("r_function_subcritical needs b < s");
    }
    require_nonnegative(r, "r");
    if (K < 0) {
        throw ArgumentError("K must be >= 0");
    }
    const double x = std::pow(static_cast<double>(b) / s, K) * r;
    if (x >= 1e-6) {
        throw ArgumentError("K too small: seed (b/s)^K r must be < 1e-6");
    }
    const double quad = b * (s - 1.0) / (2.0 * (s - b));
    double value = x + quad * x * x;
    for (int k = 0; k < K; ++k) {
        value = map_m(b, s, value);
    }
    return value;
}

std::vector<ScaledVariance> prop22_check(int b, double beta_hat,
                                         const std::vector<std::int64_t>& n_grid,
                                         const DisorderLaw& law)
{
    require_nonnegative(beta_hat, "beta_hat");
    const double kappa_hat = constants(b).kappa_hat;
    const bool critical = std::abs(beta_hat - kappa_hat) <= 1e-12 * kappa_hat;
    std::vector<ScaledVariance> out;
    for (const std::int64_t n : n_grid) {
        if (n < 1) {
            throw ArgumentError("prop22_check grid entries must be >= 1");
        }
        const double nd = static_cast<double>(n);
        const double v = tilt_variance(law, beta_hat / nd);
        double rho = std::numeric_limits<double>::infinity();
        try {
            rho = iterate_map(b, b, v, 0.0, n);
        } catch (const NumericError&) {
        }
        double scaled = rho;
        if (critical) {
            scaled = std::log(nd) * rho;
        } else if (beta_hat < kappa_hat) {
            scaled = nd * nd * rho;
        }
        out.push_back({n, scaled});
    }
    return out;
}

} // namespace dpre
