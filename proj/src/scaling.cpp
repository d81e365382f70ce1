#include "dpre/scaling.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "dpre/errors.hpp"

namespace dpre {

CriticalConstants constants(int b)
{
    if (b < 2) {
        throw ArgumentError("critical constants need b >= 2");
    }
    const double bd = b;
    CriticalConstants c{};
    c.kappa_hat = std::numbers::pi * std::sqrt(bd) / (std::numbers::sqrt2 * (bd - 1.0));
    c.kappa_sq = 2.0 / (bd - 1.0);
    c.eta = (bd + 1.0) / (3.0 * (bd - 1.0));
    c.varsigma = (std::log(std::numbers::pi / 2.0) + 2.0) * c.eta;
    c.epsilon = c.eta * std::log(bd);
    return c;
}

double n_eff(int b, std::int64_t n, double r)
{
    if (n < 2) {
        throw ArgumentError("n_eff needs n >= 2");
    }
    const auto c = constants(b);
    const double nd = static_cast<double>(n);
    const double value = nd - c.eta * std::log(nd) - r + c.varsigma;
    if (!(value > 0.0)) {
        throw ArgumentError("n_eff is not positive for n=" + std::to_string(n) +
                            ", r=" + std::to_string(r));
    }
    return value;
}

double beta_for_variance(const DisorderLaw& law, double target)
{
    if (!(target > 0.0) || !std::isfinite(target)) {
        throw NumericError("variance target must be positive and finite");
    }
    if (law.kind() == DisorderLaw::Kind::Gaussian) {
        return std::sqrt(std::log1p(target));
    }
    double lo = 0.0;
    double hi = 2.0 * std::sqrt(target);
    int grow = 0;
    while (tilt_variance(law, hi) < target) {
        lo = hi;
        hi *= 2.0;
        if (++grow > 200 || !std::isfinite(hi)) {
            throw NumericError("could not bracket beta for variance target");
        }
    }
    for (int it = 0; it < 400 && hi - lo > 1e-16 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) {
            break;
        }
        (tilt_variance(law, mid) < target ? lo : hi) = mid;
    }
    const double a = std::abs(tilt_variance(law, lo) - target);
    const double c = std::abs(tilt_variance(law, hi) - target);
    return a <= c ? lo : hi;
}

double beta(const TemperatureSchedule& schedule, int b, std::int64_t n)
{
    const auto c = constants(b);
    if (schedule.mode == ScheduleMode::ExactVariance) {
        const double ne = n_eff(b, n, schedule.r);
        return beta_for_variance(schedule.law, c.kappa_hat * c.kappa_hat / (ne * ne));
    }
    if (n < 1) {
        throw ArgumentError("closed-form schedule needs n >= 1");
    }
    const double nd = static_cast<double>(n);
    const double tau = third_moment(schedule.law);
    const double bracket = 1.0 + c.eta * std::log(nd) / nd +
                           (schedule.r - c.varsigma - c.kappa_hat * tau / 2.0) / nd;
    if (!(bracket > 0.0)) {
        throw ArgumentError("closed-form schedule bracket is not positive at n=" +
                            std::to_string(n));
    }
    return c.kappa_hat / nd * bracket;
}

double upsilon(int b, double beta_hat)
{
    const auto c = constants(b);
    if (beta_hat < 0.0 || beta_hat >= c.kappa_hat) {
        throw ArgumentError("upsilon is defined on [0, kappa_hat)");
    }
    return beta_hat * std::sqrt(2.0 / b) * std::tan(std::numbers::pi * beta_hat / (2.0 * c.kappa_hat));
}

} // namespace dpre
