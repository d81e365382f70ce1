#pragma once

// Critical constants and inverse-temperature schedules for b = s.

#include <cstdint>

#include "dpre/disorder.hpp"

namespace dpre {

struct CriticalConstants {
    double kappa_hat; // pi sqrt(b) / (sqrt(2) (b-1))
    double kappa_sq;  // 2 / (b-1)
    double eta;       // (b+1) / (3(b-1))
    double varsigma;  // (log(pi/2) + 2) eta
    double epsilon;   // eta log b
};

CriticalConstants constants(int b);

/// n - eta log n - r + varsigma, the effective generation count that makes
/// V = kappa_hat^2 / n_eff^2. Throws ArgumentError if n < 2 or the value
/// is not positive.
double n_eff(int b, std::int64_t n, double r);

enum class ScheduleMode { ClosedForm, ExactVariance };

struct TemperatureSchedule {
    ScheduleMode mode = ScheduleMode::ExactVariance;
    double r = 0.0;
    DisorderLaw law = DisorderLaw::gaussian();
};

/// beta_{n,r}. ClosedForm drops the o(1/n^2) term of the asymptotic form;
/// ExactVariance solves tilt_variance(beta) = kappa_hat^2 / n_eff^2 by
/// bisection.
double beta(const TemperatureSchedule& schedule, int b, std::int64_t n);

/// Solve tilt_variance(law, beta) = target for beta > 0.
double beta_for_variance(const DisorderLaw& law, double target);

/// beta_hat sqrt(2/b) tan(pi beta_hat / (2 kappa_hat)), on [0, kappa_hat).
double upsilon(int b, double beta_hat);

} // namespace dpre
