#pragma once

// Mean-zero, unit-variance disorder laws with finite exponential moments.

#include <string>
#include <string_view>

#include "dpre/rng.hpp"

namespace dpre {

class DisorderLaw {
public:
    enum class Kind { Gaussian, Rademacher, TwoPoint };

    static DisorderLaw gaussian() { return DisorderLaw(Kind::Gaussian, 0.5); }
    static DisorderLaw rademacher() { return DisorderLaw(Kind::Rademacher, 0.5); }
    // Takes sqrt((1-p)/p) with probability p, -sqrt(p/(1-p)) otherwise.
    static DisorderLaw two_point(double p);

    // Accepts "gaussian", "rademacher" or "twopoint:<p>".
    static DisorderLaw parse(std::string_view text);
    std::string to_string() const;

    Kind kind() const { return kind_; }
    double p() const { return p_; }
    // The two atoms for the discrete laws (upper, lower).
    double upper_atom() const;
    double lower_atom() const;

    friend bool operator==(const DisorderLaw&, const DisorderLaw&) = default;

private:
    DisorderLaw(Kind kind, double p) : kind_(kind), p_(p) {}

    Kind kind_;
    double p_;
};

/// log E[exp(beta * omega)], evaluated in closed form. Accurate to
/// relative rounding for small |beta|, where the value is ~beta^2/2.
double lambda(const DisorderLaw& law, double beta);

/// Var(exp(beta*omega - lambda(beta))) = exp(lambda(2 beta) - 2 lambda(beta)) - 1.
double tilt_variance(const DisorderLaw& law, double beta);

/// E[exp(beta*omega - lambda(beta))^m] = exp(lambda(m beta) - m lambda(beta)).
double tilt_moment(const DisorderLaw& law, double beta, int m);
// tilt_moment - 1 without cancellation.
double tilt_moment_excess(const DisorderLaw& law, double beta, int m);

double third_moment(const DisorderLaw& law);

/// One draw; consumes exactly one Philox block.
double sample(const DisorderLaw& law, RngStream& stream);

} // namespace dpre
