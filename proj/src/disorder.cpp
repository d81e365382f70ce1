#include "dpre/disorder.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <numbers>

#include "dpre/errors.hpp"

namespace dpre {

namespace {

// expm1(x) - x without cancellation near zero.
double expm1_minus_x(double x)
{
    if (std::abs(x) >= 0.5) {
        return std::expm1(x) - x;
    }
    double term = x * x / 2.0;
    double sum = term;
    for (int k = 3; k < 40; ++k) {
        term *= x / k;
        sum += term;
        if (std::abs(term) <= 1e-18 * std::abs(sum)) {
            break;
        }
    }
    return sum;
}

double two_point_lambda(double p, double upper, double lower, double beta)
{
    const double hi = beta * upper;
    const double lo = beta * lower;
    if (std::max(hi, lo) > 30.0) {
        const double a = std::log(p) + hi;
        const double c = std::log1p(-p) + lo;
        const double top = std::max(a, c);
        return top + std::log(std::exp(a - top) + std::exp(c - top));
    }
    // p*upper + (1-p)*lower = 0, so the linear terms cancel exactly.
    return std::log1p(p * expm1_minus_x(hi) + (1.0 - p) * expm1_minus_x(lo));
}

} // namespace

DisorderLaw DisorderLaw::two_point(double p)
{
    if (!(p > 0.0 && p < 1.0)) {
        throw ArgumentError("two-point law needs p in (0, 1)");
    }
    return DisorderLaw(Kind::TwoPoint, p);
}

DisorderLaw DisorderLaw::parse(std::string_view text)
{
    if (text == "gaussian") {
        return gaussian();
    }
    if (text == "rademacher") {
        return rademacher();
    }
    constexpr std::string_view prefix = "twopoint:";
    if (text.substr(0, prefix.size()) == prefix) {
        const auto digits = text.substr(prefix.size());
        double p = 0.0;
        const auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), p);
        if (ec != std::errc{} || ptr != digits.data() + digits.size()) {
            throw ArgumentError("cannot parse two-point probability in '" + std::string(text) + "'");
        }
        return two_point(p);
    }
    throw ArgumentError("unknown disorder law '" + std::string(text) +
                        "' (expected gaussian, rademacher or twopoint:<p>)");
}

std::string DisorderLaw::to_string() const
{
    switch (kind_) {
    case Kind::Gaussian:
        return "gaussian";
    case Kind::Rademacher:
        return "rademacher";
    case Kind::TwoPoint: {
        char buf[64];
        const auto res = std::to_chars(buf, buf + sizeof buf, p_);
        return "twopoint:" + std::string(buf, res.ptr);
    }
    }
    return {};
}

double DisorderLaw::upper_atom() const
{
    return kind_ == Kind::Gaussian ? std::numeric_limits<double>::infinity()
                                   : std::sqrt((1.0 - p_) / p_);
}

double DisorderLaw::lower_atom() const
{
    return kind_ == Kind::Gaussian ? -std::numeric_limits<double>::infinity()
                                   : -std::sqrt(p_ / (1.0 - p_));
}

double lambda(const DisorderLaw& law, double beta)
{
    switch (law.kind()) {
    case DisorderLaw::Kind::Gaussian:
        return 0.5 * beta * beta;
    case DisorderLaw::Kind::Rademacher:
        return two_point_lambda(0.5, 1.0, -1.0, beta);
    case DisorderLaw::Kind::TwoPoint:
        return two_point_lambda(law.p(), law.upper_atom(), law.lower_atom(), beta);
    }
    return 0.0;
}

double tilt_variance(const DisorderLaw& law, double beta)
{
    if (law.kind() == DisorderLaw::Kind::Gaussian) {
        return std::expm1(beta * beta);
    }
    return std::expm1(lambda(law, 2.0 * beta) - 2.0 * lambda(law, beta));
}

double tilt_moment_excess(const DisorderLaw& law, double beta, int m)
{
    if (m < 1) {
        throw ArgumentError("tilt_moment needs m >= 1");
    }
    if (m == 1) {
        return 0.0;
    }
    if (law.kind() == DisorderLaw::Kind::Gaussian) {
        return std::expm1(0.5 * static_cast<double>(m) * (m - 1) * beta * beta);
    }
    return std::expm1(lambda(law, m * beta) - m * lambda(law, beta));
}

double tilt_moment(const DisorderLaw& law, double beta, int m)
{
    return 1.0 + tilt_moment_excess(law, beta, m);
}

double third_moment(const DisorderLaw& law)
{
    if (law.kind() != DisorderLaw::Kind::TwoPoint) {
        return 0.0;
    }
    const double p = law.p();
    return (1.0 - 2.0 * p) / std::sqrt(p * (1.0 - p));
}

double sample(const DisorderLaw& law, RngStream& stream)
{
    const auto blk = stream.next_block();
    const std::uint64_t bits0 = (static_cast<std::uint64_t>(blk[1]) << 32) | blk[0];
    const double u = RngStream::to_open_unit(bits0);
    switch (law.kind()) {
    case DisorderLaw::Kind::Gaussian: {
        const std::uint64_t bits1 = (static_cast<std::uint64_t>(blk[3]) << 32) | blk[2];
        const double v = RngStream::to_open_unit(bits1);
        return std::sqrt(-2.0 * std::log(u)) * std::cos(2.0 * std::numbers::pi * v);
    }
    case DisorderLaw::Kind::Rademacher:
        return u < 0.5 ? 1.0 : -1.0;
    case DisorderLaw::Kind::TwoPoint:
        return u < law.p() ? law.upper_atom() : law.lower_atom();
    }
    return 0.0;
}

} // namespace dpre
