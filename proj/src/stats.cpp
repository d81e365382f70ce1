#include "dpre/stats.hpp"

#include "dpre/errors.hpp"

namespace dpre {

double quantile_sorted(std::span<const double> sorted, double q)
{
    if (sorted.empty()) {
        throw ArgumentError("quantile of an empty sample");
    }
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = lo + 1 < sorted.size() ? lo + 1 : lo;
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

} // namespace dpre
