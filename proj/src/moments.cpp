#include "dpre/moments.hpp"

#include <cmath>
#include <string>

#include "dpre/errors.hpp"
#include "dpre/scaling.hpp"

namespace dpre {

namespace {

struct Composition {
    std::vector<int> parts;
    double multinomial;
};

double factorial(int k)
{
    double f = 1.0;
    for (int i = 2; i <= k; ++i) {
        f *= i;
    }
    return f;
}

// Ordered compositions of m into b nonnegative parts (stars and bars),
// in lexicographic order of the parts.
void append_compositions(int remaining, std::size_t slot, std::vector<int>& parts, int m,
                         std::vector<Composition>& out)
{
    if (slot + 1 == parts.size()) {
        parts[slot] = remaining;
        double denom = 1.0;
        for (int p : parts) {
            denom *= factorial(p);
        }
        out.push_back({parts, factorial(m) / denom});
        return;
    }
    for (int v = 0; v <= remaining; ++v) {
        parts[slot] = v;
        append_compositions(remaining - v, slot + 1, parts, m, out);
    }
}

std::vector<Composition> compositions(int m, int b)
{
    std::vector<Composition> out;
    std::vector<int> parts(static_cast<std::size_t>(b), 0);
    append_compositions(m, 0, parts, m, out);
    return out;
}

double binomial(int n, int k)
{
    return factorial(n) / (factorial(k) * factorial(n - k));
}

} // namespace

double MomentTable::raw_excess(int m, std::int64_t k) const
{
    if (m < 0 || m > max_order || k < 0 || k > steps()) {
        throw ArgumentError("moment table index out of range");
    }
    return excess[static_cast<std::size_t>(m)][static_cast<std::size_t>(k)];
}

MomentTable moment_recursion(int b, double beta, const DisorderLaw& law, int m_max,
                             std::int64_t steps)
{
    if (b < 2) {
        throw ArgumentError("moment recursion needs b >= 2");
    }
    if (m_max < 2 || m_max > kMaxMomentOrder) {
        throw ArgumentError("moment recursion needs 2 <= m_max <= 10");
    }
    if (steps < 0) {
        throw ArgumentError("steps must be >= 0");
    }
    MomentTable table{b, m_max, beta, law, {}};
    const auto K = static_cast<std::size_t>(steps);
    const auto orders = static_cast<std::size_t>(m_max) + 1;
    table.excess.assign(orders, std::vector<double>(K + 1, 0.0));

    // log nu^{(l)}
    std::vector<double> log_nu(orders, 0.0);
    for (int l = 1; l <= m_max; ++l) {
        log_nu[static_cast<std::size_t>(l)] = std::log1p(tilt_moment_excess(law, beta, l));
    }
    std::vector<std::vector<Composition>> comps(orders);
    for (int m = 2; m <= m_max; ++m) {
        comps[static_cast<std::size_t>(m)] = compositions(m, b);
    }

    const double scale_b = static_cast<double>(b);
    std::vector<double> log_g(orders, 0.0);
    for (std::size_t k = 0; k < K; ++k) {
        for (std::size_t l = 1; l < orders; ++l) {
            log_g[l] = scale_b * std::log1p(table.excess[l][k]) + (scale_b - 1.0) * log_nu[l];
        }
        for (int m = 2; m <= m_max; ++m) {
            double sum = 0.0;
            for (const auto& comp : comps[static_cast<std::size_t>(m)]) {
                double log_prod = 0.0;
                for (int part : comp.parts) {
                    log_prod += log_g[static_cast<std::size_t>(part)];
                }
                sum += comp.multinomial * std::expm1(log_prod);
            }
            const double value = sum / std::pow(scale_b, m);
            if (!std::isfinite(value)) {
                throw NumericError("moment of order " + std::to_string(m) +
                                   " overflows at step k=" + std::to_string(k + 1));
            }
            table.excess[static_cast<std::size_t>(m)][k + 1] = value;
        }
    }
    return table;
}

std::vector<double> centered_moments(const MomentTable& table, std::int64_t k)
{
    if (k < 0 || k > table.steps()) {
        throw ArgumentError("centered_moments: k beyond the table");
    }
    std::vector<double> out;
    for (int m = 2; m <= table.max_order; ++m) {
        double sum = 0.0;
        // The constant parts cancel: sum_j binom(m, j) (-1)^{m-j} = 0.
        for (int j = 0; j <= m; ++j) {
            const double sign = (m - j) % 2 == 0 ? 1.0 : -1.0;
            sum += binomial(m, j) * sign * table.raw_excess(j, k);
        }
        out.push_back(sum);
    }
    return out;
}

std::vector<CenteredMomentPoint> lemma36_profile(int b, double r, int m,
                                                 const std::vector<std::int64_t>& n_grid,
                                                 const DisorderLaw& law)
{
    if (m < 2 || m > 8) {
        throw ArgumentError("lemma36_profile supports 2 <= m <= 8");
    }
    const TemperatureSchedule schedule{ScheduleMode::ExactVariance, r, law};
    std::vector<CenteredMomentPoint> out;
    for (const std::int64_t n : n_grid) {
        if (n < 3) {
            throw ArgumentError("lemma36_profile needs n >= 3");
        }
        const auto L = static_cast<std::int64_t>(std::floor(std::log(static_cast<double>(n))));
        const double bt = beta(schedule, b, n);
        const auto table = moment_recursion(b, bt, law, m, n - L);
        out.push_back({n, centered_moments(table, n - L)[static_cast<std::size_t>(m - 2)]});
    }
    return out;
}

} // namespace dpre
