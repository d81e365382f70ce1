#pragma once

// Exact integer moments of W_k from the multinomial expansion of the
// hierarchical distributional identity (b = s).

#include <cstdint>
#include <vector>

#include "dpre/disorder.hpp"

namespace dpre {

struct MomentTable {
    int b = 2;
    int max_order = 2;
    double beta = 0.0;
    DisorderLaw law = DisorderLaw::gaussian();
    // excess[m][k] = E[W_k^m] - 1 for m = 0..max_order, k = 0..steps.
    // Kept relative to 1 so small-beta variances do not cancel.
    std::vector<std::vector<double>> excess;

    std::int64_t steps() const
    {
        return excess.empty() ? 0 : static_cast<std::int64_t>(excess[0].size()) - 1;
    }
    double raw(int m, std::int64_t k) const { return 1.0 + raw_excess(m, k); }
    double raw_excess(int m, std::int64_t k) const;
};

inline constexpr int kMaxMomentOrder = 10;

/// mu^{(m)}(k+1) = b^{-m} sum over compositions m_1+..+m_b = m of
/// multinomial(m; m_1..m_b) prod_i g(m_i), g(l) = mu^{(l)}(k)^b nu^{(l)}^{b-1}.
/// Since the multinomials sum to b^m, mu - 1 is the same sum over
/// prod_i g(m_i) - 1, every term of which is nonnegative.
/// Throws NumericError naming (m, k) if a moment overflows.
MomentTable moment_recursion(int b, double beta, const DisorderLaw& law, int m_max,
                             std::int64_t steps);

/// E[(W_k - 1)^m] for m = 2..max_order (element 0 is m = 2).
std::vector<double> centered_moments(const MomentTable& table, std::int64_t k);

struct CenteredMomentPoint {
    std::int64_t n;
    double value;
};

/// m-th centered moment of W_{n - floor(log n)}(beta_{n,r}) with the
/// exact-variance schedule, for each n of the grid.
std::vector<CenteredMomentPoint> lemma36_profile(int b, double r, int m,
                                                 const std::vector<std::int64_t>& n_grid,
                                                 const DisorderLaw& law = DisorderLaw::gaussian());

} // namespace dpre
