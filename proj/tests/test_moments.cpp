#include "doctest.h"

#include <cmath>
#include <random>
#include <vector>

#include "dpre/errors.hpp"
#include "dpre/hierarchy.hpp"
#include "dpre/moments.hpp"
#include "dpre/partition.hpp"
#include "dpre/scaling.hpp"
#include "dpre/variance_flow.hpp"

using namespace dpre;

TEST_CASE("table layout and trivial moments")
{
    const auto t = moment_recursion(3, 0.0, DisorderLaw::gaussian(), 6, 20);
    CHECK(t.steps() == 20);
    for (int m = 0; m <= 6; ++m) {
        for (std::int64_t k = 0; k <= 20; ++k) {
            CHECK(t.raw(m, k) == doctest::Approx(1.0).epsilon(1e-14));
        }
    }
    for (double c : centered_moments(t, 20)) {
        CHECK(std::abs(c) < 1e-13);
    }
    CHECK_THROWS_AS(t.raw(7, 0), ArgumentError);
    CHECK_THROWS_AS(t.raw(2, 21), ArgumentError);
    CHECK_THROWS_AS(moment_recursion(2, 0.1, DisorderLaw::gaussian(), 11, 3), ArgumentError);
    CHECK_THROWS_AS(moment_recursion(2, 0.1, DisorderLaw::gaussian(), 1, 3), ArgumentError);
    CHECK_THROWS_AS(moment_recursion(2, 0.1, DisorderLaw::gaussian(), 4, -1), ArgumentError);
    CHECK_THROWS_AS(centered_moments(t, 21), ArgumentError);
}

TEST_CASE("second moment follows the variance map")
{
    std::mt19937_64 rng(20261017);
    std::uniform_int_distribution<int> pick_b(2, 5);
    std::uniform_real_distribution<double> pick_beta(0.05, 0.3);
    for (int trial = 0; trial < 20; ++trial) {
        const int b = pick_b(rng);
        const double beta = pick_beta(rng);
        const auto law = DisorderLaw::gaussian();
        const auto table = moment_recursion(b, beta, law, 2, 8);
        const auto trace = iterate_variance(b, b, tilt_variance(law, beta), 8);
        for (std::int64_t k = 1; k <= 8; ++k) {
            const double var = table.raw_excess(2, k);
            REQUIRE(std::abs(var - trace.values[k]) <= 1e-12 * trace.values[k]);
            CHECK(centered_moments(table, k)[0] == doctest::Approx(var).epsilon(1e-14));
        }
    }

    // One step at b = 2 by hand.
    const double beta = 0.4;
    const auto law = DisorderLaw::gaussian();
    const double nu2 = tilt_moment(law, beta, 2);
    const auto table = moment_recursion(2, beta, law, 2, 2);
    const double mu1 = table.raw(2, 1);
    CHECK(table.raw(2, 2) == doctest::Approx(0.5 * mu1 * mu1 * nu2 + 0.5).epsilon(1e-14));
}

TEST_CASE("moments are monotone and dominate one")
{
    for (const auto& law : {DisorderLaw::gaussian(), DisorderLaw::rademacher(), DisorderLaw::two_point(0.1)}) {
        const auto t = moment_recursion(2, 0.2, law, 6, 12);
        for (int m = 1; m <= 6; ++m) {
            for (std::int64_t k = 1; k <= 12; ++k) {
                CHECK(t.raw(m, k) >= t.raw(m, k - 1) * (1.0 - 1e-15));
                CHECK(t.raw(m, k) >= 1.0 - 1e-15);
            }
        }
        for (std::int64_t k = 0; k <= 12; ++k) {
            CHECK(t.raw(1, k) == doctest::Approx(1.0).epsilon(1e-13));
        }
    }
}

TEST_CASE("centered moments by the binomial identity")
{
    const auto t = moment_recursion(2, 0.15, DisorderLaw::gaussian(), 4, 6);
    const auto c = centered_moments(t, 6);
    REQUIRE(c.size() == 3);
    const double mu2 = t.raw(2, 6);
    const double mu3 = t.raw(3, 6);
    const double mu4 = t.raw(4, 6);
    CHECK(std::abs(c[1] - (mu3 - 3.0 * mu2 + 2.0)) < 1e-12);
    CHECK(std::abs(c[2] - (mu4 - 4.0 * mu3 + 6.0 * mu2 - 3.0)) < 1e-12);
}

TEST_CASE("moments match exhaustive Rademacher enumeration")
{
    const auto law = DisorderLaw::rademacher();
    for (int n : {1, 2}) {
        const GraphParams p{2, 2, n};
        const auto vertices = static_cast<int>(total_vertex_count(p));
        const std::size_t configs = std::size_t{1} << vertices;
        for (double beta : {0.3, 0.8}) {
            std::vector<double> sums(5, 0.0);
            std::vector<double> omega(static_cast<std::size_t>(vertices));
            for (std::size_t mask = 0; mask < configs; ++mask) {
                for (int v = 0; v < vertices; ++v) {
                    omega[static_cast<std::size_t>(v)] = (mask >> v) & 1U ? 1.0 : -1.0;
                }
                const double w = evaluate_pathsum(p, beta, law, TableDisorder(omega));
                double power = 1.0;
                for (int m = 1; m <= 4; ++m) {
                    power *= w;
                    sums[static_cast<std::size_t>(m)] += power;
                }
            }
            const auto table = moment_recursion(2, beta, law, 4, n);
            for (int m = 1; m <= 4; ++m) {
                const double brute = sums[static_cast<std::size_t>(m)] / static_cast<double>(configs);
                CHECK(std::abs(table.raw(m, n) - brute) <= 1e-12 * brute);
            }
        }
    }
}

TEST_CASE("centered moment profile in the critical window")
{
    const std::vector<std::int64_t> grid{100, 1000, 10000};
    const auto second = lemma36_profile(2, 0.0, 2, grid);
    for (const auto& [n, value] : second) {
        const auto [L, v] = critical_window(2, n, 0.0);
        const double rho = iterate_map(2, 2, v, 0.0, n - L);
        CHECK(std::abs(value - rho) <= 1e-11 * rho);
    }
    for (int m : {3, 4, 6}) {
        for (double r : {-1.0, 0.0}) {
            const auto prof = lemma36_profile(2, r, m, grid);
            REQUIRE(prof.size() == 3);
            CHECK(std::isfinite(prof[0].value));
            CHECK(prof[1].value < prof[0].value);
            CHECK(prof[2].value < prof[1].value);
        }
    }
    CHECK_THROWS_AS(lemma36_profile(2, 0.0, 9, grid), ArgumentError);
}
