#include "doctest.h"

#include <cmath>
#include <vector>

#include "dpre/errors.hpp"
#include "dpre/partition.hpp"

using namespace dpre;

namespace {

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

EdgeArray centered(EdgeArray arr)
{
    for (double& x : arr.values) {
        x -= 1.0;
    }
    return arr;
}

} // namespace

TEST_CASE("trivial partition functions")
{
    const auto law = DisorderLaw::gaussian();
    for (int n = 0; n <= 5; ++n) {
        const KeyedDisorder omega(law, 11, 0);
        CHECK(evaluate_exact({2, 2, n}, 0.0, law, omega) == 1.0);
        CHECK(evaluate_exact({3, 2, n > 3 ? 3 : n}, 0.0, law, omega) == 1.0);
    }
    const KeyedDisorder omega(law, 11, 0);
    CHECK(evaluate_exact({2, 2, 0}, 0.7, law, omega) == 1.0);
    CHECK(evaluate_pathsum({2, 2, 2}, 0.0, law, omega) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("one-generation path sum by hand")
{
    const auto law = DisorderLaw::gaussian();
    const double beta = 0.4;
    const TableDisorder omega({0.3, -1.2});
    const double lam = lambda(law, beta);
    const double expected = 0.5 * (std::exp(beta * 0.3 - lam) + std::exp(-beta * 1.2 - lam));
    CHECK(evaluate_pathsum({2, 2, 1}, beta, law, omega) == doctest::Approx(expected).epsilon(1e-15));
    CHECK(evaluate_exact({2, 2, 1}, beta, law, omega) == doctest::Approx(expected).epsilon(1e-15));
    const TableDisorder same({0.3, 0.3});
    CHECK(evaluate_pathsum({2, 2, 1}, beta, law, same) ==
          doctest::Approx(std::exp(beta * 0.3 - lam)).epsilon(1e-15));
}

TEST_CASE("recursion agrees with the brute-force path sum")
{
    const std::vector<GraphParams> cases{{2, 2, 1}, {2, 2, 2}, {2, 2, 3}, {3, 3, 1},
                                         {3, 3, 2}, {2, 3, 2}, {3, 2, 2}};
    for (const auto& law : {DisorderLaw::gaussian(), DisorderLaw::two_point(0.2)}) {
        for (const auto& p : cases) {
            for (double beta : {0.2, 0.5, 1.0}) {
                for (std::uint32_t seed = 0; seed < 50; ++seed) {
                    const KeyedDisorder omega(law, 1000 + seed, seed);
                    const double exact = evaluate_exact(p, beta, law, omega);
                    const double brute = evaluate_pathsum(p, beta, law, omega);
                    REQUIRE(exact > 0.0);
                    REQUIRE(rel(exact, brute) < 1e-12);
                }
            }
        }
    }
}

TEST_CASE("log-domain recursion matches the linear one")
{
    const auto law = DisorderLaw::gaussian();
    for (std::uint32_t seed = 0; seed < 20; ++seed) {
        const KeyedDisorder omega(law, 5, seed);
        const GraphParams p{2, 2, 5};
        const double linear = evaluate_exact(p, 0.6, law, omega);
        CHECK(rel(evaluate_exact(p, 0.6, law, omega, Arithmetic::Log), linear) < 1e-12);
        CHECK(std::abs(evaluate_exact_log(p, 0.6, law, omega) - std::log(linear)) < 1e-12);
    }
    // Large beta overflows the linear representation but not the log one.
    const KeyedDisorder omega(law, 5, 0);
    CHECK(std::isfinite(evaluate_exact_log({2, 2, 8}, 60.0, law, omega)));
}

TEST_CASE("evaluation is reproducible")
{
    const auto law = DisorderLaw::gaussian();
    const KeyedDisorder a(law, 99, 4);
    const KeyedDisorder b(law, 99, 4);
    CHECK(evaluate_exact({2, 2, 6}, 0.3, law, a) == evaluate_exact({2, 2, 6}, 0.3, law, b));
    CHECK(a(12345) == b(12345));
    const KeyedDisorder c(law, 99, 5);
    CHECK(evaluate_exact({2, 2, 6}, 0.3, law, a) != evaluate_exact({2, 2, 6}, 0.3, law, c));
}

TEST_CASE("resource guard")
{
    const auto law = DisorderLaw::gaussian();
    const KeyedDisorder omega(law, 1, 0);
    CHECK_THROWS_AS(evaluate_exact({2, 2, 16}, 0.1, law, omega), ResourceError);
    CHECK_THROWS_AS(evaluate_exact({2, 2, 99}, 0.1, law, omega), ResourceError);
}

TEST_CASE("Q map")
{
    SUBCASE("zero is a fixed point")
    {
        const EdgeArray zeros{2, std::vector<double>(16, 0.0)};
        const auto w = q_map(zeros, 2, 2);
        CHECK(w.depth == 1);
        CHECK(w.values == std::vector<double>(4, 0.0));
        CHECK(q_map_power(zeros, 2, 2, 2) == 0.0);
    }
    SUBCASE("constant arrays")
    {
        const EdgeArray ones{1, std::vector<double>(4, 1.0)};
        CHECK(q_map(ones, 2, 2).values.front() == 3.0);
    }
    SUBCASE("hand evaluation")
    {
        const EdgeArray arr{1, {1.0, 0.0, 0.0, 1.0}};
        CHECK(q_map(arr, 2, 2).values.front() == 1.0);
    }
    SUBCASE("empty composition")
    {
        const EdgeArray scalar{0, {0.37}};
        CHECK(q_map_power(scalar, 0, 2, 2) == 0.37);
    }
    SUBCASE("errors")
    {
        CHECK_THROWS_AS(q_map(EdgeArray{0, {1.0}}, 2, 2), ArgumentError);
        CHECK_THROWS_AS(q_map(EdgeArray{1, {1.0, 2.0}}, 2, 2), ArgumentError);
        CHECK_THROWS_AS(q_map_power(EdgeArray{1, std::vector<double>(4)}, 2, 2, 2), ArgumentError);
    }
}

TEST_CASE("conditional expectation and local partition functions")
{
    const auto law = DisorderLaw::gaussian();
    const KeyedDisorder omega(law, 17, 3);
    const GraphParams p{2, 2, 4};
    const double beta = 0.5;

    CHECK(evaluate_conditional(p, beta, law, omega, p.n) == 1.0);
    CHECK(evaluate_conditional(p, beta, law, omega, 0) == evaluate_exact(p, beta, law, omega));
    CHECK_THROWS_AS(evaluate_conditional(p, beta, law, omega, 5), ArgumentError);
    CHECK_THROWS_AS(evaluate_conditional(p, beta, law, omega, -1), ArgumentError);

    const auto top = local_partition_functions(p, beta, law, omega, p.n);
    CHECK(top.values == std::vector<double>(256, 1.0));
    const auto root = local_partition_functions(p, beta, law, omega, 0);
    REQUIRE(root.values.size() == 1);
    CHECK(root.values.front() == evaluate_exact(p, beta, law, omega));
}

TEST_CASE("conditional expectation equals 1 + Q^N of centered local partition functions")
{
    struct Case {
        GraphParams p;
        int N;
    };
    const std::vector<Case> cases{{{2, 2, 2}, 1}, {{2, 2, 2}, 2}, {{2, 2, 3}, 1}, {{2, 2, 3}, 2},
                                  {{2, 2, 4}, 1}, {{2, 2, 4}, 2}, {{3, 3, 2}, 1}};
    const auto law = DisorderLaw::two_point(0.3);
    for (const auto& [p, N] : cases) {
        for (std::uint32_t seed = 0; seed < 20; ++seed) {
            const KeyedDisorder omega(law, 4242, seed);
            const double lhs = evaluate_conditional(p, 0.5, law, omega, N);
            const auto local = local_partition_functions(p, 0.5, law, omega, N);
            const double rhs = 1.0 + q_map_power(centered(local), N, p.b, p.s);
            REQUIRE(rel(lhs, rhs) < 1e-12);
        }
    }
}

TEST_CASE("local partition functions have mean one")
{
    const auto law = DisorderLaw::gaussian();
    const GraphParams p{2, 2, 4};
    double sum = 0.0;
    double sq = 0.0;
    const int seeds = 1000;
    for (std::uint32_t seed = 0; seed < seeds; ++seed) {
        const KeyedDisorder omega(law, 77, seed);
        const auto local = local_partition_functions(p, 0.5, law, omega, 2);
        double m = 0.0;
        for (double w : local.values) {
            m += w - 1.0;
        }
        m /= static_cast<double>(local.values.size());
        sum += m;
        sq += m * m;
    }
    const double mean = sum / seeds;
    const double se = std::sqrt((sq / seeds - mean * mean) / seeds);
    CHECK(std::abs(mean) < 4.0 * se);
}

TEST_CASE("partition function is a mean-one martingale")
{
    const auto law = DisorderLaw::gaussian();
    const GraphParams p{2, 2, 5};
    const int reps = 10000;
    double sum = 0.0;
    double sq = 0.0;
    for (std::uint32_t i = 0; i < reps; ++i) {
        const double w = evaluate_exact(p, 0.3, law, KeyedDisorder(law, 31337, i));
        sum += w;
        sq += w * w;
    }
    const double mean = sum / reps;
    const double se = std::sqrt((sq / reps - mean * mean) / reps);
    CHECK(std::abs(mean - 1.0) < 4.0 * se);
}

TEST_CASE("conditioning on fewer generations shrinks the variance")
{
    const auto law = DisorderLaw::gaussian();
    const GraphParams p{2, 2, 4};
    const int reps = 4000;
    double previous = 1e9;
    for (int N = 0; N <= p.n; ++N) {
        double sum = 0.0;
        double sq = 0.0;
        for (std::uint32_t i = 0; i < reps; ++i) {
            const double w = evaluate_conditional(p, 0.8, law, KeyedDisorder(law, 8, i), N);
            sum += w;
            sq += w * w;
        }
        const double var = sq / reps - (sum / reps) * (sum / reps);
        CHECK(var <= previous);
        previous = var;
    }
    CHECK(previous == doctest::Approx(0.0).epsilon(1e-12));
}
