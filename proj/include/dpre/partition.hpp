#pragma once

// Exact partition functions for one disorder realization: hierarchical
// recursion, brute-force path sum, conditional expectation given the
// disorder above a generation, local partition functions and the Q map.

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstdint>
#include <span>
#include <unordered_map>
#include <vector>

#include "dpre/disorder.hpp"
#include "dpre/errors.hpp"
#include "dpre/hierarchy.hpp"

namespace dpre {

// Anything mapping a vertex id to its disorder value.
template <class T>
concept DisorderSource = requires(const T& src, VertexId id) {
    { src(id) } -> std::convertible_to<double>;
};

/// Disorder drawn lazily from the keyed stream (seed, replicate, vertex id).
/// Same key gives the same bits regardless of evaluation order.
class KeyedDisorder {
public:
    KeyedDisorder(DisorderLaw law, std::uint64_t seed, std::uint32_t replicate)
        : law_(law), seed_(seed), replicate_(replicate)
    {
    }

    double operator()(VertexId id) const
    {
        RngStream stream(seed_, replicate_, id);
        return sample(law_, stream);
    }

    const DisorderLaw& law() const { return law_; }

private:
    DisorderLaw law_;
    std::uint64_t seed_;
    std::uint32_t replicate_;
};

/// Explicit values indexed by vertex id; used by exhaustive oracles.
class TableDisorder {
public:
    explicit TableDisorder(std::vector<double> values) : values_(std::move(values)) {}
    double operator()(VertexId id) const { return values_.at(id); }
    std::span<const double> values() const { return values_; }

private:
    std::vector<double> values_;
};

enum class Arithmetic { Linear, Log };

inline constexpr Count kRecursionEdgeBudget = 1'000'000'000;
inline constexpr Count kEdgeArrayBudget = Count{1} << 24;

/// Real values indexed by the encoded addresses of E_depth.
struct EdgeArray {
    int depth = 0;
    std::vector<double> values;

    // Throws ArgumentError unless values.size() == (bs)^depth.
    void validate(int b, int s) const;
};

// Resource guard for a full recursion on D_n; throws ResourceError.
void check_recursion_budget(const GraphParams& params);

namespace detail {

// Shared engine for the recursive evaluators. Factors of vertices whose
// generation is <= integrate_upto are replaced by their mean, 1.
template <DisorderSource Source>
class Recursion {
public:
    Recursion(const GraphParams& params, double beta, const DisorderLaw& law,
              const Source& omega, int integrate_upto)
        : params_(params), beta_(beta), lambda_(dpre::lambda(law, beta)), omega_(omega),
          integrate_upto_(integrate_upto), radix_(static_cast<Count>(params.b) * params.s)
    {
        offsets_.resize(static_cast<std::size_t>(params.n) + 2);
        for (int g = 1; g <= params.n + 1; ++g) {
            offsets_[static_cast<std::size_t>(g)] = vertex_id_offset(params.b, params.s, g);
        }
    }

    // W of the sub-diamond below the depth-`depth` edge with this code.
    double linear(int depth, Count code) const
    {
        if (depth == params_.n) {
            return 1.0;
        }
        const bool integrated = depth + 1 <= integrate_upto_;
        double total = 0.0;
        for (int i = 0; i < params_.b; ++i) {
            double prod = 1.0;
            const Count first = code * radix_ + static_cast<Count>(i * params_.s);
            for (int j = 0; j < params_.s; ++j) {
                prod *= linear(depth + 1, first + static_cast<Count>(j));
            }
            if (!integrated) {
                const VertexId base = vertex_base(depth, code, i);
                for (int l = 0; l < params_.s - 1; ++l) {
                    prod *= std::exp(beta_ * omega_(base + static_cast<VertexId>(l)) - lambda_);
                }
            }
            total += prod;
        }
        return total / params_.b;
    }

    double log_domain(int depth, Count code) const
    {
        if (depth == params_.n) {
            return 0.0;
        }
        const bool integrated = depth + 1 <= integrate_upto_;
        std::vector<double> branch(static_cast<std::size_t>(params_.b));
        for (int i = 0; i < params_.b; ++i) {
            double acc = 0.0;
            const Count first = code * radix_ + static_cast<Count>(i * params_.s);
            for (int j = 0; j < params_.s; ++j) {
                acc += log_domain(depth + 1, first + static_cast<Count>(j));
            }
            if (!integrated) {
                const VertexId base = vertex_base(depth, code, i);
                for (int l = 0; l < params_.s - 1; ++l) {
                    acc += beta_ * omega_(base + static_cast<VertexId>(l)) - lambda_;
                }
            }
            branch[static_cast<std::size_t>(i)] = acc;
        }
        const double top = *std::max_element(branch.begin(), branch.end());
        double sum = 0.0;
        for (double x : branch) {
            sum += std::exp(x - top);
        }
        return top + std::log(sum / params_.b);
    }

private:
    VertexId vertex_base(int depth, Count code, int branch) const
    {
        return offsets_[static_cast<std::size_t>(depth + 1)] +
               (code * static_cast<Count>(params_.b) + static_cast<Count>(branch)) *
                   static_cast<Count>(params_.s - 1);
    }

    GraphParams params_;
    double beta_;
    double lambda_;
    const Source& omega_;
    int integrate_upto_;
    Count radix_;
    std::vector<VertexId> offsets_;
};

double exp_or_throw(double log_value);

} // namespace detail

/// W_n for one realization by the subgraph recursion. Children are
/// evaluated before vertex factors, branch-major.
template <DisorderSource Source>
double evaluate_exact(const GraphParams& params, double beta, const DisorderLaw& law,
                      const Source& omega, Arithmetic arithmetic = Arithmetic::Linear)
{
    check_recursion_budget(params);
    detail::Recursion<Source> rec(params, beta, law, omega, 0);
    if (arithmetic == Arithmetic::Log) {
        return detail::exp_or_throw(rec.log_domain(0, 0));
    }
    return rec.linear(0, 0);
}

/// log W_n, computed with log-sum-exp branch averages.
template <DisorderSource Source>
double evaluate_exact_log(const GraphParams& params, double beta, const DisorderLaw& law,
                          const Source& omega)
{
    check_recursion_budget(params);
    detail::Recursion<Source> rec(params, beta, law, omega, 0);
    return rec.log_domain(0, 0);
}

/// (1/|Gamma_n|) sum over all paths of the product of vertex weights.
template <DisorderSource Source>
double evaluate_pathsum(const GraphParams& params, double beta, const DisorderLaw& law,
                        const Source& omega)
{
    const auto paths = enumerate_paths(params);
    const double lam = dpre::lambda(law, beta);
    std::unordered_map<VertexId, double> weight;
    double total = 0.0;
    for (const auto& path : paths) {
        double prod = 1.0;
        for (const auto& v : path) {
            const VertexId id = v.id(params.b, params.s);
            auto it = weight.find(id);
            if (it == weight.end()) {
                it = weight.emplace(id, std::exp(beta * omega(id) - lam)).first;
            }
            prod *= it->second;
        }
        total += prod;
    }
    return total / static_cast<double>(paths.size());
}

/// E[W_n | disorder of generations > N] for this realization: factors of
/// generations 1..N are replaced by 1.
template <DisorderSource Source>
double evaluate_conditional(const GraphParams& params, double beta, const DisorderLaw& law,
                            const Source& omega, int N)
{
    params.validate();
    if (N < 0 || N > params.n) {
        throw ArgumentError("conditioning generation N must lie in [0, n]");
    }
    check_recursion_budget(params);
    detail::Recursion<Source> rec(params, beta, law, omega, N);
    return rec.linear(0, 0);
}

/// W_n^h for every h in E_N, indexed by encoded address.
template <DisorderSource Source>
EdgeArray local_partition_functions(const GraphParams& params, double beta,
                                    const DisorderLaw& law, const Source& omega, int N)
{
    params.validate();
    if (N < 0 || N > params.n) {
        throw ArgumentError("local partition functions need N in [0, n]");
    }
    check_recursion_budget(params);
    const Count size = checked_pow(static_cast<Count>(params.b) * params.s, N);
    if (size > kEdgeArrayBudget) {
        throw ResourceError("edge array exceeds the memory guard");
    }
    detail::Recursion<Source> rec(params, beta, law, omega, N);
    EdgeArray out{N, std::vector<double>(size)};
    for (Count code = 0; code < size; ++code) {
        out.values[code] = rec.linear(N, code);
    }
    return out;
}

/// One contraction E_k -> E_{k-1}:
/// w_h = (1/b) sum_i (prod_j (1 + x_{h x (i,j)}) - 1).
EdgeArray q_map(const EdgeArray& arr, int b, int s);

/// Q^N of a depth-N array, as a scalar.
double q_map_power(const EdgeArray& arr, int N, int b, int s);

} // namespace dpre
