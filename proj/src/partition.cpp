#include "dpre/partition.hpp"

#include <string>

#include "dpre/errors.hpp"

namespace dpre {

void EdgeArray::validate(int b, int s) const
{
    if (depth < 0) {
        throw ArgumentError("edge array depth must be >= 0");
    }
    const Count expected = checked_pow(static_cast<Count>(b) * static_cast<Count>(s), depth);
    if (values.size() != expected) {
        throw ArgumentError("edge array of depth " + std::to_string(depth) + " needs " +
                            std::to_string(expected) + " entries, has " +
                            std::to_string(values.size()));
    }
}

void check_recursion_budget(const GraphParams& params)
{
    params.validate();
    Count edges = 0;
    try {
        edges = edge_count(params);
    } catch (const OutOfRangeError&) {
        throw ResourceError("recursion on D_n exceeds the edge budget (count overflows)");
    }
    if (edges > kRecursionEdgeBudget) {
        throw ResourceError("recursion on D_n needs " + std::to_string(edges) +
                            " leaf edges, above the budget of " +
                            std::to_string(kRecursionEdgeBudget));
    }
}

double detail::exp_or_throw(double log_value)
{
    const double w = std::exp(log_value);
    if (!std::isfinite(w)) {
        throw NumericError("partition function overflows in linear representation");
    }
    return w;
}

EdgeArray q_map(const EdgeArray& arr, int b, int s)
{
    arr.validate(b, s);
    if (arr.depth == 0) {
        throw ArgumentError("q_map needs an array of depth >= 1");
    }
    const std::size_t radix = static_cast<std::size_t>(b) * static_cast<std::size_t>(s);
    EdgeArray out{arr.depth - 1, std::vector<double>(arr.values.size() / radix)};
    for (std::size_t h = 0; h < out.values.size(); ++h) {
        const double* block = arr.values.data() + h * radix;
        double total = 0.0;
        for (int i = 0; i < b; ++i) {
            double prod = 1.0;
            for (int j = 0; j < s; ++j) {
                prod *= 1.0 + block[i * s + j];
            }
            total += prod - 1.0;
        }
        out.values[h] = total / b;
    }
    return out;
}

double q_map_power(const EdgeArray& arr, int N, int b, int s)
{
    if (arr.depth != N) {
        throw ArgumentError("q_map_power needs an array of depth N");
    }
    arr.validate(b, s);
    EdgeArray current = arr;
    while (current.depth > 0) {
        current = q_map(current, b, s);
    }
    return current.values.front();
}

} // namespace dpre
