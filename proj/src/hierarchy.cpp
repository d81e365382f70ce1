#include "dpre/hierarchy.hpp"

#include <limits>
#include <string>

#include "dpre/errors.hpp"

namespace dpre {

void GraphParams::validate() const
{
    if (b < 2 || s < 2 || n < 0) {
        throw ArgumentError("graph parameters need b >= 2, s >= 2, n >= 0 (got b=" +
                            std::to_string(b) + ", s=" + std::to_string(s) +
                            ", n=" + std::to_string(n) + ")");
    }
}

void GraphParams::require_critical() const
{
    validate();
    if (b != s) {
        throw ArgumentError("critical-window routine requires b == s (got b=" +
                            std::to_string(b) + ", s=" + std::to_string(s) + ")");
    }
}

Count checked_mul(Count a, Count b)
{
    if (a != 0 && b > std::numeric_limits<Count>::max() / a) {
        throw OutOfRangeError("integer count overflows 64 bits");
    }
    return a * b;
}

Count checked_add(Count a, Count b)
{
    if (b > std::numeric_limits<Count>::max() - a) {
        throw OutOfRangeError("integer count overflows 64 bits");
    }
    return a + b;
}

Count checked_pow(Count base, int exponent)
{
    Count result = 1;
    for (int k = 0; k < exponent; ++k) {
        result = checked_mul(result, base);
    }
    return result;
}

Count EdgeAddress::encode(int b, int s) const
{
    const auto radix = static_cast<Count>(b) * static_cast<Count>(s);
    Count code = 0;
    for (const auto& [i, j] : pairs) {
        if (i < 1 || i > b || j < 1 || j > s) {
            throw ArgumentError("edge address pair out of range");
        }
        code = checked_add(checked_mul(code, radix), static_cast<Count>((i - 1) * s + (j - 1)));
    }
    return code;
}

EdgeAddress EdgeAddress::decode(Count code, int depth, int b, int s)
{
    if (depth < 0) {
        throw ArgumentError("negative edge depth");
    }
    const auto radix = static_cast<Count>(b) * static_cast<Count>(s);
    EdgeAddress h;
    h.pairs.resize(static_cast<std::size_t>(depth));
    for (int p = depth - 1; p >= 0; --p) {
        const auto digit = static_cast<int>(code % radix);
        code /= radix;
        h.pairs[static_cast<std::size_t>(p)] = {digit / s + 1, digit % s + 1};
    }
    if (code != 0) {
        throw ArgumentError("edge code exceeds (bs)^depth");
    }
    return h;
}

EdgeAddress EdgeAddress::child(int branch, int segment) const
{
    EdgeAddress c = *this;
    c.pairs.emplace_back(branch, segment);
    return c;
}

VertexId vertex_id_offset(int b, int s, int generation)
{
    // b(s-1) * ((bs)^{g-1} - 1) / (bs - 1)
    const auto radix = static_cast<Count>(b) * static_cast<Count>(s);
    Count edges = 1;
    Count offset = 0;
    for (int g = 1; g < generation; ++g) {
        offset = checked_add(offset, checked_mul(edges, static_cast<Count>(b * (s - 1))));
        edges = checked_mul(edges, radix);
    }
    return offset;
}

VertexId vertex_id(int b, int s, int parent_depth, Count parent_code, int branch, int slot)
{
    const Count local = (parent_code * static_cast<Count>(b) + static_cast<Count>(branch - 1)) *
                            static_cast<Count>(s - 1) +
                        static_cast<Count>(slot - 1);
    return vertex_id_offset(b, s, parent_depth + 1) + local;
}

VertexId VertexAddress::id(int b, int s) const
{
    if (generation < 1 || parent_edge.depth() != generation - 1 || branch < 1 || branch > b ||
        slot < 1 || slot > s - 1) {
        throw ArgumentError("malformed vertex address");
    }
    return vertex_id(b, s, generation - 1, parent_edge.encode(b, s), branch, slot);
}

VertexAddress VertexAddress::from_id(VertexId id, int b, int s)
{
    const auto radix = static_cast<Count>(b) * static_cast<Count>(s);
    const auto per_edge = static_cast<Count>(b * (s - 1));
    int generation = 1;
    Count edges = 1;
    while (id >= edges * per_edge) {
        id -= edges * per_edge;
        edges = checked_mul(edges, radix);
        ++generation;
    }
    VertexAddress v;
    v.generation = generation;
    v.slot = static_cast<int>(id % static_cast<Count>(s - 1)) + 1;
    id /= static_cast<Count>(s - 1);
    v.branch = static_cast<int>(id % static_cast<Count>(b)) + 1;
    id /= static_cast<Count>(b);
    v.parent_edge = EdgeAddress::decode(id, generation - 1, b, s);
    return v;
}

Count edge_count(const GraphParams& params)
{
    params.validate();
    return checked_pow(static_cast<Count>(params.b) * static_cast<Count>(params.s), params.n);
}

Count new_vertex_count(const GraphParams& params, int generation)
{
    params.validate();
    if (generation < 1 || generation > params.n) {
        throw ArgumentError("vertex generation must lie in [1, n]");
    }
    const auto radix = static_cast<Count>(params.b) * static_cast<Count>(params.s);
    return checked_mul(static_cast<Count>(params.b * (params.s - 1)),
                       checked_pow(radix, generation - 1));
}

Count total_vertex_count(const GraphParams& params)
{
    params.validate();
    Count total = 0;
    for (int g = 1; g <= params.n; ++g) {
        total = checked_add(total, new_vertex_count(params, g));
    }
    return total;
}

Count path_count(const GraphParams& params)
{
    params.validate();
    Count count = 1;
    for (int k = 0; k < params.n; ++k) {
        count = checked_mul(static_cast<Count>(params.b),
                            checked_pow(count, params.s));
    }
    return count;
}

std::vector<EdgeAddress> child_edges(const EdgeAddress& h, const GraphParams& params)
{
    params.validate();
    if (h.depth() >= params.n) {
        throw ArgumentError("child_edges needs depth(h) < n");
    }
    std::vector<EdgeAddress> children;
    children.reserve(static_cast<std::size_t>(params.b * params.s));
    for (int i = 1; i <= params.b; ++i) {
        for (int j = 1; j <= params.s; ++j) {
            children.push_back(h.child(i, j));
        }
    }
    return children;
}

namespace {

std::vector<Path> paths_below(const EdgeAddress& h, const GraphParams& params)
{
    if (h.depth() == params.n) {
        return {Path{}};
    }
    std::vector<Path> result;
    for (int i = 1; i <= params.b; ++i) {
        std::vector<std::vector<Path>> segments;
        segments.reserve(static_cast<std::size_t>(params.s));
        for (int j = 1; j <= params.s; ++j) {
            segments.push_back(paths_below(h.child(i, j), params));
        }
        // Odometer over one sub-path choice per segment.
        std::vector<std::size_t> choice(segments.size(), 0);
        bool more = true;
        while (more) {
            Path p;
            for (int j = 0; j < params.s; ++j) {
                const auto& sub = segments[static_cast<std::size_t>(j)][choice[static_cast<std::size_t>(j)]];
                p.insert(p.end(), sub.begin(), sub.end());
                if (j + 1 < params.s) {
                    p.push_back(VertexAddress{h.depth() + 1, h, i, j + 1});
                }
            }
            result.push_back(std::move(p));
            more = false;
            for (std::size_t pos = segments.size(); pos-- > 0;) {
                if (++choice[pos] < segments[pos].size()) {
                    more = true;
                    break;
                }
                choice[pos] = 0;
            }
        }
    }
    return result;
}

} // namespace

std::vector<Path> enumerate_paths(const GraphParams& params, Count budget)
{
    params.validate();
    Count count = 0;
    try {
        count = path_count(params);
    } catch (const OutOfRangeError&) {
        throw ResourceError("path enumeration budget exceeded (count overflows 64 bits)");
    }
    if (count > budget) {
        throw ResourceError("path enumeration budget exceeded: " + std::to_string(count) +
                            " paths > " + std::to_string(budget));
    }
    return paths_below(EdgeAddress{}, params);
}

} // namespace dpre
