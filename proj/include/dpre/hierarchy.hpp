#pragma once

// Diamond hierarchical graphs D_n^{b,s}: counting, edge and vertex
// addressing, and brute-force path enumeration for small generations.

#include <cstdint>
#include <utility>
#include <vector>

namespace dpre {

using Count = std::uint64_t;
using VertexId = std::uint64_t;

struct GraphParams {
    int b = 2; // branching
    int s = 2; // segmenting
    int n = 0; // generation

    // Throws ArgumentError unless b >= 2, s >= 2, n >= 0.
    void validate() const;
    // validate() plus b == s.
    void require_critical() const;

    friend bool operator==(const GraphParams&, const GraphParams&) = default;
};

// Saturating-free checked arithmetic; throws OutOfRangeError on overflow.
Count checked_mul(Count a, Count b);
Count checked_add(Count a, Count b);
Count checked_pow(Count base, int exponent);

/// An edge of E_k, written as the k (branch, segment) choices made while
/// descending from the root edge. Pairs are 1-based.
struct EdgeAddress {
    std::vector<std::pair<int, int>> pairs;

    int depth() const { return static_cast<int>(pairs.size()); }

    /// Mixed-radix code in [0, (bs)^k). The first pair is the most
    /// significant digit and inside a pair the branch outranks the segment,
    /// so code(h x (i,j)) = code(h) * bs + (i-1)*s + (j-1).
    Count encode(int b, int s) const;
    static EdgeAddress decode(Count code, int depth, int b, int s);

    EdgeAddress child(int branch, int segment) const;

    friend bool operator==(const EdgeAddress&, const EdgeAddress&) = default;
};

/// A non-root vertex of generation g: the slot-th internal vertex along
/// the given branch of the D_1 copy that replaced a depth g-1 edge.
struct VertexAddress {
    int generation = 1;
    EdgeAddress parent_edge;
    int branch = 1; // 1..b
    int slot = 1;   // 1..s-1

    /// Canonical integer identity, independent of the graph generation n.
    /// Ids of generation g occupy a contiguous block after all lower
    /// generations.
    VertexId id(int b, int s) const;
    static VertexAddress from_id(VertexId id, int b, int s);

    friend bool operator==(const VertexAddress&, const VertexAddress&) = default;
};

// First id of generation g (number of vertices of generations 1..g-1).
VertexId vertex_id_offset(int b, int s, int generation);
// Id of the slot-th vertex on a branch below an edge given by code and depth.
VertexId vertex_id(int b, int s, int parent_depth, Count parent_code, int branch, int slot);

using Path = std::vector<VertexAddress>;

Count edge_count(const GraphParams& params);
Count new_vertex_count(const GraphParams& params, int generation);
Count total_vertex_count(const GraphParams& params);
Count path_count(const GraphParams& params);

std::vector<EdgeAddress> child_edges(const EdgeAddress& h, const GraphParams& params);

inline constexpr Count kPathEnumerationBudget = 1'000'000;

/// All directed paths from A to B, each listing its s^n - 1 vertices in
/// traversal order. Throws ResourceError above the budget.
std::vector<Path> enumerate_paths(const GraphParams& params,
                                  Count budget = kPathEnumerationBudget);

} // namespace dpre
