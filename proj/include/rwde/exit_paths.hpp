#pragma once

#include <cstdint>
#include <vector>

#include "rwde/lattice.hpp"
#include "rwde/neighborhood.hpp"

namespace rwde {

// The complete set of simple paths from the origin that exit Lambda: every
// vertex before the last lies in Lambda, no vertex repeats, and exactly the
// final vertex lies outside. Stored as a preorder prefix tree rather than a
// path list: one node per explored edge, so shared prefixes are stored once
// and a product-stack walk evaluates all path weights in one linear pass.
//
// The tree depends only on (Lambda, d); it is environment-independent and is
// enumerated once per neighborhood, then reused across sites, environments,
// and threads (it is immutable after construction).
struct ExitPathSet {
    struct Node {
        std::int32_t from_offset;  // offsets[] id of the edge's tail site
        std::int16_t depth;        // edges on the path up to and including this one
        std::int8_t dir;           // direction of this edge
        std::uint8_t exit;         // 1 when the edge's head lies outside Lambda
    };

    int d = 0;
    // Interior sites (relative to the start) that appear as edge tails;
    // offsets[0] is the origin. Probability lookups during evaluation index
    // this table.
    std::vector<Site> offsets;
    // Preorder edge list. A node at depth k extends the most recent node at
    // depth k-1; exit nodes are leaves.
    std::vector<Node> nodes;
    std::size_t path_count = 0;
    int max_depth = 0;

    // Materializes explicit vertex sequences (origin first, exit site last).
    // Intended for small path sets: tests, debugging dumps.
    std::vector<std::vector<Site>> materialize_paths() const;
};

inline constexpr std::size_t kDefaultNodeBudget = 50'000'000;

// Depth-first enumeration in fixed direction order (+e_1..+e_d, -e_1..-e_d),
// so the preorder is the lexicographic order of direction strings. Counts
// every explored edge against node_budget and throws BudgetError beyond it,
// naming gamma_mc as the fallback estimator.
ExitPathSet enumerate_exit_paths(const NeighborhoodSet& lambda, int d,
                                 std::size_t node_budget = kDefaultNodeBudget);

}  // namespace rwde
