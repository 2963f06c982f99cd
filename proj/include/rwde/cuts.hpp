#pragma once

#include <functional>
#include <vector>

#include "rwde/cemetery_graph.hpp"
#include "rwde/environment.hpp"
#include "rwde/neighborhood.hpp"

namespace rwde {

// ---------------------------------------------------------------- results

// A directed lattice edge crossing out of a vertex set.
struct CutEdge {
    Site from;
    int dir;
    Site to;
};

// Minimizer of an exit-weight sum over admissible vertex sets. The value
// equals the alpha-sum over cut_edges within 1e-12; argmin is sorted in
// canonical site order.
struct CutResult {
    double value = 0.0;
    std::vector<Site> argmin;
    std::vector<CutEdge> cut_edges;
};

// Graph-side analogue for cemetery graphs; vertices are graph ids and the
// cemetery appears as the id CemeteryGraph::delta().
struct GraphCutResult {
    double value = 0.0;
    std::vector<int> argmin;
    std::vector<std::pair<int, int>> cut_edges;
};

// ---------------------------------------------------------------- exponents

// kappa = 2*alpha0 - max_i (alpha_i + alpha_{i+d}).
double kappa(const Weights& w);

inline constexpr int kDefaultSubsetCap = 8;

// Constrained min-cut: minimum over connected K subset of Lambda with
// 0 in K and K meeting the boundary of Lambda, of the alpha-sum over edges
// from K to its complement (in the full lattice). Enumerates connected
// subsets up to size_cap; throws BudgetError when Lambda exceeds the
// enumeration limit or when the minimizer saturates the cap (cap
// sufficiency is asserted by |argmin| < size_cap). Ties within 1e-12 of the
// minimum resolve to the canonically smallest vertex set.
CutResult kappa_lambda(const Weights& w, const NeighborhoodSet& lambda,
                       int size_cap = kDefaultSubsetCap);

// Closed form for the sup-norm box of radius R:
// min_{i0} [ (alpha_{i0}+alpha_{i0+d}) + (R+1) * sum_{i != i0} (alpha_i+alpha_{i+d}) ].
double box_kappa_lambda(const Weights& w, int R);

// Smallest box radius R with box_kappa_lambda(w, R) > target. The box value
// is strictly increasing in R for d >= 2; for d = 1 it is constant alpha0,
// so an unreachable target throws ConfigError instead of scanning forever.
int min_radius_for(const Weights& w, double target);

// Minimum exit-weight sum over strongly connected ordinary-vertex sets
// containing vertex0 (at least two vertices; no elementary loops exist, so
// a single vertex carries no strongly connected edge set). The exit sum of
// S counts every edge with tail in S and head outside (cemetery included).
// Requires the symmetric-core hypothesis. Cap handling as in kappa_lambda.
GraphCutResult beta_min(const CemeteryGraph& g, int vertex0,
                        int size_cap = kDefaultSubsetCap);

// ---------------------------------------------------------------- enumeration

// Enumerates every connected induced vertex subset of size <= size_cap that
// contains root, exactly once, over an undirected adjacency structure.
// Subsets are reported as sorted id vectors. Shared by kappa_lambda and
// beta_min; exposed for tests (frozen subset counts pin the enumerator).
void enumerate_connected_subsets(
    int n_vertices, const std::vector<std::vector<int>>& adj, int root,
    int size_cap, const std::function<void(const std::vector<int>&)>& visit);

}  // namespace rwde
