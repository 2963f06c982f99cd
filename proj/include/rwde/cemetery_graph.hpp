#pragma once

#include <cstdint>
#include <vector>

#include "rwde/environment.hpp"
#include "rwde/neighborhood.hpp"

namespace rwde {

// Finite directed graph with a distinguished absorbing cemetery vertex.
// Ordinary vertices are 0..n-1; the cemetery is vertex id n (kDelta()).
// Every edge carries both a Dirichlet weight (alpha) and a realized
// transition value (prob); consumers use whichever side they need.
struct CemeteryGraph {
    struct Edge {
        int to;
        double alpha;
        double prob;
    };

    int n = 0;                            // ordinary vertex count
    std::vector<std::vector<Edge>> adj;   // out-edges per ordinary vertex

    int delta() const { return n; }
};

// Structural validation shared by the graph operations:
//   - no elementary loops (self-edges),
//   - no parallel edges between ordinary vertices (parallel edges into the
//     cemetery are tolerated; they merge by weight additivity),
//   - strictly positive alpha on every edge.
// Throws ConfigError with a description of the first violation.
void validate_cemetery_graph(const CemeteryGraph& g);

// Additional hypothesis for exit-sum minimization: every edge between
// ordinary vertices has its reverse present. Throws ConfigError otherwise.
void require_symmetric_core(const CemeteryGraph& g);

// 1 / sum over simple paths vertex -> cemetery of the prob product, by
// depth-first enumeration (log-space path accumulation, compensated linear
// sum, same direction-order discipline as the lattice evaluator). Throws
// ConfigError when the cemetery is unreachable from vertex, BudgetError past
// node_budget.
double gamma_finite_graph(const CemeteryGraph& g, int vertex,
                          std::size_t node_budget = 50'000'000);

// Lattice-to-graph contraction: vertices are Lambda in canonical order;
// edges inside Lambda keep their per-direction weight; every edge leaving
// Lambda becomes an edge to the cemetery. With merge_delta the cemetery
// edges of one tail are combined by summing alpha and prob (Dirichlet
// additivity); without it they stay parallel, giving a path set in exact
// bijection with the lattice exit paths.
CemeteryGraph contract_to_cemetery(const Weights& w,
                                   const NeighborhoodSet& lambda,
                                   bool merge_delta);
// Same contraction with realized probabilities taken from env around
// base + Lambda.
CemeteryGraph contract_to_cemetery(const LatticeEnvironment& env,
                                   const Site& base,
                                   const NeighborhoodSet& lambda,
                                   bool merge_delta);

}  // namespace rwde
