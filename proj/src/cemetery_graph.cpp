#include "rwde/cemetery_graph.hpp"

#include <cmath>
#include <set>
#include <string>

#include "rwde/util.hpp"

namespace rwde {

void validate_cemetery_graph(const CemeteryGraph& g) {
    if (g.n <= 0) throw ConfigError("cemetery graph: needs at least one ordinary vertex");
    if (g.adj.size() != static_cast<std::size_t>(g.n)) {
        throw ConfigError("cemetery graph: adjacency size mismatch");
    }
    for (int v = 0; v < g.n; ++v) {
        std::set<int> heads;
        for (const auto& e : g.adj[v]) {
            if (e.to == v) throw ConfigError("cemetery graph: elementary loop at vertex " +
                                             std::to_string(v));
            if (e.to < 0 || e.to > g.n) {
                throw ConfigError("cemetery graph: edge head out of range");
            }
            if (!(e.alpha > 0.0)) {
                throw ConfigError("cemetery graph: edge weight must be > 0");
            }
            // Parallel cemetery edges merge by weight additivity, so they
            // are tolerated; parallel ordinary edges are not.
            if (e.to != g.delta() && !heads.insert(e.to).second) {
                throw ConfigError("cemetery graph: parallel edges between ordinary vertices " +
                                  std::to_string(v) + " -> " + std::to_string(e.to));
            }
        }
    }
}

void require_symmetric_core(const CemeteryGraph& g) {
    for (int v = 0; v < g.n; ++v) {
        for (const auto& e : g.adj[v]) {
            if (e.to == g.delta()) continue;
            bool reverse = false;
            for (const auto& back : g.adj[e.to]) {
                if (back.to == v) {
                    reverse = true;
                    break;
                }
            }
            if (!reverse) {
                throw ConfigError("cemetery graph: ordinary edge " + std::to_string(v) +
                                  " -> " + std::to_string(e.to) + " has no reverse edge");
            }
        }
    }
}

namespace {

struct GraphDfs {
    const CemeteryGraph* g;
    std::size_t budget;
    std::size_t visited = 0;
    std::vector<char> on_path;
    KahanSum sum;
    std::vector<double> log_w;

    void run(int v, int depth) {
        for (const auto& e : g->adj[v]) {
            if (e.to != g->delta() && on_path[e.to]) continue;
            if (++visited > budget) {
                throw BudgetError("gamma_finite_graph: path enumeration budget exceeded");
            }
            log_w[depth + 1] = log_w[depth] + std::log(e.prob);
            if (e.to == g->delta()) {
                sum.add(std::exp(log_w[depth + 1]));
            } else {
                on_path[e.to] = 1;
                run(e.to, depth + 1);
                on_path[e.to] = 0;
            }
        }
    }
};

bool delta_reachable(const CemeteryGraph& g, int start) {
    std::vector<char> seen(g.n, 0);
    std::vector<int> stack{start};
    seen[start] = 1;
    while (!stack.empty()) {
        int v = stack.back();
        stack.pop_back();
        for (const auto& e : g.adj[v]) {
            if (e.to == g.delta()) return true;
            if (!seen[e.to]) {
                seen[e.to] = 1;
                stack.push_back(e.to);
            }
        }
    }
    return false;
}

}  // namespace

double gamma_finite_graph(const CemeteryGraph& g, int vertex,
                          std::size_t node_budget) {
    validate_cemetery_graph(g);
    if (vertex < 0 || vertex >= g.n) {
        throw ConfigError("gamma_finite_graph: start vertex out of range");
    }
    if (!delta_reachable(g, vertex)) {
        throw ConfigError("gamma_finite_graph: cemetery unreachable from start vertex");
    }
    GraphDfs dfs;
    dfs.g = &g;
    dfs.budget = node_budget;
    dfs.on_path.assign(g.n, 0);
    dfs.log_w.assign(static_cast<std::size_t>(g.n) + 1, 0.0);
    dfs.on_path[vertex] = 1;
    dfs.run(vertex, 0);
    return 1.0 / dfs.sum.value();
}

namespace {

template <typename ProbsOf>
CemeteryGraph contract_impl(const Weights& w, const NeighborhoodSet& lambda,
                            bool merge_delta, ProbsOf&& probs_of) {
    CemeteryGraph g;
    g.n = static_cast<int>(lambda.size());
    g.adj.resize(lambda.size());
    const int d = lambda.d();
    for (int vid = 0; vid < g.n; ++vid) {
        const Site& v = lambda.vertices()[vid];
        const double* probs = probs_of(vid, v);
        double delta_alpha = 0.0, delta_prob = 0.0;
        bool has_delta = false;
        for (int dir = 0; dir < 2 * d; ++dir) {
            const Site head = step(v, dir, d);
            const int head_id = lambda.index_of(head);
            if (head_id >= 0) {
                g.adj[vid].push_back({head_id, w.alpha[dir], probs[dir]});
            } else if (merge_delta) {
                delta_alpha += w.alpha[dir];
                delta_prob += probs[dir];
                has_delta = true;
            } else {
                g.adj[vid].push_back({g.delta(), w.alpha[dir], probs[dir]});
            }
        }
        if (merge_delta && has_delta) {
            g.adj[vid].push_back({g.delta(), delta_alpha, delta_prob});
        }
    }
    return g;
}

}  // namespace

CemeteryGraph contract_to_cemetery(const Weights& w,
                                   const NeighborhoodSet& lambda,
                                   bool merge_delta) {
    // Annealed probabilities alpha/alpha0 keep the prob side a valid
    // distribution; alpha-based consumers never read it.
    std::vector<double> mean_probs(2 * w.d);
    for (int dir = 0; dir < 2 * w.d; ++dir) mean_probs[dir] = w.alpha[dir] / w.alpha0;
    return contract_impl(w, lambda, merge_delta,
                         [&](int, const Site&) { return mean_probs.data(); });
}

CemeteryGraph contract_to_cemetery(const LatticeEnvironment& env,
                                   const Site& base,
                                   const NeighborhoodSet& lambda,
                                   bool merge_delta) {
    const int d = env.d();
    return contract_impl(env.weights(), lambda, merge_delta,
                         [&](int, const Site& v) {
                             Site abs = base;
                             for (int k = 0; k < d; ++k) abs.c[k] += v.c[k];
                             return env.probs_ptr(abs);
                         });
}

}  // namespace rwde
