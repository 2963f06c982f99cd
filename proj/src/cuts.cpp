#include "rwde/cuts.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "rwde/util.hpp"

namespace rwde {

double kappa(const Weights& w) {
    double max_pair = 0.0;
    for (int i = 0; i < w.d; ++i) max_pair = std::max(max_pair, axis_pair(w, i));
    return 2.0 * w.alpha0 - max_pair;
}

namespace {

// Exit-weight sum of the axis-i0 segment {0, e_i0, ..., R e_i0}: the
// minimizing family of the box closed form. Algebraically this is
// pair_i0 + (R+1) * sum_{i != i0} pair_i; it is accumulated edge by edge in
// (canonical vertex, direction) order, the same op sequence the subset
// enumerator uses, so the two routes stay bitwise equal and the equality
// gates can compare with zero tolerance.
double box_segment_exit_sum(const Weights& w, int R, int i0) {
    double sum = 0.0;
    for (int k = 0; k <= R; ++k) {
        for (int dir = 0; dir < 2 * w.d; ++dir) {
            const bool stays_inside =
                (dir == i0 && k + 1 <= R) || (dir == i0 + w.d && k - 1 >= 0);
            if (!stays_inside) sum += w.alpha[dir];
        }
    }
    return sum;
}

}  // namespace

double box_kappa_lambda(const Weights& w, int R) {
    if (R < 0) throw ConfigError("box_kappa_lambda: radius must be >= 0");
    // Ties within the brute-force tolerance resolve to the canonically
    // smallest segment; among axis segments that is the highest axis index
    // (its unit vector sorts first in canonical site order).
    double best = std::numeric_limits<double>::infinity();
    for (int i0 = w.d - 1; i0 >= 0; --i0) {
        const double v = box_segment_exit_sum(w, R, i0);
        if (v < best - 1e-12) best = v;
    }
    return best;
}

int min_radius_for(const Weights& w, double target) {
    if (!(target > 0.0)) throw ConfigError("min_radius_for: target must be > 0");
    if (w.d == 1) {
        // The box formula collapses to alpha0 for every radius in d = 1.
        if (w.alpha0 > target) return 0;
        throw ConfigError("min_radius_for: d = 1 box cut value is constant alpha0 <= target");
    }
    for (int R = 0;; ++R) {
        if (box_kappa_lambda(w, R) > target) return R;
    }
}

// ---------------------------------------------------------------- enumeration

namespace {

struct SubsetEnum {
    const std::vector<std::vector<int>>& adj;
    int cap;
    const std::function<void(const std::vector<int>&)>& visit;
    std::vector<char> in_set, banned, in_ext;
    std::vector<int> current;

    void rec(const std::vector<int>& ext) {
        std::vector<int> banned_here;
        for (std::size_t i = 0; i < ext.size(); ++i) {
            const int v = ext[i];
            current.push_back(v);
            in_set[v] = 1;
            std::sort(current.begin(), current.end());
            visit(current);
            // visit() sees a sorted copy; restore insertion order tail.
            if (static_cast<int>(current.size()) < cap) {
                std::vector<int> next_ext;
                next_ext.reserve(ext.size() + adj[v].size());
                for (std::size_t j = i + 1; j < ext.size(); ++j) {
                    if (!banned[ext[j]]) {
                        next_ext.push_back(ext[j]);
                        in_ext[ext[j]] = 1;
                    }
                }
                for (int u : adj[v]) {
                    if (!in_set[u] && !banned[u] && !in_ext[u]) {
                        next_ext.push_back(u);
                        in_ext[u] = 1;
                    }
                }
                for (int u : next_ext) in_ext[u] = 0;
                rec(next_ext);
            }
            // current was left sorted by the visit above; remove v by value.
            current.erase(std::find(current.begin(), current.end(), v));
            in_set[v] = 0;
            banned[v] = 1;
            banned_here.push_back(v);
        }
        for (int u : banned_here) banned[u] = 0;
    }
};

}  // namespace

void enumerate_connected_subsets(
    int n_vertices, const std::vector<std::vector<int>>& adj, int root,
    int size_cap, const std::function<void(const std::vector<int>&)>& visit) {
    if (root < 0 || root >= n_vertices) {
        throw ConfigError("subset enumeration: root out of range");
    }
    if (size_cap < 1) throw ConfigError("subset enumeration: cap must be >= 1");
    SubsetEnum en{adj, size_cap, visit, {}, {}, {}, {}};
    en.in_set.assign(n_vertices, 0);
    en.banned.assign(n_vertices, 0);
    en.in_ext.assign(n_vertices, 0);
    en.current.push_back(root);
    en.in_set[root] = 1;
    visit(en.current);
    if (size_cap > 1) {
        std::vector<int> ext;
        for (int u : adj[root]) {
            if (!en.in_ext[u] && u != root) {
                ext.push_back(u);
                en.in_ext[u] = 1;
            }
        }
        for (int u : ext) en.in_ext[u] = 0;
        en.rec(ext);
    }
}

// ---------------------------------------------------------------- kappa_lambda

namespace {

// Lexicographic comparison of sorted id vectors. Vertex ids follow the
// canonical site order, so this is the canonical set order used for ties.
bool id_set_less(const std::vector<int>& a, const std::vector<int>& b) {
    return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

constexpr double kTieTol = 1e-12;

}  // namespace

CutResult kappa_lambda(const Weights& w, const NeighborhoodSet& lambda,
                       int size_cap) {
    if (lambda.d() != w.d) throw ConfigError("kappa_lambda: dimension mismatch");
    if (lambda.size() > 4096) {
        throw BudgetError("kappa_lambda: neighborhood too large for subset enumeration");
    }
    const int d = w.d;
    const int n = static_cast<int>(lambda.size());
    const auto& verts = lambda.vertices();

    // Per-vertex neighbor ids (-1 when the neighbor leaves Lambda) and
    // boundary flags.
    std::vector<std::array<int, 2 * kMaxDim>> nbr(n);
    std::vector<char> on_boundary(n, 0);
    std::vector<std::vector<int>> adj(n);
    for (int v = 0; v < n; ++v) {
        for (int dir = 0; dir < 2 * d; ++dir) {
            const int id = lambda.index_of(step(verts[v], dir, d));
            nbr[v][dir] = id;
            if (id >= 0) {
                adj[v].push_back(id);
            } else {
                on_boundary[v] = 1;
            }
        }
    }

    const int root = lambda.index_of(Site{});
    double best = std::numeric_limits<double>::infinity();
    std::vector<int> best_set;
    std::vector<char> in_set(n, 0);

    enumerate_connected_subsets(n, adj, root, size_cap, [&](const std::vector<int>& S) {
        bool touches = false;
        for (int v : S) {
            in_set[v] = 1;
            if (on_boundary[v]) touches = true;
        }
        if (touches) {
            double exit_sum = 0.0;
            for (int v : S) {
                for (int dir = 0; dir < 2 * d; ++dir) {
                    const int head = nbr[v][dir];
                    if (head < 0 || !in_set[head]) exit_sum += w.alpha[dir];
                }
            }
            if (exit_sum < best - kTieTol ||
                (std::abs(exit_sum - best) <= kTieTol &&
                 (best_set.empty() || id_set_less(S, best_set)))) {
                if (exit_sum < best) best = exit_sum;
                best_set = S;
            }
        }
        for (int v : S) in_set[v] = 0;
    });

    if (best_set.empty()) {
        throw BudgetError(
            "kappa_lambda: no admissible subset within the size cap reaches the boundary");
    }
    if (static_cast<int>(best_set.size()) >= size_cap) {
        throw BudgetError("kappa_lambda: minimizer saturates the size cap (" +
                          std::to_string(size_cap) + "); raise the cap");
    }

    CutResult out;
    out.argmin.reserve(best_set.size());
    for (int v : best_set) {
        out.argmin.push_back(verts[v]);
        in_set[v] = 1;
    }
    double value = 0.0;
    for (int v : best_set) {
        for (int dir = 0; dir < 2 * d; ++dir) {
            const int head = nbr[v][dir];
            if (head < 0 || !in_set[head]) {
                out.cut_edges.push_back({verts[v], dir, step(verts[v], dir, d)});
                value += w.alpha[dir];
            }
        }
    }
    for (int v : best_set) in_set[v] = 0;
    out.value = value;
    return out;
}

// ---------------------------------------------------------------- beta_min

namespace {

// Strong connectivity of the subgraph induced on S (ids sorted): forward
// and backward reachability from S[0] within S.
bool induced_strongly_connected(const CemeteryGraph& g, const std::vector<int>& S,
                                const std::vector<char>& in_set) {
    if (S.size() < 2) return false;
    for (int pass = 0; pass < 2; ++pass) {
        std::vector<char> seen(S.size(), 0);
        std::vector<int> stack{S[0]};
        auto pos = [&](int v) {
            return static_cast<std::size_t>(
                std::lower_bound(S.begin(), S.end(), v) - S.begin());
        };
        seen[pos(S[0])] = 1;
        std::size_t count = 1;
        while (!stack.empty()) {
            const int v = stack.back();
            stack.pop_back();
            if (pass == 0) {
                for (const auto& e : g.adj[v]) {
                    if (e.to != g.delta() && in_set[e.to] && !seen[pos(e.to)]) {
                        seen[pos(e.to)] = 1;
                        ++count;
                        stack.push_back(e.to);
                    }
                }
            } else {
                // Backward pass: scan all edges into v from S.
                for (int u : S) {
                    if (u == v || seen[pos(u)]) continue;
                    for (const auto& e : g.adj[u]) {
                        if (e.to == v) {
                            seen[pos(u)] = 1;
                            ++count;
                            stack.push_back(u);
                            break;
                        }
                    }
                }
            }
        }
        if (count != S.size()) return false;
    }
    return true;
}

}  // namespace

GraphCutResult beta_min(const CemeteryGraph& g, int vertex0, int size_cap) {
    validate_cemetery_graph(g);
    require_symmetric_core(g);
    if (vertex0 < 0 || vertex0 >= g.n) {
        throw ConfigError("beta_min: root vertex out of range");
    }
    // Undirected adjacency over the symmetric core.
    std::vector<std::vector<int>> adj(g.n);
    for (int v = 0; v < g.n; ++v) {
        for (const auto& e : g.adj[v]) {
            if (e.to != g.delta()) adj[v].push_back(e.to);
        }
    }

    double best = std::numeric_limits<double>::infinity();
    std::vector<int> best_set;
    std::vector<char> in_set(g.n, 0);

    enumerate_connected_subsets(g.n, adj, vertex0, size_cap, [&](const std::vector<int>& S) {
        if (S.size() < 2) return;  // no loops, so a single vertex carries no edge set
        for (int v : S) in_set[v] = 1;
        if (induced_strongly_connected(g, S, in_set)) {
            double exit_sum = 0.0;
            for (int v : S) {
                for (const auto& e : g.adj[v]) {
                    if (e.to == g.delta() || !in_set[e.to]) exit_sum += e.alpha;
                }
            }
            if (exit_sum < best - kTieTol ||
                (std::abs(exit_sum - best) <= kTieTol &&
                 (best_set.empty() || id_set_less(S, best_set)))) {
                if (exit_sum < best) best = exit_sum;
                best_set = S;
            }
        }
        for (int v : S) in_set[v] = 0;
    });

    if (best_set.empty()) {
        throw ConfigError("beta_min: no strongly connected vertex set contains the root");
    }
    if (static_cast<int>(best_set.size()) >= size_cap) {
        throw BudgetError("beta_min: minimizer saturates the size cap (" +
                          std::to_string(size_cap) + "); raise the cap");
    }

    GraphCutResult out;
    out.argmin = best_set;
    for (int v : best_set) in_set[v] = 1;
    double value = 0.0;
    for (int v : best_set) {
        for (const auto& e : g.adj[v]) {
            if (e.to == g.delta() || !in_set[e.to]) {
                out.cut_edges.emplace_back(v, e.to);
                value += e.alpha;
            }
        }
    }
    for (int v : best_set) in_set[v] = 0;
    out.value = value;
    return out;
}

}  // namespace rwde
