#include "rwde/exit_paths.hpp"

#include <string>

#include "rwde/util.hpp"

namespace rwde {

namespace {

// Offset ids are the neighborhood's own vertex indices, so probability
// tables can be prepared per Lambda vertex without a reachability pass.
struct EnumState {
    const NeighborhoodSet* lambda;
    int d;
    std::size_t budget;
    std::size_t visited = 0;
    ExitPathSet* out;
    std::vector<char> on_path;
};

void dfs(EnumState& st, const Site& cur, std::int32_t cur_id, int depth) {
    for (int dir = 0; dir < 2 * st.d; ++dir) {
        Site nxt = step(cur, dir, st.d);
        const int nxt_id = st.lambda->index_of(nxt);
        if (nxt_id >= 0 && st.on_path[nxt_id]) continue;  // would self-intersect
        if (++st.visited > st.budget) {
            throw BudgetError(
                "exit-path enumeration exceeded the node budget (" +
                std::to_string(st.budget) + "); use gamma_mc for this neighborhood");
        }
        ExitPathSet::Node node;
        node.from_offset = cur_id;
        node.depth = static_cast<std::int16_t>(depth + 1);
        node.dir = static_cast<std::int8_t>(dir);
        node.exit = nxt_id < 0 ? 1 : 0;
        st.out->nodes.push_back(node);
        st.out->max_depth = std::max(st.out->max_depth, depth + 1);
        if (nxt_id < 0) {
            ++st.out->path_count;
        } else {
            st.on_path[nxt_id] = 1;
            dfs(st, nxt, nxt_id, depth + 1);
            st.on_path[nxt_id] = 0;
        }
    }
}

}  // namespace

ExitPathSet enumerate_exit_paths(const NeighborhoodSet& lambda, int d,
                                 std::size_t node_budget) {
    if (lambda.d() != d) {
        throw ConfigError("enumerate_exit_paths: neighborhood dimension mismatch");
    }
    ExitPathSet out;
    out.d = d;
    out.offsets = lambda.vertices();
    EnumState st;
    st.lambda = &lambda;
    st.d = d;
    st.budget = node_budget;
    st.out = &out;
    st.on_path.assign(lambda.size(), 0);
    const int root = lambda.index_of(Site{});
    st.on_path[root] = 1;
    dfs(st, Site{}, root, 0);
    return out;
}

std::vector<std::vector<Site>> ExitPathSet::materialize_paths() const {
    std::vector<std::vector<Site>> result;
    result.reserve(path_count);
    // Replay the preorder: a node at depth k extends the current vertex
    // stack truncated to its first k vertices.
    std::vector<Site> stack{Site{}};
    for (const Node& node : nodes) {
        stack.resize(node.depth);
        Site head = step(offsets[node.from_offset], node.dir, d);
        stack.push_back(head);
        if (node.exit) result.push_back(stack);
    }
    return result;
}

}  // namespace rwde
