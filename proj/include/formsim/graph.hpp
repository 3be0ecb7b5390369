#pragma once

#include <algorithm>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace formsim {

/// Unordered edge, stored canonically as (min, max). Vertex ids are 1-based
/// everywhere on the public surface.
using Edge = std::pair<int, int>;

inline Edge make_edge(int a, int b) {
    return a < b ? Edge{a, b} : Edge{b, a};
}

/// Undirected simple interaction graph. Immutable after construction;
/// connectivity and tree flags are computed eagerly.
class Graph {
public:
    Graph(int n_vertices, std::vector<Edge> edges)
        : n_(n_vertices) {
        if (n_ < 1)
            throw std::invalid_argument("Graph: n_vertices must be >= 1");
        edges_.reserve(edges.size());
        for (const Edge& e : edges) {
            if (e.first == e.second)
                throw std::invalid_argument("Graph: self-loop at vertex " +
                                            std::to_string(e.first));
            if (e.first < 1 || e.first > n_ || e.second < 1 || e.second > n_)
                throw std::invalid_argument(
                    "Graph: edge (" + std::to_string(e.first) + "," +
                    std::to_string(e.second) + ") endpoint out of range [1," +
                    std::to_string(n_) + "]");
            edges_.push_back(make_edge(e.first, e.second));
        }
        std::sort(edges_.begin(), edges_.end());
        if (std::adjacent_find(edges_.begin(), edges_.end()) != edges_.end())
            throw std::invalid_argument("Graph: duplicate edge");

        adjacency_.assign(static_cast<std::size_t>(n_) + 1, {});
        for (const Edge& e : edges_) {
            adjacency_[static_cast<std::size_t>(e.first)].push_back(e.second);
            adjacency_[static_cast<std::size_t>(e.second)].push_back(e.first);
        }
        for (auto& nbrs : adjacency_)
            std::sort(nbrs.begin(), nbrs.end());

        connected_ = compute_connected();
        tree_ = connected_ &&
                edges_.size() == static_cast<std::size_t>(n_) - 1;
    }

    int n_vertices() const { return n_; }

    /// Edges in lexicographic order; this fixed ordering is the draw order
    /// for per-edge noise and the CSV gain-column order.
    const std::vector<Edge>& edges() const { return edges_; }

    int n_edges() const { return static_cast<int>(edges_.size()); }

    /// Vertices adjacent to i, ascending.
    const std::vector<int>& neighbors(int i) const {
        check_vertex(i);
        return adjacency_[static_cast<std::size_t>(i)];
    }

    int degree(int i) const {
        check_vertex(i);
        return static_cast<int>(adjacency_[static_cast<std::size_t>(i)].size());
    }

    bool is_connected() const { return connected_; }
    bool is_tree() const { return tree_; }

    /// Star: vertex 1 joined to 2..n.
    static Graph star(int n) {
        std::vector<Edge> e;
        for (int i = 2; i <= n; ++i) e.push_back({1, i});
        return Graph(n, std::move(e));
    }

    /// Cycle 1-2-...-n-1. Needs n >= 3.
    static Graph circle(int n) {
        if (n < 3)
            throw std::invalid_argument("Graph::circle: need n >= 3");
        std::vector<Edge> e;
        for (int i = 1; i < n; ++i) e.push_back({i, i + 1});
        e.push_back({1, n});
        return Graph(n, std::move(e));
    }

    /// Chain 1-2-...-n.
    static Graph path(int n) {
        std::vector<Edge> e;
        for (int i = 1; i < n; ++i) e.push_back({i, i + 1});
        return Graph(n, std::move(e));
    }

private:
    void check_vertex(int i) const {
        if (i < 1 || i > n_)
            throw std::out_of_range("Graph: vertex id " + std::to_string(i) +
                                    " out of range [1," + std::to_string(n_) +
                                    "]");
    }

    bool compute_connected() const {
        std::vector<bool> seen(static_cast<std::size_t>(n_) + 1, false);
        std::vector<int> stack{1};
        seen[1] = true;
        int count = 0;
        while (!stack.empty()) {
            int v = stack.back();
            stack.pop_back();
            ++count;
            for (int w : adjacency_[static_cast<std::size_t>(v)]) {
                if (!seen[static_cast<std::size_t>(w)]) {
                    seen[static_cast<std::size_t>(w)] = true;
                    stack.push_back(w);
                }
            }
        }
        return count == n_;
    }

    int n_;
    std::vector<Edge> edges_;
    std::vector<std::vector<int>> adjacency_;
    bool connected_ = false;
    bool tree_ = false;
};

/// One step of a leaf elimination: the removed degree-one vertex and the edge
/// that attached it.
struct LeafRemoval {
    int leaf;
    Edge edge;

    bool operator==(const LeafRemoval&) const = default;
};

/// Leaf elimination ordering of a tree: repeatedly take the current set of
/// degree-one vertices and remove them in ascending id, each with its edge,
/// round after round until a single vertex remains. Reversing the list gives
/// an inductive construction of the tree, one new vertex per step.
inline std::vector<LeafRemoval> leaf_order(const Graph& g) {
    if (!g.is_tree())
        throw std::invalid_argument("leaf_order: graph is not a tree");

    const int n = g.n_vertices();
    std::vector<bool> alive(static_cast<std::size_t>(n) + 1, true);
    std::vector<int> deg(static_cast<std::size_t>(n) + 1, 0);
    for (int v = 1; v <= n; ++v) deg[static_cast<std::size_t>(v)] = g.degree(v);

    std::vector<LeafRemoval> order;
    if (n == 1) return order;
    order.reserve(static_cast<std::size_t>(n) - 1);
    while (order.size() + 1 < static_cast<std::size_t>(n)) {
        std::vector<int> round;
        for (int v = 1; v <= n; ++v)
            if (alive[static_cast<std::size_t>(v)] &&
                deg[static_cast<std::size_t>(v)] == 1)
                round.push_back(v);
        for (int leaf : round) {
            if (order.size() + 1 == static_cast<std::size_t>(n)) break;
            // a round of two mutual leaves loses the second to the first
            if (deg[static_cast<std::size_t>(leaf)] != 1) continue;
            int other = 0;
            for (int w : g.neighbors(leaf)) {
                if (alive[static_cast<std::size_t>(w)]) {
                    other = w;
                    break;
                }
            }
            alive[static_cast<std::size_t>(leaf)] = false;
            --deg[static_cast<std::size_t>(leaf)];
            --deg[static_cast<std::size_t>(other)];
            order.push_back({leaf, make_edge(leaf, other)});
        }
    }
    return order;
}

/// The vertex left standing after leaf elimination; reconstruction root.
inline int tree_root(const Graph& g) {
    const int n = g.n_vertices();
    if (n == 1) return 1;
    std::vector<bool> removed(static_cast<std::size_t>(n) + 1, false);
    for (const LeafRemoval& r : leaf_order(g))
        removed[static_cast<std::size_t>(r.leaf)] = true;
    for (int v = 1; v <= n; ++v)
        if (!removed[static_cast<std::size_t>(v)]) return v;
    return 1;  // unreachable
}

}  // namespace formsim
