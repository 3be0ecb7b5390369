#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "formsim/configuration.hpp"
#include "formsim/control.hpp"
#include "formsim/graph.hpp"

namespace formsim {

/// Default drift-norm tolerance for equilibrium detection. Post-integration
/// residuals at dt = 1e-3 settle near this scale.
inline constexpr double kEquilibriumTol = 1e-8;

/// One coordinate of the product-of-spheres parametrization: a unit direction
/// attached to a tree edge, ordered parent -> child in construction order.
struct SpherePoint {
    std::pair<int, int> edge;       // (parent, child)
    std::vector<double> direction;  // unit vector in R^n
};

struct EquilibriumReport {
    bool is_equilibrium = false;
    double drift_norm = 0.0;
    std::vector<EdgeGain> per_edge_gains;
    /// Only populated for trees: every edge gain satisfies |u_ij| <= tol.
    std::optional<bool> tree_condition_holds;
    /// Edges whose endpoints sit within the coincidence threshold.
    std::vector<Edge> coincident_edges;
};

inline EquilibriumReport check_equilibrium(const Graph& g,
                                           const Configuration& p,
                                           const Configuration& q,
                                           double tol = kEquilibriumTol) {
    if (tol <= 0.0)
        throw std::invalid_argument("check_equilibrium: tol must be positive");
    detail::check_compatible(g, p, q, "check_equilibrium");

    EquilibriumReport rep;
    rep.per_edge_gains = all_edge_gains(g, p, q);

    std::vector<double> u(rep.per_edge_gains.size());
    for (std::size_t e = 0; e < u.size(); ++e)
        u[e] = rep.per_edge_gains[e].value;
    std::vector<double> d(p.coords().size());
    detail::drift_into(g, p, u, d);
    rep.drift_norm = norm(d);
    rep.is_equilibrium = rep.drift_norm <= tol;

    for (const auto& [i, j] : g.edges()) {
        auto ai = p.point(i);
        auto aj = p.point(j);
        double sep2 = 0.0;
        for (std::size_t k = 0; k < ai.size(); ++k) {
            const double ar = aj[k] - ai[k];
            sep2 += ar * ar;
        }
        if (sep2 <= kCoincideEps * kCoincideEps)
            rep.coincident_edges.push_back(make_edge(i, j));
    }

    if (g.is_tree()) {
        bool all_small = true;
        for (const auto& eg : rep.per_edge_gains)
            if (std::abs(eg.value) > tol) all_small = false;
        rep.tree_condition_holds = all_small;
    }
    return rep;
}

struct Sphere {
    std::vector<double> center;
    double radius = 0.0;
};

/// Two-agent case: relative vectors v with <b_1 - b_2, v> = |v|^2 form the
/// sphere of radius |b_1 - b_2|/2 centered at (b_1 - b_2)/2.
inline Sphere two_agent_sphere(const Configuration& q) {
    if (q.n_points() != 2)
        throw std::invalid_argument("two_agent_sphere: needs exactly 2 points");
    Sphere s;
    auto b1 = q.point(1);
    auto b2 = q.point(2);
    s.center.resize(b1.size());
    for (std::size_t k = 0; k < b1.size(); ++k)
        s.center[k] = (b1[k] - b2[k]) / 2.0;
    s.radius = norm(s.center);
    return s;
}

enum class SphereRegion { inside, on, outside };

inline const char* to_string(SphereRegion r) {
    switch (r) {
        case SphereRegion::inside: return "inside";
        case SphereRegion::on: return "on";
        case SphereRegion::outside: return "outside";
    }
    return "?";
}

/// Classify v against the two-agent sphere by the sign of
/// <b_1 - b_2, v> - |v|^2, with |.| <= tol reported as on. The sign equals
/// radius^2 - |v - center|^2 algebraically, so this matches the geometric
/// classification.
inline SphereRegion classify_relative_position(const Configuration& q,
                                               std::span<const double> v,
                                               double tol = 1e-9) {
    if (q.n_points() != 2)
        throw std::invalid_argument(
            "classify_relative_position: needs exactly 2 points");
    if (static_cast<int>(v.size()) != q.dimension())
        throw std::invalid_argument(
            "classify_relative_position: v dimension mismatch");
    auto b1 = q.point(1);
    auto b2 = q.point(2);
    double s = 0.0;
    for (std::size_t k = 0; k < v.size(); ++k)
        s += (b1[k] - b2[k]) * v[k] - v[k] * v[k];
    if (s > tol) return SphereRegion::inside;
    if (s < -tol) return SphereRegion::outside;
    return SphereRegion::on;
}

/// Tree edges as ordered (parent, child) pairs in the order a builder must
/// attach them: reverse of leaf_order, so every child's parent is already
/// placed (the first parent is the root).
inline std::vector<std::pair<int, int>> tree_construction_edges(
    const Graph& g) {
    const std::vector<LeafRemoval> removals = leaf_order(g);
    std::vector<std::pair<int, int>> out;
    out.reserve(removals.size());
    for (auto it = removals.rbegin(); it != removals.rend(); ++it) {
        const int child = it->leaf;
        const int parent =
            (it->edge.first == child) ? it->edge.second : it->edge.first;
        out.emplace_back(parent, child);
    }
    return out;
}

/// Build the equilibrium with edge-relative vectors v_e = c_e + r_e s_e,
/// where c_e = (b_child - b_parent)/2 and r_e = |b_child - b_parent|/2.
/// Positions propagate from the root and are then projected to centroid zero.
/// Degenerate edges (equal targets) force v_e = 0 whatever s_e says.
inline Configuration sample_tree_equilibrium(
    const Graph& g, const Configuration& q,
    const std::vector<SpherePoint>& coords) {
    if (!g.is_tree())
        throw std::invalid_argument("sample_tree_equilibrium: graph is not a tree");
    if (q.n_points() != g.n_vertices())
        throw std::invalid_argument(
            "sample_tree_equilibrium: target size != graph order");
    const auto construction = tree_construction_edges(g);
    if (coords.size() != construction.size())
        throw std::invalid_argument(
            "sample_tree_equilibrium: expected " +
            std::to_string(construction.size()) + " sphere points, got " +
            std::to_string(coords.size()));

    const int dim = q.dimension();
    Configuration p(g.n_vertices(), dim);
    std::vector<bool> placed(static_cast<std::size_t>(g.n_vertices()) + 1,
                             false);
    placed[static_cast<std::size_t>(tree_root(g))] = true;

    for (std::size_t e = 0; e < construction.size(); ++e) {
        const auto [parent, child] = construction[e];
        const SpherePoint& sp = coords[e];
        if (sp.edge != construction[e])
            throw std::invalid_argument(
                "sample_tree_equilibrium: sphere point " + std::to_string(e) +
                " is for edge (" + std::to_string(sp.edge.first) + "," +
                std::to_string(sp.edge.second) + "), construction order wants (" +
                std::to_string(parent) + "," + std::to_string(child) + ")");
        if (static_cast<int>(sp.direction.size()) != dim)
            throw std::invalid_argument(
                "sample_tree_equilibrium: direction dimension mismatch at edge " +
                std::to_string(e));
        if (!placed[static_cast<std::size_t>(parent)])
            throw std::logic_error(
                "sample_tree_equilibrium: construction order broken");

        auto bp = q.point(parent);
        auto bc = q.point(child);
        std::vector<double> half(static_cast<std::size_t>(dim));
        for (int k = 0; k < dim; ++k) half[k] = (bc[k] - bp[k]) / 2.0;
        const double r = norm(half);

        if (r > 0.0 && std::abs(norm(std::span<const double>(sp.direction)) -
                                1.0) > 1e-12)
            throw std::invalid_argument(
                "sample_tree_equilibrium: direction at edge " +
                std::to_string(e) + " is not unit length");

        auto ap = p.point(parent);
        auto ac = p.point(child);
        for (int k = 0; k < dim; ++k)
            ac[k] = ap[k] + half[k] + r * sp.direction[k];
        placed[static_cast<std::size_t>(child)] = true;
    }

    return project_to_centroid_zero(p);
}

/// Dimension of the tree equilibrium manifold, a product of N-1 spheres
/// S^{n-1}: (N-1)(n-1).
inline int equilibrium_manifold_dimension(const Graph& g, int n) {
    if (!g.is_tree())
        throw std::invalid_argument(
            "equilibrium_manifold_dimension: graph is not a tree");
    if (n < 1)
        throw std::invalid_argument(
            "equilibrium_manifold_dimension: dimension must be >= 1");
    return (g.n_vertices() - 1) * (n - 1);
}

}  // namespace formsim
