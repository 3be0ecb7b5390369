#pragma once

#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "formsim/configuration.hpp"
#include "formsim/graph.hpp"

namespace formsim {

/// Gain on one undirected edge. Symmetric by construction: the same value acts
/// at both endpoints.
struct EdgeGain {
    Edge edge;
    double value = 0.0;

    bool operator==(const EdgeGain&) const = default;
};

/// u = <b_rel, a_rel> / |a_rel|^2 - 1, with u = 0 when the pair is coincident
/// (|a_rel| below kCoincideEps).
inline double edge_gain(std::span<const double> b_rel,
                        std::span<const double> a_rel) {
    if (b_rel.size() != a_rel.size())
        throw std::invalid_argument("edge_gain: dimension mismatch");
    const double sep2 = norm_squared(a_rel);
    if (sep2 <= kCoincideEps * kCoincideEps) return 0.0;
    return dot(b_rel, a_rel) / sep2 - 1.0;
}

namespace detail {

inline void check_compatible(const Graph& g, const Configuration& p,
                             const Configuration& q, const char* where) {
    if (p.n_points() != g.n_vertices() || q.n_points() != g.n_vertices())
        throw std::invalid_argument(std::string(where) +
                                    ": configuration size != graph order");
    if (p.dimension() != q.dimension())
        throw std::invalid_argument(std::string(where) +
                                    ": dimension mismatch between p and q");
}

/// Gains for every edge in graph order, from flat point-major coords.
/// `out` has one slot per edge.
inline void edge_gains_raw(const Graph& g, const double* a, const double* b,
                           int dim, double* out) {
    std::size_t e = 0;
    for (const auto& [i, j] : g.edges()) {
        const double* ai = a + static_cast<std::size_t>(i - 1) * dim;
        const double* aj = a + static_cast<std::size_t>(j - 1) * dim;
        const double* bi = b + static_cast<std::size_t>(i - 1) * dim;
        const double* bj = b + static_cast<std::size_t>(j - 1) * dim;
        double sep2 = 0.0;
        double proj = 0.0;
        for (int k = 0; k < dim; ++k) {
            const double ar = aj[k] - ai[k];
            sep2 += ar * ar;
            proj += (bj[k] - bi[k]) * ar;
        }
        out[e++] = (sep2 <= kCoincideEps * kCoincideEps) ? 0.0
                                                         : proj / sep2 - 1.0;
    }
}

/// Drift under gains `u` (graph edge order), written into `out` (zeroed here,
/// size N*dim). Each edge contributes one displacement u * (a_i - a_j) added
/// at i and subtracted at j, so the summed drift cancels exactly up to
/// addition reordering.
inline void drift_raw(const Graph& g, const double* a, int dim,
                      const double* u, double* out) {
    const std::size_t m = static_cast<std::size_t>(g.n_vertices()) * dim;
    for (std::size_t k = 0; k < m; ++k) out[k] = 0.0;
    std::size_t e = 0;
    for (const auto& [i, j] : g.edges()) {
        const double* ai = a + static_cast<std::size_t>(i - 1) * dim;
        const double* aj = a + static_cast<std::size_t>(j - 1) * dim;
        double* oi = out + static_cast<std::size_t>(i - 1) * dim;
        double* oj = out + static_cast<std::size_t>(j - 1) * dim;
        const double ue = u[e++];
        for (int k = 0; k < dim; ++k) {
            const double d = ue * (ai[k] - aj[k]);
            oi[k] += d;
            oj[k] -= d;
        }
    }
}

inline void edge_gains_into(const Graph& g, const Configuration& p,
                            const Configuration& q, std::span<double> out) {
    edge_gains_raw(g, p.coords().data(), q.coords().data(), p.dimension(),
                   out.data());
}

inline void drift_into(const Graph& g, const Configuration& p,
                       std::span<const double> u, std::span<double> out) {
    drift_raw(g, p.coords().data(), p.dimension(), u.data(), out.data());
}

}  // namespace detail

/// Gains for all edges, in the graph's lexicographic edge order.
inline std::vector<EdgeGain> all_edge_gains(const Graph& g,
                                            const Configuration& p,
                                            const Configuration& q) {
    detail::check_compatible(g, p, q, "all_edge_gains");
    std::vector<double> values(g.edges().size());
    detail::edge_gains_into(g, p, q, values);
    std::vector<EdgeGain> out;
    out.reserve(values.size());
    for (std::size_t e = 0; e < values.size(); ++e)
        out.push_back({g.edges()[e], values[e]});
    return out;
}

/// Right-hand side of the closed-loop dynamics: da_i/dt = sum over neighbors j
/// of u_ij (a_i - a_j). Flat layout matching Configuration::coords().
inline std::vector<double> drift(const Graph& g, const Configuration& p,
                                 const Configuration& q) {
    detail::check_compatible(g, p, q, "drift");
    std::vector<double> u(g.edges().size());
    detail::edge_gains_into(g, p, q, u);
    std::vector<double> out(p.coords().size());
    detail::drift_into(g, p, u, out);
    return out;
}

/// Phi(p) = sum_i |a_i - b_i|^2.
inline double lyapunov(const Configuration& p, const Configuration& q) {
    if (p.n_points() != q.n_points() || p.dimension() != q.dimension())
        throw std::invalid_argument("lyapunov: size mismatch");
    double s = 0.0;
    for (std::size_t k = 0; k < p.coords().size(); ++k) {
        const double d = p.coords()[k] - q.coords()[k];
        s += d * d;
    }
    return s;
}

/// dPhi/dt along the flow: -2 sum over edges of u_ij^2 |a_i - a_j|^2. Always
/// nonpositive, and zero exactly when the drift vanishes. The chain rule on
/// |a_i - b_i|^2 contributes the leading 2.
inline double dissipation(const Graph& g, const Configuration& p,
                          const Configuration& q) {
    detail::check_compatible(g, p, q, "dissipation");
    const int dim = p.dimension();
    std::vector<double> u(g.edges().size());
    detail::edge_gains_into(g, p, q, u);
    double s = 0.0;
    std::size_t e = 0;
    for (const auto& [i, j] : g.edges()) {
        const double* ai = p.point(i).data();
        const double* aj = p.point(j).data();
        double sep2 = 0.0;
        for (int k = 0; k < dim; ++k) {
            const double ar = aj[k] - ai[k];
            sep2 += ar * ar;
        }
        s += u[e] * u[e] * sep2;
        ++e;
    }
    return -2.0 * s;
}

}  // namespace formsim
