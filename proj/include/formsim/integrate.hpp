#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "formsim/configuration.hpp"
#include "formsim/control.hpp"
#include "formsim/graph.hpp"
#include "formsim/rng.hpp"

#if defined(_MSC_VER)
#define FORMSIM_NOINLINE __declspec(noinline)
#else
#define FORMSIM_NOINLINE __attribute__((noinline))
#endif

namespace formsim {

/// Coordinates beyond this magnitude abort the run (explicit schemes blowing
/// up at coarse dt should fail loudly, not overflow quietly).
inline constexpr double kDivergenceGuard = 1e12;

enum class Scheme {
    deterministic_rk4,
    deterministic_euler,
    stochastic_euler_maruyama,
};

inline const char* to_string(Scheme s) {
    switch (s) {
        case Scheme::deterministic_rk4: return "deterministic-rk4";
        case Scheme::deterministic_euler: return "deterministic-euler";
        case Scheme::stochastic_euler_maruyama:
            return "stochastic-euler-maruyama";
    }
    return "?";
}

inline Scheme scheme_from_string(const std::string& name) {
    if (name == "deterministic-rk4") return Scheme::deterministic_rk4;
    if (name == "deterministic-euler") return Scheme::deterministic_euler;
    if (name == "stochastic-euler-maruyama")
        return Scheme::stochastic_euler_maruyama;
    throw std::invalid_argument("unknown scheme \"" + name +
                                "\" (expected deterministic-rk4, "
                                "deterministic-euler, or "
                                "stochastic-euler-maruyama)");
}

/// Decaying noise schedule. c1 = 0 recovers the deterministic system.
struct AnnealingSchedule {
    double c1 = 0.0;
    double c2 = 0.0;
};

struct IntegratorParams {
    double dt = 1e-3;
    double t_end = 0.0;
    long long record_every = 1;
    Scheme scheme = Scheme::deterministic_rk4;
};

class integration_error : public std::runtime_error {
public:
    explicit integration_error(const std::string& msg,
                               double t = std::numeric_limits<double>::quiet_NaN())
        : std::runtime_error(std::isnan(t) ? msg
                                           : msg + " at t = " + std::to_string(t)),
          time_(t) {}

    double time() const { return time_; }
    bool has_time() const { return !std::isnan(time_); }

private:
    double time_;
};

struct Trajectory {
    /// Edge list of the graph that produced the run, lexicographic order;
    /// indexes the per-snapshot gain rows.
    std::vector<Edge> edges;
    std::vector<double> times;
    std::vector<Configuration> configurations;
    std::vector<double> lyapunov_values;
    std::vector<std::vector<double>> centroids;
    /// Per snapshot, one gain per edge in the graph's lexicographic order.
    std::vector<std::vector<double>> edge_gains;

    std::size_t size() const { return times.size(); }
};

/// lambda(t) = c1 e^{-c2 t} / separation for separated pairs, 0 at
/// coincidence.
inline double noise_amplitude(double t, double separation,
                              const AnnealingSchedule& sched) {
    if (separation < 0.0)
        throw std::invalid_argument("noise_amplitude: separation must be >= 0");
    if (separation <= kCoincideEps) return 0.0;
    return sched.c1 * std::exp(-sched.c2 * t) / separation;
}

namespace detail {

inline void validate_schedule(const AnnealingSchedule& sched) {
    if (!(sched.c1 >= 0.0))
        throw std::invalid_argument("AnnealingSchedule: c1 must be >= 0");
    if (!(sched.c2 >= 0.0))
        throw std::invalid_argument("AnnealingSchedule: c2 must be >= 0");
}

inline void validate_params(const IntegratorParams& params) {
    if (!(params.dt > 0.0))
        throw std::invalid_argument("IntegratorParams: dt must be > 0");
    if (!(params.t_end >= 0.0))
        throw std::invalid_argument("IntegratorParams: t_end must be >= 0");
    if (params.record_every < 1)
        throw std::invalid_argument(
            "IntegratorParams: record_every must be >= 1");
}

/// One Euler (draws == nullptr) or Euler-Maruyama step: per edge,
/// coefficient u dt + lambda sqrt(dt) xi applied as a paired +/- displacement
/// along a_i - a_j, gains and lambda taken at the pre-step state. `next` must
/// enter as a copy of `cur`. Kept out of line so the noiseless stochastic
/// path replays the plain Euler path bit for bit.
inline FORMSIM_NOINLINE void euler_step_raw(const Graph& g,
                                            const std::vector<double>& cur,
                                            const std::vector<double>& target,
                                            int dim, double t, double dt,
                                            double c1, double c2,
                                            const double* draws,
                                            std::vector<double>& next) {
    const double sqrt_dt = std::sqrt(dt);
    const double decay = c1 * std::exp(-c2 * t);
    std::size_t e = 0;
    for (const auto& [i, j] : g.edges()) {
        const double* ai = cur.data() + static_cast<std::size_t>(i - 1) * dim;
        const double* aj = cur.data() + static_cast<std::size_t>(j - 1) * dim;
        const double* bi =
            target.data() + static_cast<std::size_t>(i - 1) * dim;
        const double* bj =
            target.data() + static_cast<std::size_t>(j - 1) * dim;
        double sep2 = 0.0;
        double proj = 0.0;
        for (int k = 0; k < dim; ++k) {
            const double ar = aj[k] - ai[k];
            sep2 += ar * ar;
            proj += (bj[k] - bi[k]) * ar;
        }
        double coef = 0.0;
        if (sep2 > kCoincideEps * kCoincideEps) {
            const double u = proj / sep2 - 1.0;
            double noise = 0.0;
            if (draws != nullptr)
                noise = decay / std::sqrt(sep2) * sqrt_dt * draws[e];
            coef = u * dt + noise;
        }
        double* ni = next.data() + static_cast<std::size_t>(i - 1) * dim;
        double* nj = next.data() + static_cast<std::size_t>(j - 1) * dim;
        for (int k = 0; k < dim; ++k) {
            const double d = coef * (ai[k] - aj[k]);
            ni[k] += d;
            nj[k] -= d;
        }
        ++e;
    }
}

struct Rk4Buffers {
    std::vector<double> u, k1, k2, k3, k4, stage;

    void resize(std::size_t n_edges, std::size_t n_coords) {
        u.resize(n_edges);
        k1.resize(n_coords);
        k2.resize(n_coords);
        k3.resize(n_coords);
        k4.resize(n_coords);
        stage.resize(n_coords);
    }
};

inline void eval_drift_raw(const Graph& g, const double* a, const double* b,
                           int dim, double* u, double* out) {
    edge_gains_raw(g, a, b, dim, u);
    drift_raw(g, a, dim, u, out);
}

inline void rk4_step_raw(const Graph& g, const std::vector<double>& cur,
                         const std::vector<double>& target, int dim, double dt,
                         Rk4Buffers& b, std::vector<double>& next) {
    const std::size_t m = cur.size();
    const double* tgt = target.data();
    eval_drift_raw(g, cur.data(), tgt, dim, b.u.data(), b.k1.data());
    for (std::size_t k = 0; k < m; ++k)
        b.stage[k] = cur[k] + 0.5 * dt * b.k1[k];
    eval_drift_raw(g, b.stage.data(), tgt, dim, b.u.data(), b.k2.data());
    for (std::size_t k = 0; k < m; ++k)
        b.stage[k] = cur[k] + 0.5 * dt * b.k2[k];
    eval_drift_raw(g, b.stage.data(), tgt, dim, b.u.data(), b.k3.data());
    for (std::size_t k = 0; k < m; ++k)
        b.stage[k] = cur[k] + dt * b.k3[k];
    eval_drift_raw(g, b.stage.data(), tgt, dim, b.u.data(), b.k4.data());
    for (std::size_t k = 0; k < m; ++k)
        next[k] = cur[k] + dt / 6.0 *
                               (b.k1[k] + 2.0 * (b.k2[k] + b.k3[k]) + b.k4[k]);
}

inline void check_finite(const std::vector<double>& coords, double t,
                         const char* where) {
    for (double x : coords)
        if (!std::isfinite(x))
            throw integration_error(std::string(where) +
                                        ": non-finite coordinate",
                                    t);
}

inline void check_diverged(const std::vector<double>& coords, double t) {
    for (double x : coords)
        if (!(std::abs(x) <= kDivergenceGuard))
            throw integration_error("integrate: state diverged", t);
}

}  // namespace detail

/// One explicit step of the drift field, Euler or RK4.
inline Configuration step_deterministic(const Graph& g, const Configuration& p,
                                        const Configuration& q, double dt,
                                        Scheme scheme) {
    if (!(dt > 0.0))
        throw std::invalid_argument("step_deterministic: dt must be > 0");
    if (scheme == Scheme::stochastic_euler_maruyama)
        throw std::invalid_argument(
            "step_deterministic: scheme must be deterministic");
    detail::check_compatible(g, p, q, "step_deterministic");

    Configuration next = p;
    if (scheme == Scheme::deterministic_euler) {
        detail::euler_step_raw(g, p.coords(), q.coords(), p.dimension(), 0.0,
                               dt, 0.0, 0.0, nullptr, next.coords());
    } else {
        detail::Rk4Buffers b;
        b.resize(g.edges().size(), p.coords().size());
        detail::rk4_step_raw(g, p.coords(), q.coords(), p.dimension(), dt, b,
                             next.coords());
    }
    detail::check_finite(next.coords(), std::numeric_limits<double>::quiet_NaN(),
                         "step_deterministic");
    return next;
}

/// One Euler-Maruyama step of the annealed SDE. `noise_draws` carries one
/// standard normal per edge in the graph's lexicographic order; the same draw
/// drives both endpoints of its edge.
inline Configuration step_stochastic(const Graph& g, const Configuration& p,
                                     const Configuration& q, double t,
                                     double dt, const AnnealingSchedule& sched,
                                     std::span<const double> noise_draws) {
    if (!(dt > 0.0))
        throw std::invalid_argument("step_stochastic: dt must be > 0");
    detail::validate_schedule(sched);
    detail::check_compatible(g, p, q, "step_stochastic");
    if (noise_draws.size() != g.edges().size())
        throw std::invalid_argument(
            "step_stochastic: expected " + std::to_string(g.edges().size()) +
            " noise draws, got " + std::to_string(noise_draws.size()));

    Configuration next = p;
    detail::euler_step_raw(g, p.coords(), q.coords(), p.dimension(), t, dt,
                           sched.c1, sched.c2, noise_draws.data(),
                           next.coords());
    detail::check_finite(next.coords(), t + dt, "step_stochastic");
    return next;
}

/// Optional early-stop predicate, evaluated at every recorded snapshot.
using StopCondition = std::function<bool(double, const Configuration&)>;

/// Run the selected scheme from t = 0 to t_end. Snapshots are taken at t = 0,
/// every record_every-th step, and the final state. Step times are k*dt (no
/// accumulated sum); a shorter final step covers any remainder of t_end.
/// Stochastic runs draw one normal per edge per step, edges in lexicographic
/// order, from a splitmix64-fed Box-Muller stream seeded with `seed`;
/// deterministic schemes never touch the stream, so the seed is ignored.
inline Trajectory integrate(const Graph& g, const Configuration& p0,
                            const Configuration& q,
                            const IntegratorParams& params,
                            const AnnealingSchedule& sched, std::uint64_t seed,
                            const StopCondition& stop = {}) {
    detail::validate_params(params);
    detail::validate_schedule(sched);
    detail::check_compatible(g, p0, q, "integrate");
    {
        const std::vector<double> c = centroid(p0);
        if (norm(std::span<const double>(c)) > kCentroidEps)
            throw std::invalid_argument(
                "integrate: initial configuration centroid is not zero "
                "(|centroid| > 1e-9); project it first");
    }

    const int dim = p0.dimension();
    const std::size_t n_edges = g.edges().size();
    const bool stochastic = params.scheme == Scheme::stochastic_euler_maruyama;
    const bool rk4 = params.scheme == Scheme::deterministic_rk4;

    Trajectory traj;
    traj.edges = g.edges();
    std::vector<double> gains(n_edges);

    const auto record = [&](double t, const Configuration& c) {
        traj.times.push_back(t);
        traj.configurations.push_back(c);
        traj.lyapunov_values.push_back(lyapunov(c, q));
        traj.centroids.push_back(centroid(c));
        detail::edge_gains_into(g, c, q, gains);
        traj.edge_gains.push_back(gains);
    };

    Configuration cur = p0;
    Configuration next = p0;
    detail::Rk4Buffers rk4_buf;
    if (rk4) rk4_buf.resize(n_edges, cur.coords().size());
    NormalStream normals(seed);
    std::vector<double> draws(n_edges);

    record(0.0, cur);
    if (stop && stop(0.0, cur)) return traj;

    const auto advance = [&](double t, double h) {
        if (rk4) {
            detail::rk4_step_raw(g, cur.coords(), q.coords(), dim, h, rk4_buf,
                                 next.coords());
        } else {
            if (stochastic)
                for (std::size_t e = 0; e < n_edges; ++e)
                    draws[e] = normals.next();
            next.coords() = cur.coords();
            detail::euler_step_raw(g, cur.coords(), q.coords(), dim, t, h,
                                   sched.c1, sched.c2,
                                   stochastic ? draws.data() : nullptr,
                                   next.coords());
        }
        std::swap(cur, next);
    };

    long long k = 0;
    bool stopped = false;
    const double slack = 1e-9 * params.dt;
    while ((static_cast<double>(k) + 1.0) * params.dt <=
           params.t_end + slack) {
        const double t = static_cast<double>(k) * params.dt;
        advance(t, params.dt);
        ++k;
        const double t_now = static_cast<double>(k) * params.dt;
        detail::check_diverged(cur.coords(), t_now);
        if (k % params.record_every == 0) {
            record(t_now, cur);
            if (stop && stop(t_now, cur)) {
                stopped = true;
                break;
            }
        }
    }

    if (!stopped) {
        const double t_full = static_cast<double>(k) * params.dt;
        if (t_full < params.t_end - slack) {
            advance(t_full, params.t_end - t_full);
            detail::check_diverged(cur.coords(), params.t_end);
            record(params.t_end, cur);
        } else if (k % params.record_every != 0) {
            record(t_full, cur);
        }
    }

    return traj;
}

}  // namespace formsim
