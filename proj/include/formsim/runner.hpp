#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "formsim/configuration.hpp"
#include "formsim/control.hpp"
#include "formsim/equilibria.hpp"
#include "formsim/graph.hpp"
#include "formsim/integrate.hpp"
#include "formsim/scenario.hpp"

namespace formsim {

/// A deterministic run counts as converged once its drift norm falls to this.
inline constexpr double kPlateauDriftTol = 1e-8;

enum class RunStatus { converged_plateau, reached_t_end, failed };

inline const char* to_string(RunStatus s) {
    switch (s) {
        case RunStatus::converged_plateau: return "converged-plateau";
        case RunStatus::reached_t_end: return "reached-t-end";
        case RunStatus::failed: return "failed";
    }
    return "?";
}

struct RunSummary {
    std::string scenario_name;
    std::uint64_t seed = 0;
    RunStatus status = RunStatus::reached_t_end;
    double final_time = 0.0;
    double final_lyapunov = std::numeric_limits<double>::quiet_NaN();
    double max_centroid_drift = std::numeric_limits<double>::quiet_NaN();
    EquilibriumReport equilibrium_report;
    std::string error;
};

struct RunResult {
    /// One entry per attempted run; a failed run leaves an empty Trajectory.
    std::vector<Trajectory> trajectories;
    std::vector<RunSummary> summaries;
};

struct EnsembleStats {
    int n_runs = 0;
    int n_failed = 0;
    double median_final_lyapunov = std::numeric_limits<double>::quiet_NaN();
    double min_final_lyapunov = std::numeric_limits<double>::quiet_NaN();
    double max_final_lyapunov = std::numeric_limits<double>::quiet_NaN();
    double threshold = 1.0;
    int count_below_threshold = 0;
    double max_centroid_drift = std::numeric_limits<double>::quiet_NaN();
};

namespace detail {

inline RunSummary summarize_trajectory(const Scenario& s, std::uint64_t seed,
                                       const Trajectory& traj,
                                       bool plateau_eligible) {
    RunSummary sum;
    sum.scenario_name = s.name;
    sum.seed = seed;
    sum.final_time = traj.times.back();
    const Configuration& final_config = traj.configurations.back();
    sum.final_lyapunov = lyapunov(final_config, s.target);
    double max_drift = 0.0;
    for (const auto& c : traj.centroids)
        max_drift = std::max(max_drift, norm(std::span<const double>(c)));
    sum.max_centroid_drift = max_drift;
    sum.equilibrium_report = check_equilibrium(s.graph, final_config, s.target);
    const bool at_plateau =
        plateau_eligible && sum.equilibrium_report.drift_norm <= kPlateauDriftTol;
    sum.status = at_plateau ? RunStatus::converged_plateau
                            : RunStatus::reached_t_end;
    return sum;
}

}  // namespace detail

/// Execute a scenario. Runs with live noise (stochastic scheme, c1 > 0) form
/// an ensemble with seeds seed, seed+1, ...; anything seed-insensitive
/// collapses to a single run. Deterministic runs stop early once the drift
/// norm reaches kPlateauDriftTol (checked at recorded snapshots). A failed
/// run is reported in its summary; the rest of the ensemble still executes.
inline RunResult run(const Scenario& s) {
    const bool noise_active =
        s.params.scheme == Scheme::stochastic_euler_maruyama &&
        s.schedule.c1 > 0.0;
    const int n_runs = noise_active ? s.ensemble_size : 1;

    StopCondition stop;
    if (!noise_active) {
        const Graph& g = s.graph;
        const Configuration& q = s.target;
        stop = [&g, &q](double, const Configuration& p) {
            const std::vector<double> d = drift(g, p, q);
            return norm(std::span<const double>(d)) <= kPlateauDriftTol;
        };
    }

    RunResult result;
    for (int k = 0; k < n_runs; ++k) {
        const std::uint64_t seed = s.seed + static_cast<std::uint64_t>(k);
        try {
            Trajectory traj = integrate(s.graph, s.initial, s.target, s.params,
                                        s.schedule, seed, stop);
            result.summaries.push_back(
                detail::summarize_trajectory(s, seed, traj, !noise_active));
            result.trajectories.push_back(std::move(traj));
        } catch (const integration_error& ex) {
            RunSummary sum;
            sum.scenario_name = s.name;
            sum.seed = seed;
            sum.status = RunStatus::failed;
            sum.final_time = ex.has_time() ? ex.time()
                                           : std::numeric_limits<double>::quiet_NaN();
            sum.error = ex.what();
            result.summaries.push_back(std::move(sum));
            result.trajectories.emplace_back();
        }
    }
    return result;
}

/// Median/min/max of final Lyapunov values over non-failed runs, the count of
/// runs finishing below `threshold`, and the worst centroid drift seen.
inline EnsembleStats summarize_ensemble(const std::vector<RunSummary>& summaries,
                                        double threshold = 1.0) {
    if (summaries.empty())
        throw std::invalid_argument("summarize_ensemble: empty summary list");
    EnsembleStats stats;
    stats.n_runs = static_cast<int>(summaries.size());
    stats.threshold = threshold;
    std::vector<double> phis;
    double max_drift = 0.0;
    bool any_ok = false;
    for (const auto& sum : summaries) {
        if (sum.status == RunStatus::failed) {
            ++stats.n_failed;
            continue;
        }
        any_ok = true;
        phis.push_back(sum.final_lyapunov);
        if (sum.final_lyapunov < threshold) ++stats.count_below_threshold;
        max_drift = std::max(max_drift, sum.max_centroid_drift);
    }
    if (!any_ok) return stats;
    std::sort(phis.begin(), phis.end());
    stats.min_final_lyapunov = phis.front();
    stats.max_final_lyapunov = phis.back();
    const std::size_t m = phis.size();
    stats.median_final_lyapunov =
        (m % 2 == 1) ? phis[m / 2]
                     : 0.5 * (phis[m / 2 - 1] + phis[m / 2]);
    stats.max_centroid_drift = max_drift;
    return stats;
}

namespace detail {

inline std::string fmt17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

/// Scenario names become file names; anything outside [A-Za-z0-9._-] turns
/// into '-'.
inline std::string sanitize_name(const std::string& name) {
    std::string out = name;
    for (char& c : out) {
        const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
                        (c >= '0' && c <= '9') || c == '.' || c == '_' ||
                        c == '-';
        if (!ok) c = '-';
    }
    return out.empty() ? "scenario" : out;
}

}  // namespace detail

/// One row per recorded snapshot:
/// t, phi, centroid_1..centroid_n, u_i_j per edge (lexicographic), a1_1..aN_n.
/// Values printed with %.17g so a re-run with the same seed reproduces the
/// file byte for byte.
inline void emit_csv(const Trajectory& traj, const std::string& path) {
    if (traj.times.empty())
        throw std::invalid_argument("emit_csv: empty trajectory");
    std::ofstream out(path);
    if (!out)
        throw std::runtime_error("emit_csv: cannot write \"" + path + "\"");

    const Configuration& first = traj.configurations.front();
    const int n_agents = first.n_points();
    const int dim = first.dimension();

    out << "t,phi";
    for (int k = 1; k <= dim; ++k) out << ",centroid_" << k;
    for (const auto& [i, j] : traj.edges) out << ",u_" << i << "_" << j;
    for (int i = 1; i <= n_agents; ++i)
        for (int k = 1; k <= dim; ++k) out << ",a" << i << "_" << k;
    out << "\n";

    for (std::size_t row = 0; row < traj.times.size(); ++row) {
        out << detail::fmt17(traj.times[row]) << ','
            << detail::fmt17(traj.lyapunov_values[row]);
        for (double c : traj.centroids[row]) out << ',' << detail::fmt17(c);
        for (double u : traj.edge_gains[row]) out << ',' << detail::fmt17(u);
        for (double x : traj.configurations[row].coords())
            out << ',' << detail::fmt17(x);
        out << "\n";
    }
    if (!out)
        throw std::runtime_error("emit_csv: write to \"" + path +
                                 "\" failed");
}

/// Aggregate statistics plus one status line per run, plain text.
inline void write_summary_file(const std::string& path, const Scenario& s,
                               const std::vector<RunSummary>& summaries,
                               const EnsembleStats& stats) {
    std::ofstream out(path);
    if (!out)
        throw std::runtime_error("write_summary_file: cannot write \"" + path +
                                 "\"");
    out << "scenario: " << s.name << "\n";
    out << "scheme: " << to_string(s.params.scheme) << "\n";
    out << "dt: " << detail::fmt17(s.params.dt) << "\n";
    out << "t_end: " << detail::fmt17(s.params.t_end) << "\n";
    out << "c1: " << detail::fmt17(s.schedule.c1) << "\n";
    out << "c2: " << detail::fmt17(s.schedule.c2) << "\n";
    out << "runs: " << stats.n_runs << "\n";
    out << "failed: " << stats.n_failed << "\n";
    out << "final_phi_median: " << detail::fmt17(stats.median_final_lyapunov)
        << "\n";
    out << "final_phi_min: " << detail::fmt17(stats.min_final_lyapunov) << "\n";
    out << "final_phi_max: " << detail::fmt17(stats.max_final_lyapunov) << "\n";
    out << "runs_below_threshold: " << stats.count_below_threshold
        << " (threshold " << detail::fmt17(stats.threshold) << ")\n";
    out << "max_centroid_drift: " << detail::fmt17(stats.max_centroid_drift)
        << "\n";
    out << "per_run:\n";
    for (const auto& sum : summaries) {
        out << "  seed=" << sum.seed << " status=" << to_string(sum.status);
        if (sum.status == RunStatus::failed) {
            out << " error=\"" << sum.error << "\"\n";
            continue;
        }
        out << " final_time=" << detail::fmt17(sum.final_time)
            << " final_phi=" << detail::fmt17(sum.final_lyapunov)
            << " max_centroid_drift="
            << detail::fmt17(sum.max_centroid_drift) << " equilibrium="
            << (sum.equilibrium_report.is_equilibrium ? "true" : "false")
            << " drift_norm="
            << detail::fmt17(sum.equilibrium_report.drift_norm) << "\n";
    }
    if (!out)
        throw std::runtime_error("write_summary_file: write to \"" + path +
                                 "\" failed");
}

/// run() plus the documented file outputs: one CSV per successful run named
/// <name>_seed<seed>.csv and one <name>_summary.txt, all inside out_dir
/// (created if needed).
inline RunResult run_to_directory(const Scenario& s,
                                  const std::string& out_dir) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    RunResult result = run(s);
    const std::string base = detail::sanitize_name(s.name);
    for (std::size_t k = 0; k < result.summaries.size(); ++k) {
        if (result.summaries[k].status == RunStatus::failed) continue;
        const fs::path csv =
            fs::path(out_dir) /
            (base + "_seed" + std::to_string(result.summaries[k].seed) +
             ".csv");
        emit_csv(result.trajectories[k], csv.string());
    }
    const EnsembleStats stats = summarize_ensemble(result.summaries);
    const fs::path summary_path = fs::path(out_dir) / (base + "_summary.txt");
    write_summary_file(summary_path.string(), s, result.summaries, stats);
    return result;
}

}  // namespace formsim
