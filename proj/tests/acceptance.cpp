// Acceptance suite: each criterion prints one [PASS]/[FAIL] line. Run with a
// single argument 1..8 to execute one criterion, or with no arguments for all.

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include <formsim/formsim.hpp>

#include "test_util.hpp"

namespace fs = std::filesystem;
using formsim::Configuration;
using formsim::Graph;
using formsim::Scenario;
using formsim::Scheme;
using formsim::SphereRegion;

namespace {

/// Target whose adjacent pairs are all well separated.
Configuration separated_target(const Graph& g, int dim, testutil::Rng& rng) {
    while (true) {
        auto q = testutil::random_configuration(g.n_vertices(), dim, rng);
        bool ok = true;
        for (const auto& [i, j] : g.edges()) {
            std::vector<double> d(static_cast<std::size_t>(dim));
            for (int k = 0; k < dim; ++k) d[k] = q.point(j)[k] - q.point(i)[k];
            if (formsim::norm(std::span<const double>(d)) < 0.1) ok = false;
        }
        if (ok) return q;
    }
}

std::vector<formsim::SpherePoint> random_coords(const Graph& g, int dim,
                                                testutil::Rng& rng) {
    std::vector<formsim::SpherePoint> coords;
    for (const auto& pc : formsim::tree_construction_edges(g))
        coords.push_back({pc, testutil::random_unit_vector(dim, rng)});
    return coords;
}

/// The noise-off variant of a bundled experiment (same agents and graph,
/// deterministic RK4 at fine dt, plateau detection active).
Scenario deterministic_counterpart(Scenario s) {
    s.name += "-no-noise";
    s.schedule.c1 = 0.0;
    s.params.scheme = Scheme::deterministic_rk4;
    s.params.dt = 1e-3;
    s.params.record_every = 1000;
    return s;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) return "<unreadable:" + p.string() + ">";
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path fresh_dir(const std::string& leaf) {
    const fs::path d = fs::temp_directory_path() / "formsim_acceptance" / leaf;
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
}

// --- 1 -----------------------------------------------------------------

long double phi_along_drift(const std::vector<double>& p,
                            const std::vector<double>& q,
                            const std::vector<double>& f, long double s) {
    long double acc = 0.0L;
    for (std::size_t k = 0; k < p.size(); ++k) {
        const long double x = static_cast<long double>(p[k]) +
                              s * static_cast<long double>(f[k]) -
                              static_cast<long double>(q[k]);
        acc += x * x;
    }
    return acc;
}

bool criterion_1() {
    testutil::Rng rng(1001);
    const long double h = 1e-6L;
    long double max_rel = 0.0L;
    double min_abs_d = std::numeric_limits<double>::infinity();
    int checked = 0;
    bool ok = true;

    for (int trial = 0; trial < 500; ++trial) {
        const int n = rng.uniform_int(2, 8);
        const int dim = rng.uniform_int(1, 3);
        const Graph g = testutil::random_connected_graph(n, rng);
        const auto p = testutil::random_configuration(n, dim, rng);
        const auto q = testutil::random_configuration(n, dim, rng);

        const double d = formsim::dissipation(g, p, q);
        if (!(std::abs(d) > 1e-8)) continue;
        ++checked;
        min_abs_d = std::min(min_abs_d, std::abs(d));

        const std::vector<double> f = formsim::drift(g, p, q);
        const long double fd =
            (phi_along_drift(p.coords(), q.coords(), f, h) -
             phi_along_drift(p.coords(), q.coords(), f, -h)) /
            (2.0L * h);
        const long double rel =
            fabsl(fd - static_cast<long double>(d)) / fabsl(d);
        max_rel = std::max(max_rel, rel);
        if (rel > 1e-6L) ok = false;
    }

    std::printf("  500 instances, %d with |dissipation| > 1e-8; "
                "min |dissipation| %.3g, max rel err %.3Lg\n",
                checked, min_abs_d, max_rel);
    return ok && checked > 400;
}

// --- 2 -----------------------------------------------------------------

bool criterion_2() {
    const Scenario s = deterministic_counterpart(formsim::preset_paper_star());
    const auto result = formsim::run(s);
    const auto& traj = result.trajectories[0];
    const auto& sum = result.summaries[0];

    bool ok = true;
    if (traj.lyapunov_values.front() != 32.0) {
        std::printf("  initial phi %.17g != 32\n",
                    traj.lyapunov_values.front());
        ok = false;
    }
    for (std::size_t r = 1; r < traj.size(); ++r)
        if (traj.lyapunov_values[r] > traj.lyapunov_values[r - 1] + 1e-9) {
            std::printf("  phi increased at t = %g\n", traj.times[r]);
            ok = false;
        }
    const double plateau = sum.final_lyapunov;
    if (!(plateau > 0.0 && plateau < 32.0)) {
        std::printf("  plateau phi %.17g outside (0, 32)\n", plateau);
        ok = false;
    }
    if (sum.status != formsim::RunStatus::converged_plateau) {
        std::printf("  run did not plateau (status %s)\n",
                    formsim::to_string(sum.status));
        ok = false;
    }
    double max_gain = 0.0;
    for (const auto& eg : sum.equilibrium_report.per_edge_gains)
        max_gain = std::max(max_gain, std::abs(eg.value));
    if (!(max_gain <= 1e-6)) {
        std::printf("  plateau edge gain %.3g > 1e-6\n", max_gain);
        ok = false;
    }
    std::printf("  plateau at t = %g: phi = %.12g, max |u| = %.3g, "
                "drift norm = %.3g\n",
                sum.final_time, plateau, max_gain,
                sum.equilibrium_report.drift_norm);
    return ok;
}

// --- 3 -----------------------------------------------------------------

bool criterion_3() {
    testutil::Rng rng(3003);
    bool ok = true;
    double worst_sample_drift = 0.0;

    for (int trial = 0; trial < 1000; ++trial) {
        const int n = rng.uniform_int(2, 8);
        const int dim = rng.uniform_int(1, 3);
        const Graph g = testutil::random_tree(n, rng);
        const auto q = separated_target(g, dim, rng);
        const auto p =
            formsim::sample_tree_equilibrium(g, q, random_coords(g, dim, rng));
        const auto rep = formsim::check_equilibrium(g, p, q);
        worst_sample_drift = std::max(worst_sample_drift, rep.drift_norm);
        if (!(rep.drift_norm <= 1e-10)) ok = false;
    }

    int perturbed = 0;
    int zero_drift = 0;
    testutil::Rng prng(3113);
    while (perturbed < 1000) {
        const int n = prng.uniform_int(2, 8);
        const int dim = prng.uniform_int(1, 3);
        const Graph g = testutil::random_tree(n, prng);
        const auto q = separated_target(g, dim, prng);
        auto p =
            formsim::sample_tree_equilibrium(g, q, random_coords(g, dim, prng));
        for (double& x : p.coords()) x += prng.uniform(-0.5, 0.5);
        const auto rep = formsim::check_equilibrium(g, p, q);
        double max_gain = 0.0;
        for (const auto& eg : rep.per_edge_gains)
            max_gain = std::max(max_gain, std::abs(eg.value));
        if (max_gain <= 1e-3) continue;
        ++perturbed;
        if (!(rep.drift_norm > 0.0)) {
            ++zero_drift;
            ok = false;
        }
    }

    std::printf("  1000 samples: worst drift norm %.3g; 1000 perturbed: "
                "%d with zero drift\n",
                worst_sample_drift, zero_drift);
    return ok;
}

// --- 4 -----------------------------------------------------------------

SphereRegion geometric_region(const formsim::Sphere& s,
                              std::span<const double> v) {
    std::vector<double> off(v.begin(), v.end());
    for (std::size_t k = 0; k < off.size(); ++k) off[k] -= s.center[k];
    const double gap =
        s.radius * s.radius - formsim::norm_squared(std::span<const double>(off));
    if (gap > 1e-9) return SphereRegion::inside;
    if (gap < -1e-9) return SphereRegion::outside;
    return SphereRegion::on;
}

bool criterion_4() {
    testutil::Rng rng(4004);
    bool ok = true;
    int mismatches = 0;
    double worst_on_gain = 0.0;

    for (int trial = 0; trial < 1000; ++trial) {
        const int dim = rng.uniform_int(1, 3);
        Configuration q(2, dim);
        do {
            for (double& x : q.coords()) x = rng.uniform(-2.0, 2.0);
        } while (formsim::two_agent_sphere(q).radius < 0.05);
        const auto sphere = formsim::two_agent_sphere(q);

        const auto sample = [&](double rho_lo, double rho_hi) {
            std::vector<double> v;
            do {
                const auto dir = testutil::random_unit_vector(dim, rng);
                const double rho = rng.uniform(rho_lo, rho_hi);
                v = sphere.center;
                for (int k = 0; k < dim; ++k)
                    v[k] += rho * sphere.radius * dir[k];
            } while (formsim::norm(std::span<const double>(v)) < 0.05);
            return v;
        };

        const std::vector<double> inside = sample(0.0, 0.9);
        const std::vector<double> on = sample(1.0, 1.0);
        const std::vector<double> outside = sample(1.1, 3.0);

        for (const auto* v : {&inside, &on, &outside}) {
            const auto by_sign = formsim::classify_relative_position(q, *v);
            const auto by_distance = geometric_region(sphere, *v);
            if (by_sign != by_distance) {
                ++mismatches;
                ok = false;
            }
        }
        if (formsim::classify_relative_position(q, inside) !=
                SphereRegion::inside ||
            formsim::classify_relative_position(q, on) != SphereRegion::on ||
            formsim::classify_relative_position(q, outside) !=
                SphereRegion::outside) {
            ++mismatches;
            ok = false;
        }

        // u_12 at the on-sphere relative vector, seen from agent 1
        std::vector<double> b_rel(static_cast<std::size_t>(dim)),
            a_rel(static_cast<std::size_t>(dim));
        for (int k = 0; k < dim; ++k) {
            b_rel[k] = q.point(2)[k] - q.point(1)[k];
            a_rel[k] = -on[k];
        }
        const double u = std::abs(formsim::edge_gain(b_rel, a_rel));
        worst_on_gain = std::max(worst_on_gain, u);
        if (!(u <= 1e-10)) ok = false;
    }

    std::printf("  1000 targets x 3 regions: %d classification mismatches; "
                "worst on-sphere |u| = %.3g\n",
                mismatches, worst_on_gain);
    return ok;
}

// --- 5 -----------------------------------------------------------------

bool criterion_5() {
    bool ok = true;
    for (const char* name : {"paper-star", "paper-circle"}) {
        const Scenario s = formsim::preset(name);
        const auto result = formsim::run(s);
        double worst = 0.0;
        int failed = 0;
        for (const auto& sum : result.summaries) {
            if (sum.status == formsim::RunStatus::failed) {
                ++failed;
                continue;
            }
            worst = std::max(worst, sum.max_centroid_drift);
        }
        std::printf("  %s: 10 seeds, max |centroid| = %.3g, %d failed\n",
                    name, worst, failed);
        if (failed > 0 || !(worst <= 1e-10)) ok = false;
    }
    return ok;
}

// --- 6 -----------------------------------------------------------------

bool criterion_6() {
    bool ok = true;
    for (const char* name : {"paper-star", "paper-circle"}) {
        const Scenario stochastic = formsim::preset(name);
        const auto ensemble = formsim::run(stochastic);
        const auto stats = formsim::summarize_ensemble(ensemble.summaries);

        const auto det = formsim::run(deterministic_counterpart(
            formsim::preset(name)));
        const double plateau = det.summaries[0].final_lyapunov;

        std::printf("  %s: median final phi %.6g (min %.3g, max %.3g) vs "
                    "deterministic plateau %.6g\n",
                    name, stats.median_final_lyapunov,
                    stats.min_final_lyapunov, stats.max_final_lyapunov,
                    plateau);
        if (stats.n_failed > 0) ok = false;
        if (!(stats.median_final_lyapunov < plateau)) ok = false;
        if (!(stats.median_final_lyapunov <= 1.0)) ok = false;
    }
    return ok;
}

// --- 7 -----------------------------------------------------------------

bool criterion_7() {
    const Scenario s = formsim::preset_paper_star();

    formsim::IntegratorParams params = s.params;
    params.t_end = 1000.0 * params.dt;
    params.record_every = 1;

    params.scheme = Scheme::stochastic_euler_maruyama;
    const auto em = formsim::integrate(
        s.graph, s.initial, s.target, params,
        formsim::AnnealingSchedule{0.0, s.schedule.c2}, s.seed);

    params.scheme = Scheme::deterministic_euler;
    const auto euler =
        formsim::integrate(s.graph, s.initial, s.target, params, {}, s.seed);

    if (em.size() != euler.size() || em.size() != 1001) {
        std::printf("  snapshot counts differ (%zu vs %zu)\n", em.size(),
                    euler.size());
        return false;
    }
    int diverging = 0;
    for (std::size_t r = 0; r < em.size(); ++r)
        if (em.configurations[r].coords() != euler.configurations[r].coords())
            ++diverging;
    std::printf("  1000 steps at dt = %g: %d of %zu snapshots differ\n",
                params.dt, diverging, em.size());
    return diverging == 0;
}

// --- 8 -----------------------------------------------------------------

bool criterion_8() {
    bool ok = true;
    for (const char* name : {"paper-star", "paper-circle"}) {
        const Scenario s = formsim::preset(name);
        const fs::path dir_a = fresh_dir(std::string(name) + "-a");
        const fs::path dir_b = fresh_dir(std::string(name) + "-b");
        formsim::run_to_directory(s, dir_a.string());
        formsim::run_to_directory(s, dir_b.string());

        int files = 0;
        int differing = 0;
        for (const auto& entry : fs::directory_iterator(dir_a)) {
            ++files;
            const fs::path twin = dir_b / entry.path().filename();
            if (!fs::exists(twin) ||
                slurp(entry.path()) != slurp(twin))
                ++differing;
        }
        std::printf("  %s: %d output files, %d differ between reruns\n", name,
                    files, differing);
        if (files != 11 || differing != 0) ok = false;
    }
    return ok;
}

struct Criterion {
    int id;
    const char* title;
    bool (*fn)();
};

const Criterion kCriteria[] = {
    {1, "dissipation matches the finite difference of phi", criterion_1},
    {2, "deterministic star run plateaus monotonically above zero",
     criterion_2},
    {3, "tree equilibrium sampler and its converse", criterion_3},
    {4, "two-agent sphere classification", criterion_4},
    {5, "stochastic centroid invariance", criterion_5},
    {6, "annealing beats the deterministic plateau", criterion_6},
    {7, "noiseless stochastic limit is bit-identical to Euler", criterion_7},
    {8, "reruns produce byte-identical output", criterion_8},
};

}  // namespace

int main(int argc, char** argv) {
    int which = 0;
    if (argc > 1) {
        which = std::atoi(argv[1]);
        if (which < 1 || which > 8 || argc > 2) {
            std::fprintf(stderr, "usage: %s [criterion 1..8]\n", argv[0]);
            return 2;
        }
    }

    bool all_ok = true;
    for (const auto& c : kCriteria) {
        if (which != 0 && which != c.id) continue;
        const bool ok = c.fn();
        std::printf("[%s] criterion %d: %s\n", ok ? "PASS" : "FAIL", c.id,
                    c.title);
        if (!ok) all_ok = false;
    }
    return all_ok ? 0 : 1;
}
