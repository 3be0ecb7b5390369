#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include <formsim/formsim.hpp>

namespace {

struct Overrides {
    double dt = 0.0;
    double t_end = 0.0;
    std::uint64_t seed = 0;
    bool has_dt = false;
    bool has_t_end = false;
    bool has_seed = false;

    void apply(formsim::Scenario& s) const {
        if (has_dt) s.params.dt = dt;
        if (has_t_end) s.params.t_end = t_end;
        if (has_seed) s.seed = seed;
    }
};

void add_override_flags(CLI::App* cmd, Overrides& ov) {
    cmd->add_option("--dt", ov.dt, "Override the scenario timestep")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--t-end", ov.t_end, "Override the scenario horizon")
        ->check(CLI::NonNegativeNumber);
    cmd->add_option("--seed", ov.seed, "Override the scenario base seed");
}

void note_overrides(const CLI::App* cmd, Overrides& ov) {
    ov.has_dt = cmd->count("--dt") > 0;
    ov.has_t_end = cmd->count("--t-end") > 0;
    ov.has_seed = cmd->count("--seed") > 0;
}

int execute(const formsim::Scenario& s, const std::string& out_dir) {
    const formsim::RunResult result = formsim::run_to_directory(s, out_dir);
    const formsim::EnsembleStats stats =
        formsim::summarize_ensemble(result.summaries);
    const std::string base = formsim::detail::sanitize_name(s.name);

    bool any_failed = false;
    for (const auto& sum : result.summaries) {
        if (sum.status == formsim::RunStatus::failed) {
            any_failed = true;
            std::printf("seed=%llu status=%s error=%s\n",
                        static_cast<unsigned long long>(sum.seed),
                        formsim::to_string(sum.status), sum.error.c_str());
            continue;
        }
        std::printf("seed=%llu status=%s final_time=%g final_phi=%.10g "
                    "max_centroid_drift=%.3g\n",
                    static_cast<unsigned long long>(sum.seed),
                    formsim::to_string(sum.status), sum.final_time,
                    sum.final_lyapunov, sum.max_centroid_drift);
        std::printf("  wrote %s/%s_seed%llu.csv\n", out_dir.c_str(),
                    base.c_str(), static_cast<unsigned long long>(sum.seed));
    }
    std::printf("final_phi median=%.10g min=%.10g max=%.10g\n",
                stats.median_final_lyapunov, stats.min_final_lyapunov,
                stats.max_final_lyapunov);
    std::printf("wrote %s/%s_summary.txt\n", out_dir.c_str(), base.c_str());
    return any_failed ? 3 : 0;
}

int sample_equilibria(const formsim::Scenario& s, int count,
                      const std::string& out_dir) {
    if (!s.graph.is_tree())
        throw formsim::scenario_error(
            "sample-equilibria: scenario graph is not a tree");

    const auto construction = formsim::tree_construction_edges(s.graph);
    const int dim = s.dimension;
    formsim::NormalStream normals(s.seed);

    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    const std::string base = formsim::detail::sanitize_name(s.name);
    const fs::path path = fs::path(out_dir) / (base + "_equilibria.csv");
    std::ofstream out(path);
    if (!out)
        throw std::runtime_error("sample-equilibria: cannot write \"" +
                                 path.string() + "\"");

    out << "sample,drift_norm,phi";
    for (int i = 1; i <= s.graph.n_vertices(); ++i)
        for (int k = 1; k <= dim; ++k) out << ",a" << i << "_" << k;
    out << "\n";

    double worst_drift = 0.0;
    for (int m = 0; m < count; ++m) {
        std::vector<formsim::SpherePoint> coords;
        coords.reserve(construction.size());
        for (const auto& pc : construction) {
            std::vector<double> dir(static_cast<std::size_t>(dim));
            double len = 0.0;
            do {
                for (double& x : dir) x = normals.next();
                len = formsim::norm(std::span<const double>(dir));
            } while (len == 0.0);
            for (double& x : dir) x /= len;
            coords.push_back({pc, std::move(dir)});
        }
        const formsim::Configuration p =
            formsim::sample_tree_equilibrium(s.graph, s.target, coords);
        const formsim::EquilibriumReport rep =
            formsim::check_equilibrium(s.graph, p, s.target);
        worst_drift = std::max(worst_drift, rep.drift_norm);
        out << m << ',' << formsim::detail::fmt17(rep.drift_norm) << ','
            << formsim::detail::fmt17(formsim::lyapunov(p, s.target));
        for (double x : p.coords()) out << ',' << formsim::detail::fmt17(x);
        out << "\n";
    }
    if (!out)
        throw std::runtime_error("sample-equilibria: write to \"" +
                                 path.string() + "\" failed");
    std::printf("sampled %d equilibria, worst drift norm %.3g\n", count,
                worst_drift);
    std::printf("wrote %s\n", path.string().c_str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"formsim: formation control toward a target embedding"};
    app.require_subcommand(1);

    std::string scenario_path;
    std::string preset_name;
    std::string out_dir = "out";
    bool no_noise = false;
    int seeds = 0;
    int count = 100;
    Overrides ov;

    CLI::App* cmd_run =
        app.add_subcommand("run", "Execute a scenario file (ensemble if "
                                  "stochastic), writing CSVs and a summary");
    cmd_run->add_option("scenario", scenario_path, "Scenario JSON file")
        ->required();
    cmd_run->add_option("--out", out_dir, "Output directory (default: out)");
    add_override_flags(cmd_run, ov);

    CLI::App* cmd_preset = app.add_subcommand(
        "preset", "Execute a bundled experiment (paper-star or paper-circle)");
    cmd_preset->add_option("name", preset_name, "paper-star or paper-circle")
        ->required();
    cmd_preset->add_flag(
        "--no-noise", no_noise,
        "Disable annealing noise and integrate the deterministic system "
        "(RK4, dt = 1e-3)");
    cmd_preset->add_option("--seeds", seeds, "Ensemble size")
        ->check(CLI::PositiveNumber);
    cmd_preset->add_option("--out", out_dir, "Output directory (default: out)");
    add_override_flags(cmd_preset, ov);

    CLI::App* cmd_sample = app.add_subcommand(
        "sample-equilibria",
        "Sample random equilibria of a tree scenario's target");
    cmd_sample->add_option("scenario", scenario_path, "Scenario JSON file")
        ->required();
    cmd_sample->add_option("--count", count, "Number of samples")
        ->required()
        ->check(CLI::PositiveNumber);
    cmd_sample->add_option("--out", out_dir, "Output directory (default: out)");
    add_override_flags(cmd_sample, ov);

    CLI::App* cmd_check =
        app.add_subcommand("check", "Validate a scenario file and exit");
    cmd_check->add_option("scenario", scenario_path, "Scenario JSON file")
        ->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (cmd_run->parsed()) {
            note_overrides(cmd_run, ov);
            formsim::Scenario s = formsim::load_scenario(scenario_path);
            ov.apply(s);
            return execute(s, out_dir);
        }
        if (cmd_preset->parsed()) {
            note_overrides(cmd_preset, ov);
            formsim::Scenario s = formsim::preset(preset_name);
            if (no_noise) {
                s.name += "-no-noise";
                s.schedule.c1 = 0.0;
                s.params.scheme = formsim::Scheme::deterministic_rk4;
                s.params.dt = 1e-3;
                s.params.record_every = 1000;
            }
            if (cmd_preset->count("--seeds") > 0) s.ensemble_size = seeds;
            ov.apply(s);
            return execute(s, out_dir);
        }
        if (cmd_sample->parsed()) {
            note_overrides(cmd_sample, ov);
            formsim::Scenario s = formsim::load_scenario(scenario_path);
            ov.apply(s);
            return sample_equilibria(s, count, out_dir);
        }
        if (cmd_check->parsed()) {
            const formsim::Scenario s = formsim::load_scenario(scenario_path);
            std::printf("OK: %s (%d agents in R^%d, %zu edges, scheme %s, "
                        "ensemble %d)\n",
                        s.name.c_str(), s.graph.n_vertices(), s.dimension,
                        s.graph.edges().size(),
                        formsim::to_string(s.params.scheme), s.ensemble_size);
            return 0;
        }
    } catch (const formsim::scenario_error& ex) {
        std::fprintf(stderr, "error: %s\n", ex.what());
        return 2;
    } catch (const formsim::integration_error& ex) {
        std::fprintf(stderr, "error: %s\n", ex.what());
        return 3;
    } catch (const std::exception& ex) {
        std::fprintf(stderr, "error: %s\n", ex.what());
        return 1;
    }
    return 0;
}
