#pragma once

#include <cstdint>
#include <fstream>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "formsim/configuration.hpp"
#include "formsim/graph.hpp"
#include "formsim/integrate.hpp"

namespace formsim {

inline constexpr int kScenarioSchemaVersion = 1;

class scenario_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A fully resolved experiment definition. `graph_preset` remembers whether
/// the file named a preset ("star", "circle", "path") or listed edges, so a
/// save/load round trip keeps the original form.
struct Scenario {
    std::string name;
    int dimension = 2;
    Graph graph = Graph(2, {make_edge(1, 2)});
    std::string graph_preset;
    Configuration target = Configuration(2, 2);
    Configuration initial = Configuration(2, 2);
    IntegratorParams params;
    AnnealingSchedule schedule;
    std::uint64_t seed = 1;
    int ensemble_size = 1;
    bool project_centroid = false;
};

inline bool operator==(const Scenario& a, const Scenario& b) {
    return a.name == b.name && a.dimension == b.dimension &&
           a.graph.n_vertices() == b.graph.n_vertices() &&
           a.graph.edges() == b.graph.edges() &&
           a.graph_preset == b.graph_preset && a.target == b.target &&
           a.initial == b.initial && a.params.dt == b.params.dt &&
           a.params.t_end == b.params.t_end &&
           a.params.record_every == b.params.record_every &&
           a.params.scheme == b.params.scheme &&
           a.schedule.c1 == b.schedule.c1 && a.schedule.c2 == b.schedule.c2 &&
           a.seed == b.seed && a.ensemble_size == b.ensemble_size &&
           a.project_centroid == b.project_centroid;
}

namespace detail {

inline const nlohmann::json& require_field(const nlohmann::json& j,
                                           const std::string& key) {
    auto it = j.find(key);
    if (it == j.end())
        throw scenario_error("scenario: missing required field \"" + key +
                             "\"");
    return *it;
}

inline double require_number(const nlohmann::json& j, const std::string& key) {
    const auto& v = require_field(j, key);
    if (!v.is_number())
        throw scenario_error("scenario: field \"" + key +
                             "\" must be a number");
    return v.get<double>();
}

inline long long require_integer(const nlohmann::json& j,
                                 const std::string& key) {
    const auto& v = require_field(j, key);
    if (!v.is_number_integer())
        throw scenario_error("scenario: field \"" + key +
                             "\" must be an integer");
    return v.get<long long>();
}

inline std::string require_string(const nlohmann::json& j,
                                  const std::string& key) {
    const auto& v = require_field(j, key);
    if (!v.is_string())
        throw scenario_error("scenario: field \"" + key +
                             "\" must be a string");
    return v.get<std::string>();
}

inline Configuration parse_points(const nlohmann::json& j,
                                  const std::string& key, int dimension) {
    const auto& v = require_field(j, key);
    if (!v.is_array() || v.size() < 2)
        throw scenario_error("scenario: field \"" + key +
                             "\" must be an array of at least 2 points");
    std::vector<std::vector<double>> rows;
    rows.reserve(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        const auto& row = v[i];
        if (!row.is_array() ||
            row.size() != static_cast<std::size_t>(dimension))
            throw scenario_error(
                "scenario: " + key + "[" + std::to_string(i) + "] must be an " +
                "array of " + std::to_string(dimension) + " numbers");
        std::vector<double> pt(static_cast<std::size_t>(dimension));
        for (std::size_t k = 0; k < pt.size(); ++k) {
            if (!row[k].is_number())
                throw scenario_error("scenario: " + key + "[" +
                                     std::to_string(i) +
                                     "] must contain only numbers");
            pt[k] = row[k].get<double>();
        }
        rows.push_back(std::move(pt));
    }
    return Configuration::from_points(rows);
}

inline std::pair<Graph, std::string> parse_graph(const nlohmann::json& j,
                                                 int n_vertices) {
    const auto& v = require_field(j, "graph");
    try {
        if (v.is_string()) {
            const std::string preset = v.get<std::string>();
            if (preset == "star") return {Graph::star(n_vertices), preset};
            if (preset == "circle") return {Graph::circle(n_vertices), preset};
            if (preset == "path") return {Graph::path(n_vertices), preset};
            throw scenario_error(
                "scenario: graph preset \"" + preset +
                "\" unknown (expected star, circle, or path)");
        }
        if (v.is_object() && v.contains("edges") && v["edges"].is_array()) {
            std::vector<Edge> edges;
            for (const auto& row : v["edges"]) {
                if (!row.is_array() || row.size() != 2 ||
                    !row[0].is_number_integer() || !row[1].is_number_integer())
                    throw scenario_error(
                        "scenario: graph.edges entries must be [i, j] integer "
                        "pairs");
                edges.push_back(make_edge(row[0].get<int>(),
                                          row[1].get<int>()));
            }
            return {Graph(n_vertices, std::move(edges)), ""};
        }
    } catch (const std::invalid_argument& ex) {
        throw scenario_error("scenario: field \"graph\": " +
                             std::string(ex.what()));
    }
    throw scenario_error(
        "scenario: field \"graph\" must be a preset string or an object with "
        "an \"edges\" array");
}

inline void check_or_project_centroid(Configuration& c, bool project,
                                      const std::string& key) {
    if (project) {
        c = project_to_centroid_zero(c);
        return;
    }
    const std::vector<double> m = centroid(c);
    const double mag = norm(std::span<const double>(m));
    if (mag > kCentroidEps)
        throw scenario_error(
            "scenario: field \"" + key + "\": centroid is not zero (|mean| = " +
            std::to_string(mag) +
            "); recenter the points or set project_centroid");
}

}  // namespace detail

inline Scenario scenario_from_json(const nlohmann::json& j) {
    if (!j.is_object())
        throw scenario_error("scenario: top level must be an object");

    const long long version = detail::require_integer(j, "schema_version");
    if (version != kScenarioSchemaVersion)
        throw scenario_error("scenario: schema_version " +
                             std::to_string(version) + " unsupported (have " +
                             std::to_string(kScenarioSchemaVersion) + ")");

    Scenario s;
    s.name = detail::require_string(j, "name");
    if (s.name.empty())
        throw scenario_error("scenario: field \"name\" must be non-empty");

    const long long dim = detail::require_integer(j, "dimension");
    if (dim < 1)
        throw scenario_error("scenario: field \"dimension\" must be >= 1");
    s.dimension = static_cast<int>(dim);

    s.target = detail::parse_points(j, "target", s.dimension);
    s.initial = detail::parse_points(j, "initial", s.dimension);
    if (s.initial.n_points() != s.target.n_points())
        throw scenario_error(
            "scenario: field \"initial\": point count " +
            std::to_string(s.initial.n_points()) + " != target point count " +
            std::to_string(s.target.n_points()));

    auto [graph, preset] = detail::parse_graph(j, s.target.n_points());
    s.graph = std::move(graph);
    s.graph_preset = std::move(preset);

    s.params.dt = detail::require_number(j, "dt");
    s.params.t_end = detail::require_number(j, "t_end");
    s.params.record_every =
        j.contains("record_every") ? detail::require_integer(j, "record_every")
                                   : 1;
    try {
        s.params.scheme = scheme_from_string(detail::require_string(j, "scheme"));
    } catch (const std::invalid_argument& ex) {
        throw scenario_error("scenario: field \"scheme\": " +
                             std::string(ex.what()));
    }

    s.schedule.c1 = j.contains("c1") ? detail::require_number(j, "c1") : 0.0;
    s.schedule.c2 = j.contains("c2") ? detail::require_number(j, "c2") : 0.0;

    if (j.contains("seed")) {
        const long long seed = detail::require_integer(j, "seed");
        if (seed < 0)
            throw scenario_error("scenario: field \"seed\" must be >= 0");
        s.seed = static_cast<std::uint64_t>(seed);
    }
    if (j.contains("ensemble_size")) {
        const long long es = detail::require_integer(j, "ensemble_size");
        if (es < 1)
            throw scenario_error(
                "scenario: field \"ensemble_size\" must be >= 1");
        s.ensemble_size = static_cast<int>(es);
    }
    if (j.contains("project_centroid")) {
        const auto& v = j["project_centroid"];
        if (!v.is_boolean())
            throw scenario_error(
                "scenario: field \"project_centroid\" must be a boolean");
        s.project_centroid = v.get<bool>();
    }

    try {
        detail::validate_params(s.params);
        detail::validate_schedule(s.schedule);
    } catch (const std::invalid_argument& ex) {
        throw scenario_error("scenario: " + std::string(ex.what()));
    }

    detail::check_or_project_centroid(s.target, s.project_centroid, "target");
    detail::check_or_project_centroid(s.initial, s.project_centroid,
                                      "initial");
    return s;
}

inline nlohmann::json scenario_to_json(const Scenario& s) {
    nlohmann::json j;
    j["schema_version"] = kScenarioSchemaVersion;
    j["name"] = s.name;
    j["dimension"] = s.dimension;
    if (!s.graph_preset.empty()) {
        j["graph"] = s.graph_preset;
    } else {
        nlohmann::json edges = nlohmann::json::array();
        for (const auto& [a, b] : s.graph.edges())
            edges.push_back(nlohmann::json::array({a, b}));
        j["graph"] = nlohmann::json{{"edges", edges}};
    }
    const auto points = [&](const Configuration& c) {
        nlohmann::json rows = nlohmann::json::array();
        for (int i = 1; i <= c.n_points(); ++i) {
            nlohmann::json row = nlohmann::json::array();
            for (double x : c.point(i)) row.push_back(x);
            rows.push_back(std::move(row));
        }
        return rows;
    };
    j["target"] = points(s.target);
    j["initial"] = points(s.initial);
    j["dt"] = s.params.dt;
    j["t_end"] = s.params.t_end;
    j["record_every"] = s.params.record_every;
    j["scheme"] = to_string(s.params.scheme);
    j["c1"] = s.schedule.c1;
    j["c2"] = s.schedule.c2;
    j["seed"] = static_cast<long long>(s.seed);
    j["ensemble_size"] = s.ensemble_size;
    j["project_centroid"] = s.project_centroid;
    return j;
}

inline Scenario load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw scenario_error("scenario: cannot open \"" + path + "\"");
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& ex) {
        throw scenario_error("scenario: \"" + path +
                             "\" is not valid JSON: " + ex.what());
    }
    return scenario_from_json(j);
}

inline void save_scenario(const Scenario& s, const std::string& path) {
    std::ofstream out(path);
    if (!out)
        throw scenario_error("scenario: cannot write \"" + path + "\"");
    out << scenario_to_json(s).dump(2) << "\n";
    if (!out)
        throw scenario_error("scenario: write to \"" + path + "\" failed");
}

/// The five-agent star experiment: hub agent 1, annealed noise on.
inline Scenario preset_paper_star() {
    Scenario s;
    s.name = "paper-star";
    s.dimension = 2;
    s.graph = Graph::star(5);
    s.graph_preset = "star";
    s.target = Configuration::from_points(
        {{0.0, 0.0}, {-1.0, 1.0}, {1.0, 1.0}, {1.0, -1.0}, {-1.0, -1.0}});
    s.initial = Configuration::from_points(
        {{1.0, 2.0}, {-2.0, -1.0}, {1.0, -1.0}, {3.0, -2.0}, {-3.0, 2.0}});
    s.params.dt = 0.01;
    s.params.t_end = 5000.0;
    s.params.record_every = 100;
    s.params.scheme = Scheme::stochastic_euler_maruyama;
    s.schedule.c1 = 0.5;
    s.schedule.c2 = 0.001;
    s.seed = 1;
    s.ensemble_size = 10;
    s.project_centroid = false;
    return s;
}

/// Same agents on the five-cycle.
inline Scenario preset_paper_circle() {
    Scenario s = preset_paper_star();
    s.name = "paper-circle";
    s.graph = Graph::circle(5);
    s.graph_preset = "circle";
    return s;
}

inline Scenario preset(const std::string& name) {
    if (name == "paper-star") return preset_paper_star();
    if (name == "paper-circle") return preset_paper_circle();
    throw scenario_error("unknown preset \"" + name +
                         "\" (expected paper-star or paper-circle)");
}

}  // namespace formsim
