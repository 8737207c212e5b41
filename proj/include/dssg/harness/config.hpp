#pragma once

// Experiment configuration: flat "key = value" text with dotted sections.
// Lines starting with '#' are comments. Keys under "problem." other than
// problem.name and problem.seed are forwarded to the problem catalog.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "dssg/catalog.hpp"
#include "dssg/error.hpp"
#include "dssg/network.hpp"
#include "dssg/oracle.hpp"
#include "dssg/solver.hpp"
#include "dssg/state.hpp"

namespace dssg {

inline const std::map<std::string, std::string>& config_defaults() {
  static const std::map<std::string, std::string> defaults{
      {"problem.name", ""},
      {"problem.seed", "1"},
      {"graph.kind", "complete"},
      {"graph.edges", ""},
      {"graph.p", "0.5"},
      {"graph.seed", "1"},
      {"graph.file", ""},
      {"mixing.scheme", "metropolis"},
      {"noise.kind", "none"},
      {"noise.variance", "0"},
      {"noise.bound", "auto"},
      {"noise.batch_fraction", "1"},
      {"schedule.a", "0.1"},
      {"schedule.b", "1"},
      {"schedule.p", "1"},
      {"solver.iterations", "1000"},
      {"solver.x0", ""},
      {"solver.update", "atc"},
      {"solver.tie_rule", "lowest"},
      {"solver.projection_radius", "0"},
      {"solver.safeguard_radius", "1e6"},
      {"solver.stop_tolerance", "0"},
      {"diagnostics.stationarity_every", "10"},
      {"diagnostics.stationarity_band", "1e-3"},
      {"run.seeds", "1"},
      {"run.output", ""},
      {"run.figure_csvs", "false"},
  };
  return defaults;
}

/// Canonical key/value view of a configuration; every known key is present.
struct ExperimentConfig {
  std::map<std::string, std::string> entries;

  const std::string& get(const std::string& key) const { return entries.at(key); }
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline double config_double(const ExperimentConfig& c, const std::string& key) {
  const std::string& text = c.get(key);
  try {
    std::size_t pos = 0;
    const double v = std::stod(text, &pos);
    if (pos != text.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw ConfigError(key + ": expected a number, got '" + text + "'");
  }
}

inline std::uint64_t config_count(const ExperimentConfig& c, const std::string& key) {
  const double v = config_double(c, key);
  if (v < 0 || v != std::floor(v)) throw ConfigError(key + ": expected a nonnegative integer");
  return static_cast<std::uint64_t>(v);
}

inline std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, sep)) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

inline void require_one_of(const ExperimentConfig& c, const std::string& key, const std::vector<std::string>& allowed) {
  const auto& v = c.get(key);
  if (std::find(allowed.begin(), allowed.end(), v) == allowed.end()) {
    std::string list;
    for (const auto& a : allowed) list += (list.empty() ? "" : "|") + a;
    throw ConfigError(key + ": '" + v + "' is not one of " + list);
  }
}

}  // namespace detail

inline std::vector<std::uint64_t> parse_seed_list(const std::string& text, const std::string& key = "run.seeds") {
  std::vector<std::uint64_t> seeds;
  for (const auto& item : detail::split(text, ',')) {
    try {
      std::size_t pos = 0;
      const auto v = std::stoull(item, &pos);
      if (pos != item.size()) throw std::invalid_argument("trailing");
      seeds.push_back(v);
    } catch (const std::exception&) {
      throw ConfigError(key + ": bad seed '" + item + "'");
    }
  }
  if (seeds.empty()) throw ConfigError(key + ": at least one seed required");
  return seeds;
}

/// Everything a run needs, built and validated from a configuration.
struct BuiltExperiment {
  DistributedProblem problem;
  Graph graph;
  std::optional<MixingMatrix> mixing;
  NoisyOracle oracle;
  std::optional<StepsizeSchedule> schedule;
  SolverOptions options;
  Vector x0;
  std::uint64_t iterations = 0;
  std::vector<std::uint64_t> seeds;
  bool figure_csvs = false;
};

inline BuiltExperiment build_experiment(const ExperimentConfig& c) {
  using detail::config_count;
  using detail::config_double;
  BuiltExperiment ex;

  // problem
  Params params;
  for (const auto& [k, v] : c.entries) {
    if (k.rfind("problem.", 0) == 0 && k != "problem.name" && k != "problem.seed") params.set(k.substr(8), v);
  }
  if (c.get("problem.name").empty()) throw ConfigError("problem.name: required");
  try {
    ex.problem = catalog_problem(c.get("problem.name"), params, config_count(c, "problem.seed"));
  } catch (const UnknownProblem& e) {
    throw ConfigError(std::string("problem.name: ") + e.what());
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(std::string("problem: ") + e.what());
  }
  const std::size_t n = ex.problem.agent_count();

  // graph + mixing
  detail::require_one_of(c, "graph.kind", {"complete", "path", "explicit", "random", "file"});
  detail::require_one_of(c, "mixing.scheme", {"metropolis", "lazy_metropolis", "file"});
  const std::string kind = c.get("graph.kind");
  std::optional<Eigen::MatrixXd> file_weights;
  try {
    if (kind == "complete") {
      ex.graph = complete_graph(n);
    } else if (kind == "path") {
      ex.graph = path_graph(n);
    } else if (kind == "explicit") {
      std::vector<Edge> edges;
      for (const auto& item : detail::split(c.get("graph.edges"), ',')) {
        const auto dash = item.find('-');
        if (dash == std::string::npos) throw ConfigError("graph.edges: expected 'i-j', got '" + item + "'");
        const long a = std::stol(item.substr(0, dash));
        const long b = std::stol(item.substr(dash + 1));
        if (a < 1 || b < 1) throw InvalidEdge("endpoints are 1-based");
        edges.emplace_back(static_cast<std::size_t>(a - 1), static_cast<std::size_t>(b - 1));
      }
      ex.graph = Graph(n, edges);
    } else if (kind == "random") {
      ex.graph = random_graph(n, config_double(c, "graph.p"), config_count(c, "graph.seed"));
    } else {
      std::ifstream in(c.get("graph.file"));
      if (!in) throw ConfigError("graph.file: cannot open '" + c.get("graph.file") + "'");
      auto net = read_network(in);
      ex.graph = std::move(net.graph);
      file_weights = std::move(net.weights);
    }
    if (ex.graph.size() != n) {
      throw ConfigError("graph: has " + std::to_string(ex.graph.size()) + " agents, problem has " + std::to_string(n));
    }
    const std::string scheme = c.get("mixing.scheme");
    if (scheme == "file") {
      if (!file_weights) throw ConfigError("mixing.scheme: 'file' needs graph.kind = file with a weight block");
      ex.mixing.emplace(ex.graph, *file_weights);
    } else {
      ex.mixing.emplace(metropolis_weights(ex.graph, scheme == "lazy_metropolis"));
    }
    ex.mixing->spectral().require();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(std::string("graph: ") + e.what());
  }

  // stepsize schedule
  const double a = config_double(c, "schedule.a"), b = config_double(c, "schedule.b"), p = config_double(c, "schedule.p");
  try {
    ex.schedule.emplace(validate_schedule(a, b, p));
  } catch (const AssumptionViolated& e) {
    const char* key = !(a > 0.0 && std::isfinite(a)) ? "schedule.a" : !(b >= 1.0 && std::isfinite(b)) ? "schedule.b"
                                                                                                       : "schedule.p";
    throw ConfigError(std::string(key) + ": " + e.what());
  }

  // solver
  ex.iterations = config_count(c, "solver.iterations");
  if (ex.iterations == 0) throw ConfigError("solver.iterations: must be at least 1");
  const auto x0_items = detail::split(c.get("solver.x0"), ',');
  const auto m = static_cast<Eigen::Index>(ex.problem.dimension);
  if (x0_items.empty()) {
    ex.x0 = ex.problem.suggested_start.value_or(Vector::Zero(m));
  } else {
    std::vector<double> vals;
    for (const auto& item : x0_items) {
      try {
        vals.push_back(std::stod(item));
      } catch (const std::exception&) {
        throw ConfigError("solver.x0: bad number '" + item + "'");
      }
    }
    if (vals.size() == 1) {
      ex.x0 = Vector::Constant(m, vals[0]);
    } else if (static_cast<Eigen::Index>(vals.size()) == m) {
      ex.x0 = Eigen::Map<const Vector>(vals.data(), m);
    } else {
      throw ConfigError("solver.x0: expected 1 or " + std::to_string(m) + " values");
    }
  }
  detail::require_one_of(c, "solver.update", {"atc", "own_gradient"});
  detail::require_one_of(c, "solver.tie_rule", {"lowest", "random", "average"});
  ex.options.update = c.get("solver.update") == "atc" ? UpdateRule::AdaptThenCombine : UpdateRule::OwnGradient;
  const auto& tie = c.get("solver.tie_rule");
  ex.options.tie_rule = tie == "lowest" ? TieRule::LowestIndex : tie == "random" ? TieRule::UniformRandom
                                                                                  : TieRule::ConvexAverage;
  ex.options.projection_radius = config_double(c, "solver.projection_radius");
  ex.options.safeguard_radius = config_double(c, "solver.safeguard_radius");
  ex.options.stop_tolerance = config_double(c, "solver.stop_tolerance");
  if (ex.options.projection_radius < 0) throw ConfigError("solver.projection_radius: must be >= 0");
  if (!(ex.options.safeguard_radius > 0)) throw ConfigError("solver.safeguard_radius: must be positive");
  ex.options.diagnostics.stationarity_every = config_count(c, "diagnostics.stationarity_every");
  if (ex.options.diagnostics.stationarity_every == 0) throw ConfigError("diagnostics.stationarity_every: must be >= 1");
  const double band = config_double(c, "diagnostics.stationarity_band");
  if (band < 0) throw ConfigError("diagnostics.stationarity_band: must be >= 0");
  ex.options.diagnostics.stationarity_band = ActiveBand::absolute_only(band);

  // noise
  detail::require_one_of(c, "noise.kind", {"none", "gaussian", "uniform_ball", "minibatch"});
  NoiseModel noise;
  const auto& nk = c.get("noise.kind");
  noise.kind = nk == "none" ? NoiseKind::None
               : nk == "gaussian" ? NoiseKind::GaussianTruncated
               : nk == "uniform_ball" ? NoiseKind::UniformBall
                                      : NoiseKind::Minibatch;
  noise.variance = config_double(c, "noise.variance");
  noise.batch_fraction = config_double(c, "noise.batch_fraction");
  if (noise.variance < 0) throw ConfigError("noise.variance: must be >= 0");
  if (!(noise.batch_fraction > 0 && noise.batch_fraction <= 1)) throw ConfigError("noise.batch_fraction: must be in (0,1]");
  if (c.get("noise.bound") == "auto") {
    // 10 (|g(x0)| + sqrt(R)), at least 1.
    double g0 = 0.0;
    for (const auto& agent : ex.problem.agents) g0 = std::max(g0, agent.clarke_element(ex.x0).norm());
    noise.bound = std::max(1.0, 10.0 * (g0 + std::sqrt(noise.variance)));
  } else {
    noise.bound = config_double(c, "noise.bound");
    if (!(noise.bound > 0)) throw ConfigError("noise.bound: must be positive or 'auto'");
  }
  ex.oracle = NoisyOracle(noise);

  // run
  ex.seeds = parse_seed_list(c.get("run.seeds"));
  detail::require_one_of(c, "run.figure_csvs", {"true", "false"});
  ex.figure_csvs = c.get("run.figure_csvs") == "true";
  return ex;
}

/// Parses and fully validates a configuration. Errors name the offending key.
inline ExperimentConfig parse_config(const std::string& text) {
  ExperimentConfig c;
  c.entries = config_defaults();
  std::stringstream ss(text);
  std::string line;
  std::size_t lineno = 0;
  std::map<std::string, std::string> seen;
  while (std::getline(ss, line)) {
    ++lineno;
    const std::string t = detail::trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) throw ConfigError("line " + std::to_string(lineno) + ": expected 'key = value'");
    const std::string key = detail::trim(t.substr(0, eq));
    const std::string value = detail::trim(t.substr(eq + 1));
    if (key.empty()) throw ConfigError("line " + std::to_string(lineno) + ": empty key");
    if (seen.count(key)) throw ConfigError(key + ": duplicate key");
    seen[key] = value;
    const bool problem_param = key.rfind("problem.", 0) == 0 && key.size() > 8;
    if (!problem_param && !config_defaults().count(key)) throw ConfigError(key + ": unknown key");
    c.entries[key] = value;
  }
  build_experiment(c);
  return c;
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

/// Canonical text: every key, sorted, one "key = value" per line.
inline std::string serialize_config(const ExperimentConfig& c) {
  std::string out;
  for (const auto& [k, v] : c.entries) out += k + " = " + v + "\n";
  return out;
}

}  // namespace dssg
