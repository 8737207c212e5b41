// dssg: run, baseline, compare and validate experiment configs.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "dssg/dssg.hpp"

namespace {

int report(const dssg::ConfigError& e) {
  std::cerr << e.what() << '\n';
  return dssg::kExitConfig;
}

int report(const std::exception& e) {
  std::cerr << e.what() << '\n';
  return dssg::kExitRuntime;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Distributed stochastic subgradient experiments"};
  app.require_subcommand(1);

  std::string config_path, out_dir, seeds_text;
  auto* run = app.add_subcommand("run", "run every seed of a config and write traces and a summary");
  run->add_option("config", config_path, "experiment config")->required();
  run->add_option("--out", out_dir, "output directory (default: run.output, then $DSSG_OUTPUT_DIR)");
  run->add_option("--seeds", seeds_text, "comma-separated seeds, overriding run.seeds");

  std::string baseline_out;
  std::uint64_t baseline_seed = 0;
  auto* baseline = app.add_subcommand("baseline", "centralised run on the same problem; writes a trace CSV");
  baseline->add_option("config", config_path, "experiment config")->required();
  baseline->add_option("--out", baseline_out, "trace CSV path (default: <output dir>/baseline_seed<k>.csv)");
  auto* seed_opt = baseline->add_option("--seed", baseline_seed, "seed (default: first of run.seeds)");

  std::string csv_a, csv_b, metric = "all";
  double tol = 0.0;
  auto* compare = app.add_subcommand("compare", "per-metric max deviation between two traces");
  compare->add_option("trace_a", csv_a)->required();
  compare->add_option("trace_b", csv_b)->required();
  compare->add_option("--metric", metric, "column name or 'all'");
  auto* tol_opt = compare->add_option("--tol", tol, "tolerance; without it the report is informational");

  auto* validate = app.add_subcommand("validate", "parse and validate a config, print its canonical form");
  validate->add_option("config", config_path, "experiment config")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : dssg::kExitConfig;
  }

  dssg::ExperimentConfig config;
  if (!compare->parsed()) {
    try {
      config = dssg::load_config(config_path);
    } catch (const dssg::ConfigError& e) {
      return report(e);
    }
  }

  try {
    if (validate->parsed()) {
      std::cout << dssg::serialize_config(config);
      return dssg::kExitClean;
    }
    if (run->parsed()) {
      std::vector<std::uint64_t> seeds;
      if (!seeds_text.empty()) seeds = dssg::parse_seed_list(seeds_text, "--seeds");
      const auto dir = dssg::resolve_output_dir(out_dir, config);
      const auto result = dssg::run_experiment(config, dir, seeds, &std::cout);
      std::cout << "wrote " << result.seeds.size() << " run(s) to " << result.output_dir << '\n';
      return dssg::kExitClean;
    }
    if (baseline->parsed()) {
      const auto seed = *seed_opt ? std::optional<std::uint64_t>(baseline_seed) : std::nullopt;
      const auto trace = dssg::run_baseline(config, seed);
      std::string path = baseline_out;
      if (path.empty()) {
        const auto dir = dssg::resolve_output_dir("", config);
        std::filesystem::create_directories(dir);
        const auto used = seed.value_or(dssg::build_experiment(config).seeds.front());
        path = (std::filesystem::path(dir) / ("baseline_seed" + std::to_string(used) + ".csv")).string();
      }
      dssg::emit_csv(trace, path);
      std::cout << "final objective " << trace.final_objective << ", stationarity " << trace.final_stationarity
                << "\nwrote " << path << '\n';
      return dssg::kExitClean;
    }
    // compare
    const auto a = dssg::read_csv(csv_a);
    const auto b = dssg::read_csv(csv_b);
    const auto rep = dssg::compare_runs(a, b, metric, *tol_opt ? std::optional<double>(tol) : std::nullopt);
    for (const auto& m : rep.metrics) std::printf("%-22s %.17g\n", m.metric.c_str(), m.max_deviation);
    if (rep.tolerance) {
      std::printf("%s (worst %.17g, tol %.17g)\n", rep.passed() ? "PASS" : "FAIL", rep.worst(), *rep.tolerance);
      return rep.passed() ? dssg::kExitClean : dssg::kExitRuntime;
    }
    return dssg::kExitClean;
  } catch (const dssg::ConfigError& e) {
    return report(e);
  } catch (const std::exception& e) {
    return report(e);
  }
}
