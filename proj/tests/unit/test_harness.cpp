#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "dssg/dssg.hpp"

using namespace dssg;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::path(::testing::TempDir()) / ("dssg_" + name);
  fs::remove_all(dir);
  return dir;
}

std::string config_file(const std::string& name) { return std::string(DSSG_SOURCE_DIR) + "/configs/" + name; }

int cli(const std::string& args) {
  const int status = std::system((std::string(DSSG_CLI_PATH) + " " + args + " >/dev/null 2>&1").c_str());
  return WEXITSTATUS(status);
}

const char* kSmall = R"(
problem.name = abs_sum
problem.agents = 3
problem.centers = -1,0,4
graph.kind = explicit
graph.edges = 1-2, 2-3
noise.kind = gaussian
noise.variance = 0.5
schedule.a = 0.1
schedule.b = 1
schedule.p = 0.75
solver.iterations = 200
run.seeds = 3,4
)";

std::string message_of(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST(Config, ParsesAndFillsDefaults) {
  const auto c = parse_config(kSmall);
  EXPECT_EQ(c.get("graph.kind"), "explicit");
  EXPECT_EQ(c.get("mixing.scheme"), "metropolis");
  EXPECT_EQ(c.get("solver.update"), "atc");
  const auto ex = build_experiment(c);
  EXPECT_EQ(ex.graph.edge_count(), 2u);
  EXPECT_EQ(ex.seeds, (std::vector<std::uint64_t>{3, 4}));
  EXPECT_EQ(ex.iterations, 200u);
  EXPECT_EQ(ex.x0, Vector::Zero(1));
  EXPECT_GE(ex.oracle.bound(), 1.0);
}

TEST(Config, SerializeIsIdempotent) {
  const auto once = serialize_config(parse_config(kSmall));
  const auto twice = serialize_config(parse_config(once));
  EXPECT_EQ(once, twice);
}

TEST(Config, ErrorsNameTheKey) {
  EXPECT_NE(message_of(std::string(kSmall) + "solver.bogus = 1\n").find("solver.bogus"), std::string::npos);
  const auto p_half = message_of("problem.name = abs_sum\nschedule.p = 0.5\n");
  EXPECT_EQ(p_half.rfind("ConfigError: schedule.p: AssumptionViolated", 0), 0u) << p_half;
  EXPECT_NE(p_half.find("square-summability"), std::string::npos);
  EXPECT_NE(message_of("problem.name = abs_sum\nschedule.b = 0\n").find("schedule.b"), std::string::npos);
  EXPECT_NE(message_of("problem.name = nope\n").find("problem.name"), std::string::npos);
  EXPECT_NE(message_of("problem.name = abs_sum\nproblem.agentz = 3\n").find("agentz"), std::string::npos);
  EXPECT_NE(message_of("problem.name = abs_sum\nnoise.kind = loud\n").find("noise.kind"), std::string::npos);
  EXPECT_NE(message_of("problem.name = abs_sum\nsolver.iterations = -1\n").find("solver.iterations"),
            std::string::npos);
  EXPECT_NE(message_of("problem.name = abs_sum\ngraph.kind = explicit\ngraph.edges = 1-2\n").find("graph"),
            std::string::npos);
  EXPECT_NE(message_of("problem.name = abs_sum\nthis is not a pair\n").find("line 2"), std::string::npos);
  EXPECT_NE(message_of("problem.name = abs_sum\nproblem.name = abs_sum\n").find("duplicate"), std::string::npos);
  EXPECT_NE(message_of("").find("problem.name"), std::string::npos);
}

TEST(Config, BundledConfigsValidate) {
  for (const auto& entry : fs::directory_iterator(std::string(DSSG_SOURCE_DIR) + "/configs")) {
    if (entry.path().extension() != ".cfg") continue;
    EXPECT_NO_THROW(load_config(entry.path().string())) << entry.path();
  }
}

TEST(Config, NetworkFileAndFileWeights) {
  const fs::path dir = fresh_dir("netfile");
  fs::create_directories(dir);
  const auto w = metropolis_weights(path_graph(3), true);
  {
    std::ofstream out(dir / "net.txt");
    write_network(out, w.graph(), &w.weights());
  }
  const auto c = parse_config("problem.name = abs_sum\ngraph.kind = file\ngraph.file = " + (dir / "net.txt").string() +
                              "\nmixing.scheme = file\n");
  EXPECT_EQ(build_experiment(c).mixing->weights(), w.weights());
}

TEST(Baseline, SingleAgentMatchesDistributedBitwise) {
  const auto c = parse_config(
      "problem.name = max_quadratics\nproblem.agents = 1\ngraph.kind = complete\nnoise.kind = gaussian\n"
      "noise.variance = 1\nschedule.a = 0.3\nschedule.p = 0.75\nsolver.iterations = 500\nsolver.x0 = 1\n");
  const auto ex = build_experiment(c);
  for (std::uint64_t seed : {1u, 2u}) {
    const auto dist = run(ex.problem, *ex.mixing, ex.oracle, *ex.schedule, ex.x0, ex.iterations, seed, ex.options);
    const auto cent = run_baseline(c, seed);
    const auto rep = compare_runs(dist, cent, "all", 0.0);
    EXPECT_TRUE(rep.passed()) << "worst " << rep.worst();
    EXPECT_EQ(dist.final_x_bar, cent.final_x_bar);
  }
}

TEST(Baseline, MedianProblemWithoutNoise) {
  const auto c = parse_config(
      "problem.name = abs_sum\nproblem.centers = -1,0,4\nschedule.a = 1\nschedule.b = 10\nschedule.p = 1\n"
      "solver.iterations = 5000\n");
  EXPECT_LE(std::abs(run_baseline(c).final_x_bar(0)), 0.05);
}

TEST(Baseline, ZeroObjectiveStaysPut) {
  DistributedProblem p;
  p.dimension = 2;
  p.agents.emplace_back(2, std::vector<TermPtr>{std::make_shared<AbsAffineTerm>(2, std::vector<std::size_t>{},
                                                                                std::vector<double>{}, 0.0)});
  const Vector x0 = Vector::Constant(2, 0.7);
  const auto t = run_centralized_baseline(p, NoisyOracle(), validate_schedule(1, 1, 1), x0, 100, 1);
  for (const auto& r : t.records) EXPECT_EQ(r.objective_at_mean, 0.0);
  EXPECT_EQ(t.final_x_bar, x0);
}

TEST(Compare, IdenticalTracesAndSchemaMismatch) {
  const auto ex = build_experiment(parse_config(kSmall));
  const auto a = run(ex.problem, *ex.mixing, ex.oracle, *ex.schedule, ex.x0, 50, 3, ex.options);
  const auto b = run(ex.problem, *ex.mixing, ex.oracle, *ex.schedule, ex.x0, 50, 4, ex.options);
  const auto same = compare_runs(a, a, "all", 0.0);
  EXPECT_EQ(same.worst(), 0.0);
  EXPECT_TRUE(same.passed());
  const auto info = compare_runs(a, b);
  EXPECT_FALSE(info.tolerance.has_value());
  EXPECT_TRUE(info.passed());
  EXPECT_GT(info.worst(), 0.0);
  const auto one = compare_runs(a, b, "consensus_error");
  ASSERT_EQ(one.metrics.size(), 1u);
  const auto shorter = run(ex.problem, *ex.mixing, ex.oracle, *ex.schedule, ex.x0, 49, 3, ex.options);
  EXPECT_THROW(compare_runs(a, shorter), SchemaMismatch);
  EXPECT_THROW(compare_runs(a, a, "nope"), SchemaMismatch);
}

TEST(Experiment, WritesArtifactsAndIsReproducible) {
  const auto c = parse_config(std::string(kSmall) + "run.figure_csvs = true\n");
  const auto d1 = fresh_dir("exp1"), d2 = fresh_dir("exp2");
  const auto r = run_experiment(c, d1.string());
  run_experiment(c, d2.string());
  ASSERT_EQ(r.seeds.size(), 2u);
  for (const char* name : {"data.csv", "summary.csv", "trace_seed3.csv", "trace_seed4.csv", "final_seed3.csv",
                           "figure_consensus_seed3.csv", "figure_stationarity_seed4.csv", "figure_objective_seed4.csv"}) {
    ASSERT_TRUE(fs::exists(d1 / name)) << name;
    EXPECT_EQ(slurp(d1 / name), slurp(d2 / name)) << name;
  }
  const auto summary = slurp(d1 / "summary.csv");
  EXPECT_NE(summary.find("final_consensus_error,"), std::string::npos);
  EXPECT_NE(summary.find("metric,median,q1,q3,iqr"), std::string::npos);
}

TEST(Experiment, Quartiles) {
  const auto q = quartiles({4, 1, 3, 2});
  EXPECT_DOUBLE_EQ(q.median, 2.5);
  EXPECT_DOUBLE_EQ(q.q1, 1.75);
  EXPECT_DOUBLE_EQ(q.q3, 3.25);
}

TEST(Experiment, OutputDirResolution) {
  const auto c = parse_config(kSmall);
  EXPECT_EQ(resolve_output_dir("given", c), "given");
  setenv(kOutputDirEnv, "from_env", 1);
  EXPECT_EQ(resolve_output_dir("", c), "from_env");
  const auto with_output = parse_config(std::string(kSmall) + "run.output = from_config\n");
  EXPECT_EQ(resolve_output_dir("", with_output), "from_config");
  unsetenv(kOutputDirEnv);
  EXPECT_EQ(resolve_output_dir("", c), "dssg_out");
}

TEST(Experiment, GoldenTraceRegression) {
  const auto d = fresh_dir("golden");
  run_experiment(load_config(config_file("abs_sum_small.cfg")), d.string());
  const std::string golden = slurp(std::string(DSSG_SOURCE_DIR) + "/tests/golden/abs_sum_small_seed42.csv");
  ASSERT_FALSE(golden.empty());
  EXPECT_TRUE(slurp(d / "trace_seed42.csv") == golden);
}

TEST(Cli, ExitCodes) {
  const auto d = fresh_dir("cli");
  fs::create_directories(d);
  const std::string good = config_file("abs_sum_small.cfg");
  EXPECT_EQ(cli("validate " + good), 0);
  EXPECT_EQ(cli("run " + good + " --out " + (d / "run").string() + " --seeds 42,43"), 0);
  EXPECT_TRUE(fs::exists(d / "run" / "trace_seed43.csv"));
  EXPECT_EQ(cli("baseline " + good + " --out " + (d / "base.csv").string()), 0);
  EXPECT_TRUE(fs::exists(d / "base.csv"));

  const auto trace = (d / "run" / "trace_seed42.csv").string();
  EXPECT_EQ(cli("compare " + trace + " " + trace + " --metric all --tol 0"), 0);
  EXPECT_EQ(cli("compare " + trace + " " + (d / "run" / "trace_seed43.csv").string() + " --tol 0"), 2);
  EXPECT_EQ(cli("compare " + trace + " " + (d / "run" / "trace_seed43.csv").string()), 0);

  {
    std::ofstream bad(d / "bad.cfg");
    bad << "problem.name = abs_sum\nschedule.p = 0.5\n";
  }
  EXPECT_EQ(cli("validate " + (d / "bad.cfg").string()), 1);
  EXPECT_EQ(cli("run " + (d / "bad.cfg").string()), 1);
  EXPECT_EQ(cli("validate /nonexistent.cfg"), 1);
  EXPECT_EQ(cli("compare /nonexistent_a.csv /nonexistent_b.csv"), 2);
  {
    std::ofstream boom(d / "boom.cfg");
    boom << "problem.name = abs_sum\nproblem.agents = 1\nproblem.dim = 4\nnoise.bound = 1\nsolver.x0 = 100\n";
  }
  EXPECT_EQ(cli("run " + (d / "boom.cfg").string() + " --out " + (d / "boom").string()), 2);
}
