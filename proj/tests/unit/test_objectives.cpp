#include <gtest/gtest.h>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

#include "dssg/catalog.hpp"
#include "oracles.hpp"

using namespace dssg;

namespace {

SmoothComponent linear(double slope) {
  return {[slope](const Vector& x) { return slope * x(0); },
          [slope](const Vector&) { return Vector::Constant(1, slope); }, 0.0};
}

MaxOfSmoothObjective abs_value(ActiveBand band = {}) { return {1, {linear(1.0), linear(-1.0)}, band}; }

Vector scalar(double v) { return Vector::Constant(1, v); }

DistributedProblem single_agent(TermPtr term) {
  DistributedProblem p;
  p.dimension = term->dimension();
  p.agents.emplace_back(p.dimension, std::vector<TermPtr>{std::move(term)});
  return p;
}

Vector random_point(Rng& rng, std::size_t m, double scale = 1.0) {
  std::normal_distribution<double> normal(0.0, scale);
  Vector x(static_cast<Eigen::Index>(m));
  for (Eigen::Index k = 0; k < x.size(); ++k) x(k) = normal(rng);
  return x;
}

}  // namespace

TEST(MaxOfSmooth, ValueIsExactMaximum) {
  const auto f = abs_value();
  EXPECT_EQ(f.value(scalar(3.0)), 3.0);
  EXPECT_EQ(f.value(scalar(0.0)), 0.0);
  MaxOfSmoothObjective g(1, {{[](const Vector& x) { return x(0) * x(0) - 1.0; },
                              [](const Vector& x) { return Vector::Constant(1, 2 * x(0)); }, 2.0},
                             {[](const Vector& x) { return -x(0) * x(0); },
                              [](const Vector& x) { return Vector::Constant(1, -2 * x(0)); }, 2.0}});
  EXPECT_EQ(g.value(scalar(0.5)), -0.25);
}

TEST(MaxOfSmooth, ValueIgnoresComponentOrder) {
  Rng rng(3);
  std::vector<SmoothComponent> comps;
  for (double s : {-2.0, 0.5, 1.0, 3.0}) comps.push_back(linear(s));
  MaxOfSmoothObjective f(1, comps);
  std::shuffle(comps.begin(), comps.end(), rng);
  MaxOfSmoothObjective g(1, comps);
  for (double x : {-3.0, -0.1, 0.0, 0.7, 5.0}) EXPECT_EQ(f.value(scalar(x)), g.value(scalar(x)));
}

TEST(MaxOfSmooth, ActiveSets) {
  const auto f = abs_value();
  EXPECT_EQ(f.active_set(scalar(2.0), ActiveBand::exact()), (std::vector<std::size_t>{0}));
  EXPECT_EQ(f.active_set(scalar(0.0), ActiveBand::exact()), (std::vector<std::size_t>{0, 1}));
  EXPECT_EQ(f.active_set(scalar(1e-12), ActiveBand::absolute_only(1e-9)), (std::vector<std::size_t>{0, 1}));
  EXPECT_EQ(f.active_set(scalar(1e-12), ActiveBand::exact()), (std::vector<std::size_t>{0}));
}

TEST(MaxOfSmooth, ActiveSetMonotoneInTolerance) {
  std::vector<SmoothComponent> comps;
  for (double s : {-2.0, -0.5, 0.5, 1.0, 3.0}) comps.push_back(linear(s));
  MaxOfSmoothObjective f(1, comps);
  for (double x : {-1.0, -0.01, 0.0, 0.2}) {
    std::vector<std::size_t> prev;
    for (double tol : {0.0, 1e-3, 1e-2, 0.1, 1.0, 10.0}) {
      const auto cur = f.active_set(scalar(x), ActiveBand::absolute_only(tol));
      EXPECT_FALSE(cur.empty());
      EXPECT_TRUE(std::includes(cur.begin(), cur.end(), prev.begin(), prev.end()));
      prev = cur;
    }
  }
}

TEST(MaxOfSmooth, ClarkeElementTieRules) {
  const auto f = abs_value();
  EXPECT_EQ(f.clarke_element(scalar(2.0))(0), 1.0);
  EXPECT_EQ(f.clarke_element(scalar(0.0), TieRule::LowestIndex)(0), 1.0);
  EXPECT_EQ(f.clarke_element(scalar(0.0), TieRule::ConvexAverage)(0), 0.0);
  Rng rng(1);
  int plus = 0;
  for (int k = 0; k < 200; ++k) plus += f.clarke_element(scalar(0.0), TieRule::UniformRandom, &rng)(0) > 0;
  EXPECT_GT(plus, 50);
  EXPECT_LT(plus, 150);
  EXPECT_THROW(f.clarke_element(scalar(0.0), TieRule::UniformRandom), BadParams);
}

TEST(MaxOfSmooth, DimensionChecked) {
  EXPECT_THROW(abs_value().value(Vector::Zero(2)), DimensionMismatch);
  EXPECT_THROW(abs_value().active_set(Vector::Zero(2)), DimensionMismatch);
}

TEST(MinNormPoint, MatchesBruteForce) {
  Rng rng(17);
  std::uniform_int_distribution<int> count(1, 9), dim(1, 4);
  for (int trial = 0; trial < 300; ++trial) {
    const auto m = static_cast<std::size_t>(dim(rng));
    std::vector<Vector> pts;
    const int c = count(rng);
    const Vector shift = random_point(rng, m, trial % 2 ? 0.3 : 2.0);
    for (int k = 0; k < c; ++k) pts.push_back(random_point(rng, m) + shift);
    const auto mnp = min_norm_point(pts);
    EXPECT_NEAR(mnp.norm(), oracle::brute_force_min_norm(pts), 1e-9) << "trial " << trial;
    const double wsum = std::accumulate(mnp.weights.begin(), mnp.weights.end(), 0.0);
    EXPECT_NEAR(wsum, 1.0, 1e-9);
    Vector rebuilt = Vector::Zero(static_cast<Eigen::Index>(m));
    for (std::size_t k = 0; k < pts.size(); ++k) {
      EXPECT_GE(mnp.weights[k], -1e-12);
      rebuilt += mnp.weights[k] * pts[k];
    }
    EXPECT_LT((rebuilt - mnp.point).norm(), 1e-9);
  }
}

TEST(Stationarity, AbsoluteValue) {
  const auto p = single_agent(std::make_shared<MaxOfSmoothObjective>(abs_value()));
  EXPECT_NEAR(stationarity_measure(p, scalar(0.0)).value, 0.0, 1e-15);
  EXPECT_NEAR(stationarity_measure(p, scalar(2.0)).value, 1.0, 1e-15);
}

TEST(Stationarity, MedianOfThree) {
  Params params({{"agents", "3"}, {"centers", "-1,0,4"}});
  const auto p = catalog_problem("abs_sum", params, 1);
  const auto r = stationarity_measure(p, scalar(0.0));
  EXPECT_TRUE(r.exact);
  EXPECT_EQ(r.combinations, 2u);
  EXPECT_NEAR(r.value, 0.0, 1e-15);
  EXPECT_NEAR(stationarity_measure(p, scalar(1.0)).value, 1.0, 1e-15);
}

TEST(Stationarity, FallsBackBeyondCombinationLimit) {
  // Five agents all at their kink: 2^5 = 32 branch products.
  Params params({{"agents", "5"}, {"centers", "0,0,0,0,0"}});
  const auto p = catalog_problem("abs_sum", params, 1);
  const auto r = stationarity_measure(p, scalar(0.0));
  EXPECT_FALSE(r.exact);
  EXPECT_EQ(r.value, r.convex_average_norm);
  EXPECT_EQ(r.value, 0.0);
}

TEST(Catalog, UnknownNamesAndParams) {
  EXPECT_THROW(catalog_problem("nope", {}, 1), UnknownProblem);
  EXPECT_THROW(catalog_problem("abs_sum", Params{{"agentz", "3"}}, 1), BadParams);
  EXPECT_THROW(catalog_problem("abs_sum", Params{{"agents", "2"}, {"centers", "1"}}, 1), BadParams);
  EXPECT_THROW(catalog_problem("abs_sum", Params{{"agents", "x"}}, 1), BadParams);
}

TEST(Catalog, SingleAgentAbsolute) {
  const auto p = catalog_problem("abs_sum", Params{{"agents", "1"}, {"centers", "0"}}, 1);
  for (double x : {-2.0, 0.0, 3.5}) EXPECT_EQ(p.value(scalar(x)), std::abs(x));
  EXPECT_EQ((*p.known_minimizer)(0), 0.0);
}

TEST(Catalog, MedianMinimizerByGridScan) {
  const auto p = catalog_problem("abs_sum", Params{{"agents", "3"}, {"centers", "-1,0,4"}}, 1);
  double best_x = 0.0, best = std::numeric_limits<double>::infinity();
  for (int k = 0; k <= 7000; ++k) {
    const double x = -2.0 + 1e-3 * k;
    const double v = std::abs(x + 1) + std::abs(x) + std::abs(x - 4);
    EXPECT_NEAR(p.value(scalar(x)), v, 1e-12);
    if (v < best) {
      best = v;
      best_x = x;
    }
  }
  EXPECT_NEAR(best_x, 0.0, 1e-9);
  EXPECT_EQ((*p.known_minimizer)(0), 0.0);
}

TEST(Catalog, DeterministicGivenSeed) {
  for (const auto& name : catalog_names()) {
    const auto a = catalog_problem(name, {}, 5);
    const auto b = catalog_problem(name, {}, 5);
    const auto c = catalog_problem(name, {}, 6);
    Rng rng(1);
    const Vector x = random_point(rng, a.dimension);
    EXPECT_EQ(a.value(x), b.value(x)) << name;
    EXPECT_NE(a.value(x), c.value(x)) << name;
  }
}

TEST(Catalog, ConvexProblemsStationaryAtKnownMinimizer) {
  const auto abs = catalog_problem("abs_sum", Params{{"agents", "5"}, {"dim", "3"}}, 3);
  EXPECT_LE(stationarity_measure(abs, *abs.known_minimizer).value, 1e-8);
  const auto reg = catalog_problem("robust_regression_l1", Params{{"outlier_fraction", "0"}}, 3);
  ASSERT_TRUE(reg.known_minimizer.has_value());
  EXPECT_LE(stationarity_measure(reg, *reg.known_minimizer, ActiveBand::absolute_only(1e-9)).value, 1e-8);
}

TEST(Catalog, PhaseRetrievalTruthIsZeroLoss) {
  const auto p = catalog_problem("phase_retrieval_toy", {}, 8);
  EXPECT_NEAR(p.value(*p.known_minimizer), 0.0, 1e-12);
  EXPECT_NEAR(p.value(-*p.known_minimizer), 0.0, 1e-12);
}

TEST(Catalog, ComponentGradientsMatchFiniteDifferences) {
  const auto p = catalog_problem("max_quadratics", Params{{"agents", "3"}, {"dim", "4"}, {"components", "4"}}, 2);
  Rng rng(8);
  for (const auto& agent : p.agents) {
    const auto& f = dynamic_cast<const MaxOfSmoothObjective&>(agent.term(0));
    for (std::size_t j = 0; j < f.size(); ++j) {
      for (int trial = 0; trial < 20; ++trial) {
        const Vector x = random_point(rng, p.dimension, 2.0);
        const Vector fd = oracle::fd_gradient(f.component(j).value, x);
        const Vector g = f.component(j).gradient(x);
        EXPECT_LE((g - fd).norm() / std::max(1.0, g.norm()), 1e-5);
      }
    }
  }
}

TEST(Catalog, ReluTermsMatchFiniteDifferencesAwayFromKinks) {
  const auto p = catalog_problem("tiny_relu_net", Params{{"agents", "2"}, {"samples", "5"}}, 4);
  Rng rng(12);
  int checked = 0;
  for (int trial = 0; trial < 40; ++trial) {
    const Vector x = random_point(rng, p.dimension);
    for (const auto& agent : p.agents) {
      const auto sets = agent.active_sets(x, ActiveBand::absolute_only(1e-4));
      if (std::any_of(sets.begin(), sets.end(), [](const auto& s) { return s.size() > 1; })) continue;
      const Vector g = agent.clarke_element(x);
      const Vector fd = oracle::fd_gradient([&](const Vector& y) { return agent.value(y); }, x);
      EXPECT_LE((g - fd).norm() / std::max(1.0, g.norm()), 1e-5);
      ++checked;
    }
  }
  EXPECT_GE(checked, 20);
}

TEST(Catalog, ReluDataFileIsPartitionedRoundRobin) {
  const std::string path = ::testing::TempDir() + "relu_data.csv";
  {
    std::ofstream out(path);
    out << "a,b,label\n";
    for (int k = 0; k < 9; ++k) out << k << ',' << -k << ',' << (k % 2) << '\n';
  }
  const auto p = catalog_problem("tiny_relu_net", Params{{"agents", "3"}, {"hidden", "2"}, {"data_file", path}}, 1);
  EXPECT_EQ(p.dimension, 2u * 2u + 2u * 2u + 1u);
  ASSERT_EQ(p.data.size(), 9u);
  for (std::size_t k = 0; k < 9; ++k) EXPECT_EQ(p.data[k].agent, k % 3);
  for (const auto& agent : p.agents) EXPECT_EQ(agent.data_term_count(), 3u);
}

TEST(Catalog, DataCsvDump) {
  const auto p = catalog_problem("robust_regression_l1", Params{{"agents", "2"}, {"samples", "3"}}, 1);
  std::ostringstream os;
  write_data_csv(os, p);
  const std::string text = os.str();
  EXPECT_EQ(text.substr(0, text.find('\n')), "agent,x0,x1,x2,target");
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 7);
}

TEST(GridOracle, MaxQuadraticsStationaryPointsMatchGolden) {
  const auto p = catalog_problem("max_quadratics", {}, 7);
  oracle::PlanarMaxSum planar;
  for (const auto& agent : p.agents) {
    const auto& f = dynamic_cast<const MaxOfSmoothObjective&>(agent.term(0));
    std::vector<oracle::PlanarMaxSum::Piece> pieces;
    for (std::size_t j = 0; j < f.size(); ++j) pieces.push_back({f.component(j).value, f.component(j).gradient});
    planar.agents.push_back(std::move(pieces));
    planar.lipschitz = std::max(planar.lipschitz, f.lipschitz());
  }
  const auto points = oracle::grid_stationary_points(planar, 6.0, 1e-2, 1e-4);
  ASSERT_FALSE(points.empty());
  for (const auto& x : points) {
    EXPECT_LE(stationarity_measure(p, x, ActiveBand::absolute_only(1e-2)).value, 0.05);
  }

  std::ifstream in(std::string(DSSG_SOURCE_DIR) + "/tests/golden/max_quadratics_seed7_stationary.csv");
  ASSERT_TRUE(in.good());
  std::string line;
  std::getline(in, line);
  std::vector<Vector> golden;
  while (std::getline(in, line)) {
    Vector x(2);
    ASSERT_EQ(std::sscanf(line.c_str(), "%lf,%lf", &x(0), &x(1)), 2);
    golden.push_back(x);
  }
  ASSERT_EQ(golden.size(), points.size());
  for (std::size_t k = 0; k < points.size(); ++k) EXPECT_LE((golden[k] - points[k]).norm(), 1e-12);
}
