#include <gtest/gtest.h>

#include <sstream>

#include "dssg/network.hpp"
#include "oracles.hpp"

using namespace dssg;

namespace {

AgentMatrix random_agents(Rng& rng, Eigen::Index n, Eigen::Index m) {
  std::normal_distribution<double> normal;
  AgentMatrix x(n, m);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index k = 0; k < m; ++k) x(i, k) = normal(rng);
  return x;
}

double residual_norm(const AgentMatrix& x) {
  const Vector mean = row_average(x);
  double sq = 0.0;
  for (Eigen::Index i = 0; i < x.rows(); ++i) sq += (x.row(i).transpose() - mean).squaredNorm();
  return std::sqrt(sq);
}

}  // namespace

TEST(Graph, SingleAgentHasNoEdges) {
  Graph g(1, {});
  EXPECT_EQ(g.size(), 1u);
  EXPECT_EQ(g.edge_count(), 0u);
  EXPECT_TRUE(g.is_connected());
}

TEST(Graph, PathOfThree) {
  Graph g = build_graph(3, {{0, 1}, {1, 2}});
  EXPECT_EQ(g.edge_count(), 2u);
  EXPECT_EQ(g.degree(1), 2u);
  EXPECT_TRUE(g.has_edge(2, 1));
  EXPECT_FALSE(g.has_edge(0, 2));
  EXPECT_TRUE(g.is_connected());
}

TEST(Graph, RejectsBadEdges) {
  EXPECT_THROW(Graph(3, {{0, 3}}), InvalidEdge);
  EXPECT_THROW(Graph(3, {{1, 1}}), InvalidEdge);
  EXPECT_THROW(Graph(3, {{0, 1}, {1, 0}}), InvalidEdge);
  EXPECT_THROW(Graph(0, {}), InvalidEdge);
}

TEST(Graph, DisconnectedIsDetected) {
  Graph g(4, {{0, 1}, {2, 3}});
  EXPECT_FALSE(g.is_connected());
  EXPECT_THROW(metropolis_weights(g), NotConnected);
}

TEST(RandomGraph, CertainEdgeGivesSingleEdge) {
  for (std::uint64_t seed : {1u, 2u, 99u}) {
    Graph g = random_graph(2, 1.0, seed);
    EXPECT_EQ(g.edge_count(), 1u);
  }
}

TEST(RandomGraph, EmptyProbabilityCannotConnect) {
  EXPECT_THROW(random_graph(4, 0.0, 5), DisconnectedAfterRetries);
  EXPECT_THROW(random_graph(4, 1.5, 5), BadParams);
}

TEST(RandomGraph, DeterministicGivenSeed) {
  EXPECT_EQ(random_graph(20, 0.3, 11).edges(), random_graph(20, 0.3, 11).edges());
  EXPECT_NE(random_graph(20, 0.3, 11).edges(), random_graph(20, 0.3, 12).edges());
}

TEST(RandomGraph, FiftyAgentsEdgeCountNearExpectation) {
  Graph g7 = random_graph(50, 0.5, 7);
  EXPECT_TRUE(g7.is_connected());
  double total = 0.0;
  const int seeds = 1000;
  for (int s = 0; s < seeds; ++s) total += static_cast<double>(random_graph(50, 0.5, static_cast<std::uint64_t>(s)).edge_count());
  const double mean = total / seeds;
  EXPECT_NEAR(mean, 612.5, 0.03 * 612.5);
}

TEST(Metropolis, TwoAgents) {
  auto w = metropolis_weights(path_graph(2));
  EXPECT_DOUBLE_EQ(w.weights()(0, 0), 0.5);
  EXPECT_DOUBLE_EQ(w.weights()(0, 1), 0.5);
  EXPECT_NEAR(w.beta(), 0.0, 1e-12);
}

TEST(Metropolis, PathOfThreeFollowsDegreeFormula) {
  // Both edges touch the degree-2 middle node, so every off-diagonal weight is 1/3.
  auto w = metropolis_weights(path_graph(3));
  Eigen::Matrix3d expected;
  expected << 2.0 / 3, 1.0 / 3, 0, 1.0 / 3, 1.0 / 3, 1.0 / 3, 0, 1.0 / 3, 2.0 / 3;
  EXPECT_LT((w.weights() - expected).cwiseAbs().maxCoeff(), 1e-15);
  const auto ev = oracle::jacobi_eigenvalues(expected);
  EXPECT_NEAR(ev[0], 1.0, 1e-12);
  EXPECT_NEAR(ev[1], 2.0 / 3, 1e-12);
  EXPECT_NEAR(ev[2], 0.0, 1e-12);
  EXPECT_NEAR(w.beta(), 2.0 / 3, 1e-12);
}

TEST(Metropolis, CompleteFourIsUniform) {
  auto w = metropolis_weights(complete_graph(4));
  EXPECT_LT((w.weights().array() - 0.25).abs().maxCoeff(), 1e-15);
  EXPECT_NEAR(w.beta(), 0.0, 1e-12);
}

TEST(Metropolis, LazyVariantHasNonnegativeSpectrum) {
  auto w = metropolis_weights(path_graph(5), true);
  EXPECT_GE(w.spectral().eigenvalues.back(), -1e-12);
  EXPECT_LT(w.beta(), 1.0);
}

TEST(SpectralBeta, HalfWeightPath) {
  Eigen::Matrix3d w;
  w << 0.5, 0.5, 0, 0.5, 0, 0.5, 0, 0.5, 0.5;
  const auto ev = oracle::jacobi_eigenvalues(w);
  EXPECT_NEAR(ev[1], 0.5, 1e-12);
  EXPECT_NEAR(ev[2], -0.5, 1e-12);
  EXPECT_NEAR(spectral_beta(w).beta, 0.5, 1e-12);
}

TEST(SpectralBeta, IdentityViolatesContraction) {
  const auto report = spectral_beta(Eigen::Matrix2d::Identity());
  EXPECT_NEAR(report.beta, 1.0, 1e-12);
  EXPECT_FALSE(report.satisfied());
  EXPECT_THROW(report.require(), AssumptionViolated);
}

TEST(SpectralBeta, UniformAveraging) {
  EXPECT_NEAR(spectral_beta(Eigen::MatrixXd::Constant(5, 5, 0.2)).beta, 0.0, 1e-12);
}

TEST(SpectralBeta, RejectsNonStochastic) {
  Eigen::Matrix2d w;
  w << 0.6, 0.5, 0.5, 0.5;
  EXPECT_THROW(spectral_beta(w), AssumptionViolated);
}

TEST(SpectralBeta, SingleAgent) { EXPECT_EQ(spectral_beta(Eigen::MatrixXd::Ones(1, 1)).beta, 0.0); }

TEST(MixingMatrix, RejectsWeightOffGraph) {
  Eigen::Matrix3d w = Eigen::Matrix3d::Constant(1.0 / 3);
  EXPECT_THROW(MixingMatrix(path_graph(3), w), AssumptionViolated);
}

TEST(MixingMatrix, PropertiesOnRandomGraphs) {
  Rng rng(2024);
  std::uniform_int_distribution<std::size_t> size(2, 30);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = size(rng);
    const auto w = metropolis_weights(random_graph(n, 0.4, static_cast<std::uint64_t>(trial)));
    const auto& m = w.weights();
    EXPECT_LT((m - m.transpose()).cwiseAbs().maxCoeff(), 1e-15);
    EXPECT_LT((m.rowwise().sum().array() - 1.0).abs().maxCoeff(), 1e-12);
    EXPECT_LT((m.colwise().sum().array() - 1.0).abs().maxCoeff(), 1e-12);
    EXPECT_LT(w.beta(), 1.0);
    const auto ev = oracle::jacobi_eigenvalues(m);
    EXPECT_NEAR(w.beta(), std::max(std::abs(ev[1]), std::abs(ev.back())), 1e-10);

    const AgentMatrix x = random_agents(rng, static_cast<Eigen::Index>(n), 3);
    const AgentMatrix y = w.mix(x);
    EXPECT_LT((row_average(y) - row_average(x)).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LE(residual_norm(y), w.beta() * residual_norm(x) + 1e-10);
  }
}

TEST(MixingMatrix, MixMatchesDenseProduct) {
  const auto w = metropolis_weights(random_graph(8, 0.5, 3));
  Rng rng(5);
  const AgentMatrix x = random_agents(rng, 8, 2);
  const Eigen::MatrixXd dense = w.weights() * Eigen::MatrixXd(x);
  EXPECT_LT((Eigen::MatrixXd(w.mix(x)) - dense).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(NetworkFile, RoundTripWithWeights) {
  const auto w = metropolis_weights(random_graph(6, 0.5, 9));
  std::stringstream ss;
  write_network(ss, w.graph(), &w.weights());
  const auto back = read_network(ss);
  EXPECT_EQ(back.graph.edges(), w.graph().edges());
  ASSERT_TRUE(back.weights.has_value());
  EXPECT_EQ(*back.weights, w.weights());
}

TEST(NetworkFile, EdgesAreOneBased) {
  std::stringstream ss("3 2\n1 2\n2 3\n");
  const auto net = read_network(ss);
  EXPECT_TRUE(net.graph.has_edge(0, 1));
  EXPECT_TRUE(net.graph.has_edge(1, 2));
  EXPECT_FALSE(net.weights.has_value());
  std::stringstream bad("2 1\n0 1\n");
  EXPECT_THROW(read_network(bad), InvalidEdge);
  std::stringstream truncated("2 1\n1 2\n0.5 0.5 0.5\n");
  EXPECT_THROW(read_network(truncated), FormatError);
}
