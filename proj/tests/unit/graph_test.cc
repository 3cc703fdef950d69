#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numeric>
#include <random>

#include <gtest/gtest.h>

#include "gtrans/config.h"
#include "gtrans/errors.h"
#include "gtrans/graph.h"
#include "gtrans/graph_io.h"
#include "gtrans/sbm.h"
#include "gtrans/stats.h"
#include "test_support.h"

namespace gtrans {
namespace {

namespace fs = std::filesystem;

Graph Unlabeled(NodeId n, EdgeList edges, Eigen::Index d = 2) {
  return Graph::Create(n, std::move(edges), Matrix::Ones(n, d), {}, 0, {});
}

fs::path TempDir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("gtrans_graph_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

TEST(GraphTest, CanonicalizesEdges) {
  GraphBuildInfo info;
  const Graph g = Graph::Create(4, {{2, 1}, {1, 2}, {0, 3}, {3, 3}, {0, 1}}, Matrix::Zero(4, 1), {},
                                0, {}, &info);
  ASSERT_EQ(g.num_edges(), 3u);
  EXPECT_EQ(g.edges()[0], (Edge{0, 1}));
  EXPECT_EQ(g.edges()[1], (Edge{0, 3}));
  EXPECT_EQ(g.edges()[2], (Edge{1, 2}));
  EXPECT_EQ(info.self_loops_dropped, 1u);
  EXPECT_EQ(info.duplicates_merged, 1u);
  EXPECT_EQ(g.FindEdge(2, 1), 2);
  EXPECT_EQ(g.FindEdge(2, 3), -1);
}

TEST(GraphTest, CsrListsBothDirections) {
  const Graph g = Unlabeled(3, {{0, 1}, {1, 2}});
  const Csr& csr = g.csr();
  ASSERT_EQ(csr.num_entries(), 4u);
  EXPECT_EQ(csr.offsets, (std::vector<EdgeId>{0, 1, 3, 4}));
  EXPECT_EQ(csr.columns, (std::vector<NodeId>{1, 0, 2, 1}));
  EXPECT_EQ(csr.edge_ids, (std::vector<EdgeId>{0, 0, 1, 1}));
}

TEST(GraphTest, RejectsOutOfRangeEdges) {
  EXPECT_THROW(Unlabeled(3, {{0, 3}}), DomainError);
  EXPECT_THROW(Unlabeled(3, {{-1, 2}}), DomainError);
}

TEST(GraphTest, RejectsInconsistentFields) {
  EXPECT_THROW(Graph::Create(3, {}, Matrix::Zero(2, 1), {}, 0, {}), DimensionError);
  EXPECT_THROW(Graph::Create(2, {}, Matrix::Zero(2, 1), {0, 2}, 2, {}), DomainError);
  EXPECT_THROW(Graph::Create(2, {}, Matrix::Zero(2, 1), {0}, 2, {}), DimensionError);
}

TEST(GraphTest, EdgeSubsetAndSetOperations) {
  const Graph g = Unlabeled(4, {{0, 1}, {1, 2}, {2, 3}});
  const Graph sub = g.WithEdgeSubset({true, false, true});
  EXPECT_EQ(sub.edges(), (EdgeList{{0, 1}, {2, 3}}));
  EXPECT_EQ(EdgeDifference(g.edges(), sub.edges()), (EdgeList{{1, 2}}));
  EXPECT_EQ(EdgeIntersection(g.edges(), sub.edges()), sub.edges());
}

TEST(GraphIoTest, SaveLoadRoundTrip) {
  const Graph g = testing::RandomGraph(12, 0.3, 3, 3, 5);
  const fs::path dir = TempDir("roundtrip");
  SaveGraph(g, dir / "g");
  const Graph back = LoadGraph(dir / "g");
  EXPECT_TRUE(back == g);
}

TEST(GraphIoTest, LoadsFourFileFormatAndReportsCanonicalization) {
  const fs::path dir = TempDir("four_files");
  WriteTextFile(dir / "e.txt", "# comment\n0\t1\n1 0\n2 2\n1 2\n");
  WriteTextFile(dir / "x.txt", "1,0\n0,1\n0.5,0.5\n");
  WriteTextFile(dir / "y.txt", "0\n1\n1\n");
  WriteTextFile(dir / "m.txt", "train\nval\ntest\n");
  const LoadedDataset data = LoadDataset(dir / "e.txt", dir / "x.txt", dir / "y.txt", dir / "m.txt");
  EXPECT_EQ(data.graph.num_nodes(), 3);
  EXPECT_EQ(data.graph.num_edges(), 2u);
  EXPECT_EQ(data.info.self_loops_dropped, 1u);
  EXPECT_EQ(data.info.duplicates_merged, 1u);
  EXPECT_EQ(data.graph.num_classes(), 2);
  EXPECT_EQ(data.graph.Nodes(Split::kTest), (std::vector<NodeId>{2}));
}

TEST(GraphIoTest, MalformedEdgeNamesFileAndLine) {
  const fs::path dir = TempDir("malformed");
  WriteTextFile(dir / "e.txt", "0 1\n0 7\n");
  WriteTextFile(dir / "x.txt", "1\n2\n");
  try {
    LoadDataset(dir / "e.txt", dir / "x.txt", "", "");
    FAIL() << "expected MalformedInputError";
  } catch (const MalformedInputError& e) {
    EXPECT_NE(std::string(e.what()).find("e.txt:2"), std::string::npos) << e.what();
  }
}

TEST(GraphIoTest, RaggedFeatureRowsAreDimensionErrors) {
  const fs::path dir = TempDir("ragged");
  WriteTextFile(dir / "e.txt", "0 1\n");
  WriteTextFile(dir / "x.txt", "1,2\n3\n");
  EXPECT_THROW(LoadDataset(dir / "e.txt", dir / "x.txt", "", ""), DimensionError);
}

TEST(GraphIoTest, RealsRoundTripExactly) {
  for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23}) {
    EXPECT_EQ(ParseReal(FormatReal(v)), v);
  }
}

TEST(StatsTest, HomophilyOfTwoTrianglesIsOne) {
  SbmParams p;
  p.blocks = 2;
  p.nodes_per_block = 3;
  p.p_in = 1.0;
  p.p_out = 0.0;
  p.seed = 3;
  const Graph g = GenerateSbm(p);
  EXPECT_EQ(g.num_edges(), 6u);
  EXPECT_DOUBLE_EQ(EdgeHomophily(g), 1.0);
}

TEST(StatsTest, HomophilyErrors) {
  EXPECT_THROW(EdgeHomophily(Unlabeled(2, {{0, 1}})), DomainError);
  const Graph empty = Graph::Create(2, {}, Matrix::Zero(2, 1), {0, 1}, 2, {});
  EXPECT_THROW(EdgeHomophily(empty), UndefinedStatisticError);
}

TEST(StatsTest, PairwiseSimilaritySingleEdgeCases) {
  auto sim = [](Eigen::RowVector2d a, Eigen::RowVector2d b) {
    Matrix x(2, 2);
    x.row(0) = a;
    x.row(1) = b;
    return PairwiseFeatureSimilarity(Graph::Create(2, {{0, 1}}, x, {}, 0, {}));
  };
  EXPECT_NEAR(sim({1, 2}, {1, 2}), 1.0, 1e-15);
  EXPECT_NEAR(sim({1, 0}, {0, 3}), 0.0, 1e-15);
  EXPECT_NEAR(sim({1, 2}, {-1, -2}), -1.0, 1e-15);
  EXPECT_NEAR(sim({0, 0}, {1, 1}), 0.0, 1e-15);
}

TEST(StatsTest, EdgeCountsAgainstReference) {
  const Matrix x = Matrix::Ones(6, 1);
  const std::vector<int> y = {0, 0, 0, 1, 1, 1};
  const Graph clean = Graph::Create(6, {{0, 1}, {1, 2}, {3, 4}, {4, 5}}, x, y, 2, {});
  const Graph attacked = Graph::Create(6, {{0, 1}, {1, 2}, {3, 4}, {0, 3}, {1, 4}, {2, 5}}, x, y, 2, {});
  const GraphStats s = ComputeGraphStats(attacked, &clean);
  EXPECT_EQ(s.edges_added, 3u);
  EXPECT_EQ(s.edges_removed, 1u);
  EXPECT_EQ(s.num_edges, 6u);
  const GraphStats same = ComputeGraphStats(clean, &clean);
  EXPECT_EQ(same.edges_added, 0u);
  EXPECT_EQ(same.edges_removed, 0u);
  const Graph minus_one = clean.WithEdgeSubset({true, true, true, false});
  const GraphStats m = ComputeGraphStats(minus_one, &clean);
  EXPECT_EQ(m.edges_added, 0u);
  EXPECT_EQ(m.edges_removed, 1u);
  const Graph other = Unlabeled(5, {{0, 1}});
  EXPECT_THROW(ComputeGraphStats(clean, &other), DomainError);
}

TEST(StatsTest, InvariantUnderNodeRelabeling) {
  const Graph g = testing::RandomGraph(30, 0.2, 4, 3, 11);
  std::vector<NodeId> perm(30);
  std::iota(perm.begin(), perm.end(), 0);
  Rng rng(4);
  std::shuffle(perm.begin(), perm.end(), rng);
  EdgeList edges;
  for (const Edge& e : g.edges()) edges.push_back({perm[e.u], perm[e.v]});
  Matrix x(30, 4);
  std::vector<int> y(30);
  for (NodeId i = 0; i < 30; ++i) {
    x.row(perm[i]) = g.features().row(i);
    y[perm[i]] = g.labels()[i];
  }
  const Graph p = Graph::Create(30, edges, x, y, 3, {});
  EXPECT_NEAR(EdgeHomophily(p), EdgeHomophily(g), 1e-12);
  EXPECT_NEAR(PairwiseFeatureSimilarity(p), PairwiseFeatureSimilarity(g), 1e-12);
}

TEST(SbmTest, DeterministicInSeed) {
  SbmParams p;
  p.seed = 9;
  const Graph a = GenerateSbm(p);
  const Graph b = GenerateSbm(p);
  EXPECT_EQ(a.edges(), b.edges());
  EXPECT_TRUE(a == b);
  p.seed = 10;
  EXPECT_NE(GenerateSbm(p).edges(), a.edges());
}

TEST(SbmTest, WithinBlockEdgeCountWithinThreeSigma) {
  SbmParams p;
  p.blocks = 2;
  p.nodes_per_block = 100;
  p.p_in = 0.5;
  p.p_out = 0.05;
  p.seed = 21;
  const Graph g = GenerateSbm(p);
  std::size_t within = 0;
  for (const Edge& e : g.edges()) within += g.labels()[e.u] == g.labels()[e.v] ? 1 : 0;
  const double trials = 2.0 * 100.0 * 99.0 / 2.0;
  const double mean = 0.5 * trials;
  const double sigma = std::sqrt(trials * 0.25);
  EXPECT_LE(std::abs(static_cast<double>(within) - mean), 3.0 * sigma);
}

TEST(SbmTest, SplitsAndBlockMeans) {
  SbmParams p;
  p.blocks = 3;
  p.nodes_per_block = 500;
  p.feature_dim = 4;
  p.feature_shift = 2.0;
  p.seed = 2;
  const Graph g = GenerateSbm(p);
  for (int b = 0; b < 3; ++b) {
    int train = 0, val = 0, test = 0;
    for (NodeId i = b * 500; i < (b + 1) * 500; ++i) {
      train += g.splits()[i] == Split::kTrain;
      val += g.splits()[i] == Split::kVal;
      test += g.splits()[i] == Split::kTest;
    }
    EXPECT_EQ(train, 300);
    EXPECT_EQ(val, 100);
    EXPECT_EQ(test, 100);
  }
  // Empirical block means are feature_shift apart (sampling error ~ 0.1).
  std::vector<Vector> means;
  for (int b = 0; b < 3; ++b) means.push_back(g.features().middleRows(b * 500, 500).colwise().mean().transpose());
  EXPECT_NEAR((means[0] - means[1]).norm(), 2.0, 0.25);
  EXPECT_NEAR((means[1] - means[2]).norm(), 2.0, 0.25);
}

TEST(SbmTest, ParameterErrors) {
  SbmParams p;
  p.p_in = 0.1;
  p.p_out = 0.2;
  EXPECT_THROW(GenerateSbm(p), DomainError);
  p = {};
  p.feature_dim = 1;
  EXPECT_THROW(GenerateSbm(p), DomainError);
}

TEST(ConfigTest, ParsesTrimsAndRoundTrips) {
  const auto kv = KeyValueConfig::Parse("# header\n a = 1 \nb=x y\n\nflag=true\n");
  EXPECT_EQ(kv.GetInt("a", 0), 1);
  EXPECT_EQ(kv.GetString("b", ""), "x y");
  EXPECT_TRUE(kv.GetBool("flag", false));
  EXPECT_EQ(kv.GetReal("missing", 2.5), 2.5);
  EXPECT_THROW(kv.GetReal("b", 0.0), ConfigError);
  EXPECT_THROW(kv.RequireString("missing"), ConfigError);
  const auto back = KeyValueConfig::Parse(kv.Serialize());
  EXPECT_EQ(back.entries(), kv.entries());
}

TEST(ConfigTest, MissingFileIsConfigError) {
  EXPECT_THROW(KeyValueConfig::Load("/nonexistent/gtrans.cfg"), ConfigError);
}

}  // namespace
}  // namespace gtrans
