#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include <gtest/gtest.h>

#include "gtrans/checkpoint.h"
#include "gtrans/config.h"
#include "gtrans/errors.h"
#include "gtrans/sbm.h"
#include "gtrans/train.h"
#include "gtrans/transform.h"
#include "test_support.h"

namespace gtrans {
namespace {

double Sum(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0); }

std::vector<double> ClampSum(const std::vector<double>& p) {
  std::vector<double> c(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) c[i] = std::clamp(p[i], 0.0, 1.0);
  return c;
}

TEST(ProjectBudgetTest, InactiveConstraint) {
  EXPECT_EQ(ProjectBudget(std::vector<double>{0.3, 0.2}, 1.0), (std::vector<double>{0.3, 0.2}));
}

TEST(ProjectBudgetTest, AnalyticShift) {
  const auto p = ProjectBudget(std::vector<double>{0.9, 0.9, 0.9}, 1.5);
  for (double v : p) EXPECT_NEAR(v, 0.5, 1e-7);
}

TEST(ProjectBudgetTest, ClampOnly) {
  EXPECT_EQ(ProjectBudget(std::vector<double>{1.5, -0.2, 0.4}, 10.0),
            (std::vector<double>{1.0, 0.0, 0.4}));
}

TEST(ProjectBudgetTest, Errors) {
  EXPECT_THROW(ProjectBudget(std::vector<double>{0.1}, 0.0), DomainError);
  EXPECT_THROW(ProjectBudget(std::vector<double>{NAN}, 1.0), DomainError);
}

TEST(ProjectBudgetTest, RandomVectorsSatisfyConstraintsAndAreIdempotent) {
  Rng rng(3);
  std::uniform_int_distribution<int> len(1, 2000);
  std::uniform_real_distribution<double> val(-1.0, 2.0);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> p(static_cast<std::size_t>(len(rng)));
    for (double& v : p) v = val(rng);
    std::uniform_real_distribution<double> budget(0.01, static_cast<double>(p.size()));
    const double b = budget(rng);
    const auto q = ProjectBudget(p, b);
    for (double v : q) {
      EXPECT_GE(v, 0.0);
      EXPECT_LE(v, 1.0);
    }
    EXPECT_LE(Sum(q), b + 1e-6);
    if (Sum(ClampSum(p)) > b) {
      EXPECT_NEAR(Sum(q), b, 1e-6);
    }
    const auto qq = ProjectBudget(q, b);
    for (std::size_t i = 0; i < q.size(); ++i) EXPECT_NEAR(qq[i], q[i], 1e-9);
  }
}

TEST(DeltaStateTest, RelaxedWeights) {
  const Graph g = testing::RandomGraph(6, 0.6, 2, 2, 1);
  DeltaState d = DeltaState::Zero(g, 1.0);
  EXPECT_EQ(RelaxedEdgeWeights(g, d), std::vector<double>(g.num_edges(), 1.0));
  d.delta_a[0] = 0.25;
  d.delta_a[1] = 1.0;
  const auto w = RelaxedEdgeWeights(g, d);
  EXPECT_EQ(w[d.candidates[0]], 0.75);
  EXPECT_EQ(w[d.candidates[1]], 0.0);
}

TEST(DeltaStateTest, ValidateRejectsBrokenInvariants) {
  const Graph g = testing::RandomGraph(6, 0.6, 2, 2, 1);
  DeltaState d = DeltaState::Zero(g, 1.0);
  d.delta_a[0] = 1.2;
  EXPECT_THROW(d.Validate(g), DomainError);
  d = DeltaState::Zero(g, 1.0);
  d.candidates[0] = static_cast<EdgeId>(g.num_edges());
  EXPECT_THROW(d.Validate(g), ConsistencyError);
  d = DeltaState::Zero(g, 1.0);
  d.delta_x = Matrix::Zero(2, 2);
  EXPECT_THROW(d.Validate(g), DimensionError);
}

TEST(StructureStepTest, ZeroGradientLeavesFeasibleStateUnchanged) {
  const Graph g = testing::RandomGraph(6, 0.6, 2, 2, 2);
  DeltaState d = DeltaState::Zero(g, 2.0);
  d.delta_a[0] = 0.3;
  const auto before = d.delta_a;
  AdamState adam;
  StructureStep(d, std::vector<double>(d.candidates.size(), 0.0), 0.1, adam);
  EXPECT_EQ(d.delta_a, before);
}

TEST(StructureStepTest, SingleCandidateCappedByBudget) {
  Matrix x = Matrix::Zero(2, 1);
  const Graph g = Graph::Create(2, {{0, 1}}, x, {}, 0, {});
  for (double budget : {0.4, 3.0}) {
    DeltaState d = DeltaState::Zero(g, budget);
    AdamState adam;
    for (int i = 0; i < 5; ++i) StructureStep(d, std::vector<double>{-1e6}, 10.0, adam);
    EXPECT_NEAR(d.delta_a[0], std::min(1.0, budget), 1e-6);
  }
}

TEST(StructureStepTest, RandomGradientsRespectBudget) {
  const Graph g = testing::RandomGraph(30, 0.3, 2, 2, 3);
  Rng rng(4);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    DeltaState d = DeltaState::Zero(g, 3.0);
    AdamState adam;
    for (int step = 0; step < 3; ++step) {
      std::vector<double> grad(d.candidates.size());
      for (double& v : grad) v = gauss(rng);
      StructureStep(d, grad, 0.5, adam);
      EXPECT_LE(d.FlipMass(), 3.0 + 1e-6);
      for (double v : d.delta_a) EXPECT_TRUE(v >= 0.0 && v <= 1.0);
    }
  }
}

TEST(StructureStepTest, NonFiniteGradientNamesEdge) {
  const Graph g = testing::RandomGraph(6, 0.6, 2, 2, 2);
  DeltaState d = DeltaState::Zero(g, 1.0);
  std::vector<double> grad(d.candidates.size(), 0.0);
  grad[1] = NAN;
  AdamState adam;
  try {
    StructureStep(d, grad, 0.1, adam);
    FAIL();
  } catch (const NumericalError& e) {
    EXPECT_NE(std::string(e.what()).find("edge 1"), std::string::npos) << e.what();
  }
}

TEST(FeatureStepTest, ZeroGradientOrRateIsNoOp) {
  const Graph g = testing::RandomGraph(6, 0.6, 3, 2, 2);
  DeltaState d = DeltaState::Zero(g, 1.0);
  AdamState adam;
  FeatureStep(d, Matrix::Zero(6, 3), 0.1, adam);
  EXPECT_EQ(d.delta_x.norm(), 0.0);
  AdamState adam2;
  FeatureStep(d, Matrix::Ones(6, 3), 0.0, adam2);
  EXPECT_EQ(d.delta_x.norm(), 0.0);
}

TEST(FeatureStepTest, ConstantGradientKeepsMoving) {
  const Graph g = testing::RandomGraph(6, 0.6, 3, 2, 2);
  DeltaState d = DeltaState::Zero(g, 1.0);
  AdamState adam;
  FeatureStep(d, Matrix::Ones(6, 3), 0.1, adam);
  const double one = d.delta_x.norm();
  FeatureStep(d, Matrix::Ones(6, 3), 0.1, adam);
  EXPECT_GT(d.delta_x.norm(), one);
}

TEST(FeatureStepTest, NonFiniteGradientIsNumericalError) {
  const Graph g = testing::RandomGraph(6, 0.6, 3, 2, 2);
  DeltaState d = DeltaState::Zero(g, 1.0);
  Matrix grad = Matrix::Zero(6, 3);
  grad(2, 1) = INFINITY;
  AdamState adam;
  EXPECT_THROW(FeatureStep(d, grad, 0.1, adam), NumericalError);
}

TEST(SampleDiscreteTest, ZeroDeltaReturnsOriginal) {
  const Graph g = testing::RandomGraph(10, 0.4, 2, 2, 5);
  const DeltaState d = DeltaState::Zero(g, 1.0);
  int calls = 0;
  const DiscreteSample s = SampleDiscrete(
      g, d, 4,
      [&](std::span<const double> w) {
        ++calls;
        return std::accumulate(w.begin(), w.end(), 0.0);
      },
      1);
  EXPECT_EQ(calls, 4);
  EXPECT_EQ(s.graph, g);
  for (double l : s.losses) EXPECT_EQ(l, static_cast<double>(g.num_edges()));
}

TEST(SampleDiscreteTest, CertainFlipAlwaysDeletes) {
  const Graph g = testing::RandomGraph(10, 0.4, 2, 2, 5);
  DeltaState d = DeltaState::Zero(g, 1.0);
  d.delta_a[2] = 1.0;
  const Edge gone = g.edges()[d.candidates[2]];
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const DiscreteSample s = SampleDiscrete(g, d, 3, [](std::span<const double>) { return 0.0; }, seed);
    EXPECT_LT(s.graph.FindEdge(gone.u, gone.v), 0);
    EXPECT_EQ(s.graph.num_edges(), g.num_edges() - 1);
  }
}

TEST(SampleDiscreteTest, HalfProbabilityDeletesBinomialCount) {
  EdgeList edges;
  for (NodeId i = 0; i < 1000; ++i) edges.push_back({i, i + 1});
  const Graph g = Graph::Create(1001, edges, Matrix::Zero(1001, 1), {}, 0, {});
  DeltaState d = DeltaState::Zero(g, 1000.0);
  std::fill(d.delta_a.begin(), d.delta_a.end(), 0.5);
  const DiscreteSample s = SampleDiscrete(g, d, 1, [](std::span<const double>) { return 0.0; }, 6);
  const double deleted = static_cast<double>(g.num_edges() - s.graph.num_edges());
  EXPECT_LE(std::abs(deleted - 500.0), 3.0 * std::sqrt(250.0));
}

TEST(SampleDiscreteTest, PicksMinimumLoss) {
  const Graph g = testing::RandomGraph(12, 0.4, 2, 2, 7);
  DeltaState d = DeltaState::Zero(g, 100.0);
  std::fill(d.delta_a.begin(), d.delta_a.end(), 0.4);
  const DiscreteSample s = SampleDiscrete(
      g, d, 10, [](std::span<const double> w) { return std::accumulate(w.begin(), w.end(), 0.0); }, 2);
  EXPECT_EQ(s.losses[s.chosen], *std::min_element(s.losses.begin(), s.losses.end()));
  EXPECT_EQ(static_cast<double>(s.graph.num_edges()), s.losses[s.chosen]);
}

struct AdaptFixture {
  Graph g;
  GcnModel model;
};

AdaptFixture TrainedFixture() {
  SbmParams p;
  p.blocks = 2;
  p.nodes_per_block = 30;
  p.p_in = 0.2;
  p.p_out = 0.02;
  p.feature_dim = 4;
  p.feature_shift = 2.0;
  p.seed = 3;
  AdaptFixture f;
  f.g = GenerateSbm(p);
  TrainConfig tc;
  tc.epochs = 50;
  tc.seed = 3;
  GcnModel init = GcnModel::Init(ModelKind::kGcn2, 4, 8, 2, 3);
  init.b1.setConstant(0.1);
  f.model = Train(init, f.g, tc).model;
  return f;
}

TEST(GtransAdaptTest, SingleFeatureEpochKeepsStructure) {
  const AdaptFixture f = TrainedFixture();
  TransformConfig cfg;
  cfg.epochs = 1;
  cfg.tau1 = 1;
  cfg.tau2 = 0;
  const AdaptResult r = GtransAdapt(f.model, f.g, SurrogateKind{}, cfg);
  EXPECT_EQ(r.report.step, std::vector<char>{'x'});
  EXPECT_EQ(r.graph.edges(), f.g.edges());
  EXPECT_EQ(r.delta.FlipMass(), 0.0);
  EXPECT_GT(r.delta.delta_x.norm(), 0.0);
}

TEST(GtransAdaptTest, ScheduleAlternates) {
  const AdaptFixture f = TrainedFixture();
  TransformConfig cfg;
  cfg.epochs = 7;
  cfg.tau1 = 2;
  cfg.tau2 = 1;
  const AdaptResult r = GtransAdapt(f.model, f.g, SurrogateKind{}, cfg);
  EXPECT_EQ(std::string(r.report.step.begin(), r.report.step.end()), "xxaxxax");
  EXPECT_EQ(r.report.loss.size(), 7u);
}

TEST(GtransAdaptTest, ZeroStepSizesReturnInput) {
  const AdaptFixture f = TrainedFixture();
  TransformConfig cfg;
  cfg.eta1 = 0.0;
  cfg.eta2 = 0.0;
  const AdaptResult r = GtransAdapt(f.model, f.g, SurrogateKind{}, cfg);
  EXPECT_EQ(r.graph, f.g);
  EXPECT_TRUE(r.report.flipped_edges.empty());
}

TEST(GtransAdaptTest, FrozenModelBudgetAndDeterminism) {
  const AdaptFixture f = TrainedFixture();
  const std::string before = SerializeModel(f.model);
  TransformConfig cfg;
  cfg.epochs = 12;
  cfg.eta2 = 0.5;
  cfg.budget_fraction = 0.1;
  cfg.include_train_loss = true;
  cfg.lambda = 0.1;
  cfg.seed = 9;
  AdaptOptions opts;
  opts.diagnostic_nodes = f.g.Nodes(Split::kTest);
  const AdaptResult a = GtransAdapt(f.model, f.g, SurrogateKind{}, cfg, opts);
  EXPECT_EQ(SerializeModel(f.model), before);
  for (double m : a.report.flip_mass) EXPECT_LE(m, a.report.budget + 1e-6);
  for (double v : a.delta.delta_a) EXPECT_TRUE(v >= 0.0 && v <= 1.0);
  EXPECT_EQ(a.report.rho.size(), 12u);
  std::size_t positive = 0;
  for (double v : a.delta.delta_a) positive += v > 0.0;
  EXPECT_LE(a.report.flipped_edges.size(), positive);
  for (const Edge& e : a.report.flipped_edges) EXPECT_GE(f.g.FindEdge(e.u, e.v), 0);
  for (const Edge& e : a.graph.edges()) EXPECT_GE(f.g.FindEdge(e.u, e.v), 0);
  EXPECT_EQ(a.report.sample_losses.size(), 20u);
  EXPECT_EQ(a.report.sample_losses[a.report.chosen_sample],
            *std::min_element(a.report.sample_losses.begin(), a.report.sample_losses.end()));

  const AdaptResult b = GtransAdapt(f.model, f.g, SurrogateKind{}, cfg, opts);
  EXPECT_EQ(a.graph, b.graph);
  EXPECT_EQ(SerializeReportHeader(a.report), SerializeReportHeader(b.report));
  EXPECT_EQ(SerializeTrajectory(a.report), SerializeTrajectory(b.report));
}

TEST(TransformConfigTest, RoundTripAndErrors) {
  TransformConfig cfg;
  cfg.eta1 = 0.25;
  cfg.tau2 = 3;
  cfg.samples = 7;
  cfg.include_train_loss = true;
  cfg.seed = 12345678901234ULL;
  KeyValueConfig kv;
  cfg.WriteTo(kv);
  const TransformConfig back = TransformConfig::FromConfig(kv);
  EXPECT_EQ(back.eta1, 0.25);
  EXPECT_EQ(back.tau2, 3);
  EXPECT_EQ(back.samples, 7);
  EXPECT_TRUE(back.include_train_loss);
  EXPECT_EQ(back.seed, cfg.seed);

  TransformConfig bad;
  bad.tau1 = 0;
  bad.tau2 = 0;
  EXPECT_THROW(bad.Validate(), DomainError);
  bad = TransformConfig{};
  bad.budget_fraction = 0.0;
  EXPECT_THROW(bad.Validate(), DomainError);
}

TEST(CorrelationDiagnosticTest, SelfAndNegatedSurrogate) {
  const AdaptFixture f = TrainedFixture();
  const auto nodes = f.g.Nodes(Split::kTest);
  const GraphObjective lc = ClassificationObjective(f.model, f.g, nodes);
  const GraphObjective neg = [&](const Matrix& x, std::span<const double> w, Matrix* d_x,
                                 std::vector<double>* d_w) {
    const double v = lc(x, w, d_x, d_w);
    if (d_x != nullptr) *d_x = -*d_x;
    if (d_w != nullptr) {
      for (double& g : *d_w) g = -g;
    }
    return -v;
  };
  const std::vector<double> w(f.g.num_edges(), 1.0);
  const CorrelationResult same = CorrelationDiagnostic(lc, lc, f.g.features(), w, 0.0);
  EXPECT_NEAR(same.rho, 1.0, 1e-12);
  EXPECT_TRUE(same.descent_verified);
  const CorrelationResult opposite = CorrelationDiagnostic(lc, neg, f.g.features(), w, 0.0);
  EXPECT_NEAR(opposite.rho, -1.0, 1e-12);
  EXPECT_FALSE(opposite.descent_verified);
}

TEST(CorrelationDiagnosticTest, ZeroGradientIsNumericalError) {
  const GraphObjective flat = [](const Matrix& x, std::span<const double> w, Matrix* d_x,
                                 std::vector<double>* d_w) {
    if (d_x != nullptr) *d_x = Matrix::Zero(x.rows(), x.cols());
    if (d_w != nullptr) *d_w = std::vector<double>(w.size(), 0.0);
    return 0.0;
  };
  EXPECT_THROW(CorrelationDiagnostic(flat, flat, Matrix::Ones(2, 2), std::vector<double>{1.0}, 0.0),
               NumericalError);
}

}  // namespace
}  // namespace gtrans
