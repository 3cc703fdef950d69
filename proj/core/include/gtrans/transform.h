#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gtrans/adam.h"
#include "gtrans/config.h"
#include "gtrans/delta.h"
#include "gtrans/gnn.h"
#include "gtrans/graph.h"
#include "gtrans/stats.h"
#include "gtrans/surrogate.h"

namespace gtrans {

struct TransformConfig {
  double eta1 = 1e-2;   // feature step size
  double eta2 = 0.1;    // structure step size
  int tau1 = 4;         // feature epochs per cycle
  int tau2 = 1;         // structure epochs per cycle
  int epochs = 10;      // T
  int samples = 20;     // K Bernoulli trials
  double budget_fraction = 0.05;  // B as a fraction of |E|
  double drop_ratio = 0.5;
  double lambda = 1.0;
  bool include_train_loss = false;
  std::uint64_t seed = 0;

  void Validate() const;
  SurrogateKind MakeSurrogate(SurrogateTag tag) const;

  // Keys: eta1 eta2 tau1 tau2 epochs samples budget_fraction drop_ratio
  // lambda include_train_loss seed. Missing keys keep their defaults.
  static TransformConfig FromConfig(const KeyValueConfig& kv, TransformConfig defaults);
  static TransformConfig FromConfig(const KeyValueConfig& kv);
  void WriteTo(KeyValueConfig& kv) const;
};

// Euclidean projection onto {p : 0 <= p <= 1, sum p <= B}. Clamps when that
// already satisfies the budget, otherwise returns clamp(p - gamma) with gamma
// found by bisection on [min(p) - 1, max(p)].
std::vector<double> ProjectBudget(std::span<const double> p, double budget);

// delta_a <- ProjectBudget(delta_a - eta2 * Adam(grad), B).
void StructureStep(DeltaState& delta, std::span<const double> grad, double eta2, AdamState& adam);

// delta_x <- delta_x - eta1 * Adam(grad), unconstrained.
void FeatureStep(DeltaState& delta, const Matrix& grad, double eta1, AdamState& adam);

// Loss of the frozen model on a discrete graph, given as 0/1 weights over
// the original edges.
using DiscreteLoss = std::function<double(std::span<const double> edge_weights)>;

struct DiscreteSample {
  Graph graph;              // A' with X + ΔX
  std::vector<bool> keep;   // per original edge
  int chosen = 0;
  std::vector<double> losses;
};

// Draws K graphs, deleting candidate c independently with probability
// delta_a[c], and keeps the one with the smallest loss.
DiscreteSample SampleDiscrete(const Graph& g, const DeltaState& delta, int samples,
                              const DiscreteLoss& eval_loss, std::uint64_t seed);

struct AdaptReport {
  std::vector<double> loss;       // objective on the relaxed graph, per epoch
  std::vector<double> surrogate;  // surrogate part of `loss`
  std::vector<char> step;         // 'x' feature step, 'a' structure step
  std::vector<double> flip_mass;  // sum delta_a after the epoch's step
  std::vector<double> rho;        // gradient correlation, when diagnostics are on
  double final_loss = 0.0;        // relaxed objective after the last step, epoch-0 augmentation
  bool loss_increased = false;
  double budget = 0.0;
  int chosen_sample = 0;
  std::vector<double> sample_losses;
  EdgeList flipped_edges;
  std::optional<GraphStats> stats_before;
  std::optional<GraphStats> stats_after;
  double wall_seconds = 0.0;  // not serialized
};

struct AdaptOptions {
  // Nodes whose labels feed the per-epoch correlation diagnostic. Never used
  // by the optimizer.
  std::vector<NodeId> diagnostic_nodes;
};

struct AdaptResult {
  Graph graph;
  DeltaState delta;
  AdaptReport report;
};

// Alternating projected-Adam optimization of (ΔX, ΔA) against the frozen
// model, followed by K-trial Bernoulli discretization.
AdaptResult GtransAdapt(const GcnModel& model, const Graph& g, const SurrogateKind& kind,
                        const TransformConfig& cfg, const AdaptOptions& options = {});

// A differentiable objective of (X, w): returns the value and, when the
// pointers are non-null, gradients with respect to features and edge weights.
using GraphObjective = std::function<double(const Matrix& x, std::span<const double> weights,
                                            Matrix* d_x, std::vector<double>* d_w)>;

struct CorrelationResult {
  double rho = 0.0;
  double epsilon = 0.0;
  double loss_before = 0.0;
  double loss_after = 0.0;
  bool descent_verified = false;
};

// Correlation of the two gradients over the flattened (X, w) vector and a
// single explicit step of size epsilon along -grad(surrogate). epsilon <= 0
// selects 1e-4 * |grad Lc| / |grad Ls|. Zero-norm gradients raise
// NumericalError.
CorrelationResult CorrelationDiagnostic(const GraphObjective& classification,
                                        const GraphObjective& surrogate, const Matrix& x,
                                        std::span<const double> weights, double epsilon);

// Convenience form: classification loss = cross entropy on `diagnostic_nodes`
// (their labels are only read here), surrogate = the adaptation objective.
CorrelationResult CorrelationDiagnostic(const GcnModel& model, const Graph& g,
                                        std::span<const NodeId> diagnostic_nodes,
                                        const SurrogateKind& kind, bool include_train_loss,
                                        double epsilon, std::uint64_t seed);

GraphObjective ClassificationObjective(const GcnModel& model, const Graph& g,
                                       std::vector<NodeId> nodes);
GraphObjective SurrogateObjective(const GcnModel& model, const Graph& g, SurrogateKind kind,
                                  bool include_train_loss, std::uint64_t seed);

// Text forms: key=value header, CSV trajectory, TSV edge list.
std::string SerializeReportHeader(const AdaptReport& report);
std::string SerializeTrajectory(const AdaptReport& report);
std::string SerializeEdgeList(const EdgeList& edges);
void WriteAdaptReport(const AdaptReport& report, const std::filesystem::path& dir);

}  // namespace gtrans
