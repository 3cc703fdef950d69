#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "gtrans/delta.h"
#include "gtrans/gnn.h"
#include "gtrans/graph.h"

namespace gtrans {

enum class SurrogateTag { kContrastive, kEntropy, kReconstruction };

std::string_view SurrogateTagName(SurrogateTag tag);
SurrogateTag ParseSurrogateTag(std::string_view name);

struct SurrogateKind {
  SurrogateTag tag = SurrogateTag::kContrastive;
  double drop_ratio = 0.5;  // DropEdge ratio of the positive view
  double lambda = 1.0;      // weight of the surrogate in the total loss
  // Keep only the positive (alignment) term of the contrastive loss.
  bool positive_term_only = false;

  void Validate() const;
};

// Keep mask over `num_edges` edges, each retained with probability
// 1 - drop_ratio.
std::vector<bool> DropEdgeMask(std::size_t num_edges, double drop_ratio, std::uint64_t seed);
EdgeList DropEdge(const EdgeList& edges, double drop_ratio, std::uint64_t seed);

struct ShuffledRows {
  Matrix rows;                        // rows(i) = source(permutation[i])
  std::vector<NodeId> permutation;
};

// Uniformly random row permutation (DGI-style corruption). Needs N >= 2.
ShuffledRows ShuffleNegatives(const Matrix& x, std::uint64_t seed);

// sum_i (1 - cos(a_i, b_i)) and its gradients. Zero-norm rows raise
// NumericalError.
struct AlignmentResult {
  double loss = 0.0;
  Matrix d_a;
  Matrix d_b;
};
AlignmentResult CosineAlignment(const Matrix& a, const Matrix& b);

// L = sum_i (1 - cos(ẑ_i, z_i)) - sum_i (1 - cos(z̃_i, z_i)).
struct ContrastiveResult {
  double loss = 0.0;
  Matrix d_anchor;    // dL/dZ
  Matrix d_positive;  // dL/dẐ
  Matrix d_negative;  // dL/dZ̃
};
ContrastiveResult ContrastiveLoss(const Matrix& anchor, const Matrix& positive,
                                  const Matrix& negative);

// Mean prediction entropy over `mask`.
struct LogitLossResult {
  double loss = 0.0;
  Matrix d_logits;
};
LogitLossResult EntropyLoss(const Matrix& logits, std::span<const NodeId> mask);

// `count` distinct node pairs that are not edges of g, drawn uniformly.
// Throws SamplingError if the graph is too dense to find them.
EdgeList SampleNonEdges(const Graph& g, std::size_t count, std::uint64_t seed);

// Mean binary cross entropy of sigmoid(z_u . z_v): `positives` labeled 1,
// `negatives` labeled 0.
struct HiddenLossResult {
  double loss = 0.0;
  Matrix d_hidden;
};
HiddenLossResult ReconstructionLoss(const Matrix& z, const EdgeList& positives,
                                    const EdgeList& negatives);

// Gradient of an objective with respect to the transformation variables.
struct DeltaGrad {
  Matrix d_delta_x;
  std::vector<double> d_delta_a;  // one per candidate
};

struct ObjectiveValue {
  double total = 0.0;       // [train CE] + lambda * surrogate
  double surrogate = 0.0;
  double train_loss = 0.0;  // 0 unless requested
};

// Objective on an explicit weighted graph: features `x`, one weight per edge
// of g. When `d_x`/`d_weights` are non-null the gradients are written there.
// All augmentation randomness derives from `seed`.
ObjectiveValue EvaluateObjective(const SurrogateKind& kind, const GcnModel& model, const Graph& g,
                                 const Matrix& x, std::span<const double> edge_weights,
                                 bool include_train_loss, std::uint64_t seed,
                                 Matrix* d_x = nullptr, std::vector<double>* d_weights = nullptr);

struct SurrogateEvaluation {
  ObjectiveValue value;
  DeltaGrad grad;
};

// Evaluates the objective on the relaxed transformed graph (A ⊕ ΔA, X + ΔX)
// and chains the gradients back to ΔX and the candidate ΔA entries.
SurrogateEvaluation SurrogateValueAndGrad(const SurrogateKind& kind, const GcnModel& model,
                                          const Graph& g, const DeltaState& delta,
                                          bool include_train_loss, std::uint64_t seed);

}  // namespace gtrans
