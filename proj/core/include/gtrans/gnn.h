#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "gtrans/normalize.h"
#include "gtrans/types.h"

namespace gtrans {

enum class ModelKind {
  kGcn2,  // Z = ReLU(Â X W1 + b1), logits = Â Z W2 + b2
  kSgc2,  // Z = Â Â X W1,          logits = Z W2 + b2
};

std::string_view ModelKindName(ModelKind kind);
ModelKind ParseModelKind(std::string_view name);

// Two-layer graph model. b1 is unused by kSgc2 and stays zero there.
struct GcnModel {
  ModelKind kind = ModelKind::kGcn2;
  Matrix w1;  // d x h
  Vector b1;  // h
  Matrix w2;  // h x K
  Vector b2;  // K
  double dropout_rate = 0.5;

  Eigen::Index input_dim() const { return w1.rows(); }
  Eigen::Index hidden_dim() const { return w1.cols(); }
  Eigen::Index num_classes() const { return w2.cols(); }

  // Glorot-uniform weights, zero biases.
  static GcnModel Init(ModelKind kind, Eigen::Index input_dim, Eigen::Index hidden_dim,
                       Eigen::Index num_classes, std::uint64_t seed);

  // Throws DimensionError/DomainError if shapes disagree or values are not finite.
  void Validate() const;
};

// Intermediate values of one forward pass, kept for Backward.
struct ForwardTrace {
  ModelKind kind = ModelKind::kGcn2;
  NormalizedAdjacency adj;
  Matrix input;       // X
  Matrix xw;          // X W1
  Matrix propagated;  // Â X W1
  Matrix pre_hidden;  // gcn2: Â X W1 + b1; sgc2: Â Â X W1
  Matrix hidden;      // Z, the input of the last layer (after dropout when training)
  Matrix dropout_mask;  // empty unless training
  Matrix zw;          // Z W2
  Matrix logits;
};

// Inference mode unless `dropout_seed` is set, in which case dropout with the
// model's rate is applied to Z.
ForwardTrace Forward(const GcnModel& model, const NormalizedAdjacency& adj, const Matrix& x,
                     std::optional<std::uint64_t> dropout_seed = std::nullopt);

struct GradBundle {
  Matrix d_features;                  // N x d
  std::vector<double> d_edge_weights;  // one per candidate edge
  Matrix d_w1;
  Vector d_b1;
  Matrix d_w2;
  Vector d_b2;
};

// Reverse-mode pass for upstream gradients on the logits and, optionally,
// directly on the hidden representation Z. Edge-weight gradients include the
// degree-normalization chain. `candidates` selects edges by index into the
// adjacency's edge list; all edges when absent.
GradBundle Backward(const GcnModel& model, const ForwardTrace& trace, const Matrix& d_logits,
                    const Matrix* d_hidden = nullptr,
                    std::optional<std::span<const EdgeId>> candidates = std::nullopt);

// Row-wise softmax, max-shifted.
Matrix Softmax(const Matrix& logits);

// Mean over `mask` of -log softmax(logits)[label]. Writes dL/dlogits when
// requested (zero outside the mask).
double MaskedCrossEntropy(const Matrix& logits, std::span<const int> labels,
                          std::span<const NodeId> mask, Matrix* d_logits = nullptr);

double Accuracy(const Matrix& logits, std::span<const int> labels, std::span<const NodeId> mask);

std::vector<int> Predict(const Matrix& logits);

}  // namespace gtrans
