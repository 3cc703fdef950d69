#pragma once

#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "gtrans/graph.h"

namespace gtrans {

// D^{-1/2} (A + I) D^{-1/2} over the graph's sparsity pattern plus the
// diagonal. With relaxed edge weights w_e the degrees become
// d_i = 1 + sum_j w_ij; the self-loop weight is always 1.
class NormalizedAdjacency {
 public:
  NormalizedAdjacency() = default;

  const Csr& csr() const { return *csr_; }
  NodeId num_nodes() const { return static_cast<NodeId>(self_values_.size()); }
  std::size_t num_edges() const { return edge_weights_.size(); }

  // Off-diagonal value per directed CSR entry.
  const std::vector<double>& values() const { return values_; }
  // Diagonal value 1/d_i per node.
  const std::vector<double>& self_values() const { return self_values_; }
  const std::vector<double>& degrees() const { return degrees_; }
  // Relaxed weight per undirected edge (1 when unweighted).
  const std::vector<double>& edge_weights() const { return edge_weights_; }

  // out = Â · in, accumulated row by row in CSR order.
  Matrix Propagate(const Matrix& in) const;

  double Entry(NodeId i, NodeId j) const;

 private:
  friend NormalizedAdjacency NormalizeAdjacency(const Graph&, std::optional<std::span<const double>>);

  std::shared_ptr<const Csr> csr_ = std::make_shared<Csr>();
  std::vector<double> values_;
  std::vector<double> self_values_;
  std::vector<double> degrees_;
  std::vector<double> edge_weights_;
};

// `edge_weights`, when given, holds one weight per undirected edge of g (the
// same weight serves both directed entries, so symmetry holds by
// construction). Negative or non-finite weights raise DomainError.
NormalizedAdjacency NormalizeAdjacency(const Graph& g,
                                       std::optional<std::span<const double>> edge_weights = {});

// Reverse-mode accumulator for every use of Â in a computation. Each
// Y = Â·H contributes dL/dÂ_ij += <dY_i, H_j>; EdgeWeightGradient() then
// chains through both the weighted entries and the relaxed degrees.
class AdjacencyGradient {
 public:
  explicit AdjacencyGradient(const NormalizedAdjacency& adj);

  void Accumulate(const Matrix& d_out, const Matrix& in);

  // dL/dw_e for every undirected edge.
  std::vector<double> EdgeWeightGradient() const;

 private:
  const NormalizedAdjacency* adj_;
  std::vector<double> entry_grad_;
  std::vector<double> self_grad_;
};

}  // namespace gtrans
