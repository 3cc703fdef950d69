#include "gtrans/normalize.h"

#include <cmath>
#include <string>

#include "gtrans/errors.h"

namespace gtrans {

NormalizedAdjacency NormalizeAdjacency(const Graph& g,
                                       std::optional<std::span<const double>> edge_weights) {
  const std::size_t m = g.num_edges();
  NormalizedAdjacency adj;
  adj.csr_ = g.shared_csr();
  if (edge_weights) {
    if (edge_weights->size() != m) {
      throw DimensionError("edge weight vector has " + std::to_string(edge_weights->size()) +
                           " entries, graph has " + std::to_string(m) + " edges");
    }
    adj.edge_weights_.assign(edge_weights->begin(), edge_weights->end());
    for (std::size_t e = 0; e < m; ++e) {
      const double w = adj.edge_weights_[e];
      if (!std::isfinite(w) || w < 0.0) {
        throw DomainError("edge weight " + std::to_string(w) + " on edge " + std::to_string(e) +
                          " is negative or non-finite");
      }
    }
  } else {
    adj.edge_weights_.assign(m, 1.0);
  }

  const Csr& csr = *adj.csr_;
  const NodeId n = g.num_nodes();
  adj.degrees_.assign(static_cast<std::size_t>(n), 1.0);
  for (NodeId i = 0; i < n; ++i) {
    for (EdgeId k = csr.offsets[i]; k < csr.offsets[i + 1]; ++k) {
      adj.degrees_[i] += adj.edge_weights_[csr.edge_ids[k]];
    }
  }
  std::vector<double> inv_sqrt(static_cast<std::size_t>(n));
  adj.self_values_.resize(static_cast<std::size_t>(n));
  for (NodeId i = 0; i < n; ++i) {
    inv_sqrt[i] = 1.0 / std::sqrt(adj.degrees_[i]);
    adj.self_values_[i] = 1.0 / adj.degrees_[i];
  }
  adj.values_.resize(csr.num_entries());
  for (NodeId i = 0; i < n; ++i) {
    for (EdgeId k = csr.offsets[i]; k < csr.offsets[i + 1]; ++k) {
      adj.values_[k] = adj.edge_weights_[csr.edge_ids[k]] * inv_sqrt[i] * inv_sqrt[csr.columns[k]];
    }
  }
  return adj;
}

Matrix NormalizedAdjacency::Propagate(const Matrix& in) const {
  if (in.rows() != num_nodes()) {
    throw DimensionError("propagate: input has " + std::to_string(in.rows()) + " rows, expected " +
                         std::to_string(num_nodes()));
  }
  const Csr& csr = *csr_;
  Matrix out(in.rows(), in.cols());
  for (NodeId i = 0; i < num_nodes(); ++i) {
    auto row = out.row(i);
    row = self_values_[i] * in.row(i);
    for (EdgeId k = csr.offsets[i]; k < csr.offsets[i + 1]; ++k) {
      row += values_[k] * in.row(csr.columns[k]);
    }
  }
  return out;
}

double NormalizedAdjacency::Entry(NodeId i, NodeId j) const {
  if (i == j) return self_values_.at(i);
  const Csr& csr = *csr_;
  for (EdgeId k = csr.offsets.at(i); k < csr.offsets.at(i + 1); ++k) {
    if (csr.columns[k] == j) return values_[k];
  }
  return 0.0;
}

AdjacencyGradient::AdjacencyGradient(const NormalizedAdjacency& adj)
    : adj_(&adj),
      entry_grad_(adj.values().size(), 0.0),
      self_grad_(static_cast<std::size_t>(adj.num_nodes()), 0.0) {}

void AdjacencyGradient::Accumulate(const Matrix& d_out, const Matrix& in) {
  if (d_out.rows() != adj_->num_nodes() || in.rows() != adj_->num_nodes() ||
      d_out.cols() != in.cols()) {
    throw DimensionError("adjacency gradient: shape mismatch");
  }
  const Csr& csr = adj_->csr();
  for (NodeId i = 0; i < adj_->num_nodes(); ++i) {
    self_grad_[i] += d_out.row(i).dot(in.row(i));
    for (EdgeId k = csr.offsets[i]; k < csr.offsets[i + 1]; ++k) {
      entry_grad_[k] += d_out.row(i).dot(in.row(csr.columns[k]));
    }
  }
}

std::vector<double> AdjacencyGradient::EdgeWeightGradient() const {
  // Â_ij = w_ij / sqrt(d_i d_j), Â_ii = 1 / d_i, d_i = 1 + sum_j w_ij.
  //   dL/dd_i = -1/(2 d_i) * sum_j (g_ij + g_ji) Â_ij - g_ii / d_i^2
  //   dL/dw_e = (g_uv + g_vu) / sqrt(d_u d_v) + dL/dd_u + dL/dd_v
  const Csr& csr = adj_->csr();
  const auto& degrees = adj_->degrees();
  const auto& values = adj_->values();
  const NodeId n = adj_->num_nodes();

  std::vector<double> d_degree(static_cast<std::size_t>(n), 0.0);
  std::vector<double> direct(adj_->num_edges(), 0.0);
  for (NodeId i = 0; i < n; ++i) {
    d_degree[i] -= self_grad_[i] / (degrees[i] * degrees[i]);
    for (EdgeId k = csr.offsets[i]; k < csr.offsets[i + 1]; ++k) {
      const NodeId j = csr.columns[k];
      const double term = -0.5 * entry_grad_[k] * values[k];
      // g_ij scales with both d_i and d_j.
      d_degree[i] += term / degrees[i];
      d_degree[j] += term / degrees[j];
      direct[csr.edge_ids[k]] += entry_grad_[k] / std::sqrt(degrees[i] * degrees[j]);
    }
  }

  std::vector<double> grad(adj_->num_edges(), 0.0);
  for (NodeId i = 0; i < n; ++i) {
    for (EdgeId k = csr.offsets[i]; k < csr.offsets[i + 1]; ++k) {
      const NodeId j = csr.columns[k];
      if (i < j) grad[csr.edge_ids[k]] = direct[csr.edge_ids[k]] + d_degree[i] + d_degree[j];
    }
  }
  return grad;
}

}  // namespace gtrans
