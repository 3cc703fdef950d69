#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include "gtrans/types.h"

namespace gtrans {

// Compressed sparse rows over both directions of every undirected edge.
// Columns inside a row are sorted; edge_ids maps a directed entry back to
// its undirected edge index.
struct Csr {
  std::vector<EdgeId> offsets;
  std::vector<NodeId> columns;
  std::vector<EdgeId> edge_ids;

  std::size_t num_entries() const { return columns.size(); }
};

// Counters describing how raw input was canonicalized.
struct GraphBuildInfo {
  std::size_t self_loops_dropped = 0;
  std::size_t duplicates_merged = 0;
};

// Simple undirected graph with dense node features, labels and node splits.
// Immutable after construction; the With* methods return modified copies.
class Graph {
 public:
  Graph() = default;

  // Canonicalizes the edge list (u < v, sorted, deduplicated, self-loops
  // dropped) and validates every other field. `labels` may be empty for an
  // unlabeled graph; `splits` may be empty (all nodes kNone).
  static Graph Create(NodeId num_nodes, EdgeList edges, Matrix features, std::vector<int> labels,
                      int num_classes, std::vector<Split> splits, GraphBuildInfo* info = nullptr);

  NodeId num_nodes() const { return num_nodes_; }
  std::size_t num_edges() const { return edges_.size(); }
  Eigen::Index feature_dim() const { return features_.cols(); }
  int num_classes() const { return num_classes_; }
  bool has_labels() const { return !labels_.empty(); }

  const EdgeList& edges() const { return edges_; }
  const Csr& csr() const { return *csr_; }
  const std::shared_ptr<const Csr>& shared_csr() const { return csr_; }
  const Matrix& features() const { return features_; }
  const std::vector<int>& labels() const { return labels_; }
  const std::vector<Split>& splits() const { return splits_; }

  std::vector<NodeId> Nodes(Split split) const;

  // Index of edge {u, v} in edges(), or -1.
  EdgeId FindEdge(NodeId u, NodeId v) const;

  Graph WithFeatures(Matrix features) const;
  Graph WithEdges(EdgeList edges) const;
  // Keeps edge e iff keep[e].
  Graph WithEdgeSubset(const std::vector<bool>& keep) const;

  friend bool operator==(const Graph& a, const Graph& b);

 private:
  NodeId num_nodes_ = 0;
  int num_classes_ = 0;
  EdgeList edges_;
  std::shared_ptr<const Csr> csr_ = std::make_shared<Csr>();
  Matrix features_;
  std::vector<int> labels_;
  std::vector<Split> splits_;
};

// Canonical form of an edge: u < v.
inline Edge MakeEdge(NodeId a, NodeId b) { return a < b ? Edge{a, b} : Edge{b, a}; }

std::shared_ptr<const Csr> BuildCsr(NodeId num_nodes, const EdgeList& edges);

// Set differences over canonical, sorted edge lists.
EdgeList EdgeDifference(const EdgeList& a, const EdgeList& b);
EdgeList EdgeIntersection(const EdgeList& a, const EdgeList& b);

}  // namespace gtrans
