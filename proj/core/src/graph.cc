#include "gtrans/graph.h"

#include <algorithm>
#include <iterator>
#include <string>

#include "gtrans/errors.h"

namespace gtrans {

std::shared_ptr<const Csr> BuildCsr(NodeId num_nodes, const EdgeList& edges) {
  auto csr = std::make_shared<Csr>();
  csr->offsets.assign(static_cast<std::size_t>(num_nodes) + 1, 0);
  for (const Edge& e : edges) {
    ++csr->offsets[e.u + 1];
    ++csr->offsets[e.v + 1];
  }
  for (NodeId i = 0; i < num_nodes; ++i) csr->offsets[i + 1] += csr->offsets[i];

  csr->columns.resize(2 * edges.size());
  csr->edge_ids.resize(2 * edges.size());
  std::vector<EdgeId> cursor(csr->offsets.begin(), csr->offsets.end() - 1);
  // Edges are sorted by (u, v), so visiting them in order fills every row with
  // ascending columns: row v receives u's in increasing u, and row u receives
  // v's after all smaller-u entries.
  for (EdgeId id = 0; id < static_cast<EdgeId>(edges.size()); ++id) {
    const Edge& e = edges[id];
    csr->columns[cursor[e.u]] = e.v;
    csr->edge_ids[cursor[e.u]++] = id;
    csr->columns[cursor[e.v]] = e.u;
    csr->edge_ids[cursor[e.v]++] = id;
  }
  for (NodeId i = 0; i < num_nodes; ++i) {
    const auto begin = csr->offsets[i];
    const auto end = csr->offsets[i + 1];
    if (!std::is_sorted(csr->columns.begin() + begin, csr->columns.begin() + end)) {
      std::vector<std::pair<NodeId, EdgeId>> row;
      for (auto k = begin; k < end; ++k) row.emplace_back(csr->columns[k], csr->edge_ids[k]);
      std::sort(row.begin(), row.end());
      for (auto k = begin; k < end; ++k) {
        csr->columns[k] = row[k - begin].first;
        csr->edge_ids[k] = row[k - begin].second;
      }
    }
  }
  return csr;
}

Graph Graph::Create(NodeId num_nodes, EdgeList edges, Matrix features, std::vector<int> labels,
                    int num_classes, std::vector<Split> splits, GraphBuildInfo* info) {
  if (num_nodes < 0) throw DomainError("negative node count");
  if (features.rows() != num_nodes) {
    throw DimensionError("feature matrix has " + std::to_string(features.rows()) +
                         " rows, expected " + std::to_string(num_nodes));
  }
  if (!features.allFinite()) throw DomainError("non-finite node features");

  GraphBuildInfo local;
  EdgeList canonical;
  canonical.reserve(edges.size());
  for (const Edge& e : edges) {
    if (e.u < 0 || e.v < 0 || e.u >= num_nodes || e.v >= num_nodes) {
      throw DomainError("edge (" + std::to_string(e.u) + ", " + std::to_string(e.v) +
                        ") out of range for " + std::to_string(num_nodes) + " nodes");
    }
    if (e.u == e.v) {
      ++local.self_loops_dropped;
      continue;
    }
    canonical.push_back(MakeEdge(e.u, e.v));
  }
  std::sort(canonical.begin(), canonical.end());
  const auto unique_end = std::unique(canonical.begin(), canonical.end());
  local.duplicates_merged = static_cast<std::size_t>(std::distance(unique_end, canonical.end()));
  canonical.erase(unique_end, canonical.end());

  if (!labels.empty()) {
    if (static_cast<NodeId>(labels.size()) != num_nodes) {
      throw DimensionError("label vector has " + std::to_string(labels.size()) +
                           " entries, expected " + std::to_string(num_nodes));
    }
    int max_label = -1;
    for (int y : labels) {
      if (y < 0) throw DomainError("negative class label");
      max_label = std::max(max_label, y);
    }
    if (num_classes <= 0) num_classes = max_label + 1;
    if (max_label >= num_classes) {
      throw DomainError("label " + std::to_string(max_label) + " outside [0, " +
                        std::to_string(num_classes) + ")");
    }
  }
  if (splits.empty()) splits.assign(static_cast<std::size_t>(num_nodes), Split::kNone);
  if (static_cast<NodeId>(splits.size()) != num_nodes) {
    throw DimensionError("split vector length does not match node count");
  }

  Graph g;
  g.num_nodes_ = num_nodes;
  g.num_classes_ = labels.empty() ? std::max(num_classes, 0) : num_classes;
  g.edges_ = std::move(canonical);
  g.csr_ = BuildCsr(num_nodes, g.edges_);
  g.features_ = std::move(features);
  g.labels_ = std::move(labels);
  g.splits_ = std::move(splits);
  if (info != nullptr) *info = local;
  return g;
}

std::vector<NodeId> Graph::Nodes(Split split) const {
  std::vector<NodeId> out;
  for (NodeId i = 0; i < num_nodes_; ++i) {
    if (splits_[i] == split) out.push_back(i);
  }
  return out;
}

EdgeId Graph::FindEdge(NodeId u, NodeId v) const {
  const Edge key = MakeEdge(u, v);
  const auto it = std::lower_bound(edges_.begin(), edges_.end(), key);
  if (it == edges_.end() || *it != key) return -1;
  return static_cast<EdgeId>(std::distance(edges_.begin(), it));
}

Graph Graph::WithFeatures(Matrix features) const {
  if (features.rows() != num_nodes_) throw DimensionError("feature row count mismatch");
  if (!features.allFinite()) throw DomainError("non-finite node features");
  Graph g = *this;
  g.features_ = std::move(features);
  return g;
}

Graph Graph::WithEdges(EdgeList edges) const {
  return Create(num_nodes_, std::move(edges), features_, labels_, num_classes_, splits_);
}

Graph Graph::WithEdgeSubset(const std::vector<bool>& keep) const {
  if (keep.size() != edges_.size()) throw DimensionError("edge mask length mismatch");
  Graph g = *this;
  g.edges_.clear();
  for (std::size_t e = 0; e < edges_.size(); ++e) {
    if (keep[e]) g.edges_.push_back(edges_[e]);
  }
  g.csr_ = BuildCsr(num_nodes_, g.edges_);
  return g;
}

bool operator==(const Graph& a, const Graph& b) {
  return a.num_nodes_ == b.num_nodes_ && a.num_classes_ == b.num_classes_ &&
         a.edges_ == b.edges_ && a.features_.rows() == b.features_.rows() &&
         a.features_.cols() == b.features_.cols() && a.features_ == b.features_ &&
         a.labels_ == b.labels_ && a.splits_ == b.splits_;
}

EdgeList EdgeDifference(const EdgeList& a, const EdgeList& b) {
  EdgeList out;
  std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

EdgeList EdgeIntersection(const EdgeList& a, const EdgeList& b) {
  EdgeList out;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

}  // namespace gtrans
