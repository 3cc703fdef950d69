#include "gtrans/stats.h"

#include "gtrans/errors.h"

namespace gtrans {

double EdgeHomophily(const Graph& g) {
  if (!g.has_labels()) throw DomainError("homophily requires labels");
  if (g.num_edges() == 0) throw UndefinedStatisticError("homophily of a graph with no edges");
  const auto& y = g.labels();
  std::size_t same = 0;
  for (const Edge& e : g.edges()) {
    if (y[e.u] == y[e.v]) ++same;
  }
  return static_cast<double>(same) / static_cast<double>(g.num_edges());
}

double PairwiseFeatureSimilarity(const Graph& g) {
  if (g.num_edges() == 0) {
    throw UndefinedStatisticError("feature similarity of a graph with no edges");
  }
  const Matrix& x = g.features();
  Vector norms = x.rowwise().norm();
  double total = 0.0;
  for (const Edge& e : g.edges()) {
    const double denom = norms[e.u] * norms[e.v];
    if (denom > 0.0) total += x.row(e.u).dot(x.row(e.v)) / denom;
  }
  return total / static_cast<double>(g.num_edges());
}

GraphStats ComputeGraphStats(const Graph& g, const Graph* reference) {
  GraphStats stats;
  stats.homophily = EdgeHomophily(g);
  stats.pairwise_feature_similarity = PairwiseFeatureSimilarity(g);
  stats.num_edges = g.num_edges();
  if (reference != nullptr) {
    if (reference->num_nodes() != g.num_nodes()) {
      throw DomainError("reference graph has a different node count");
    }
    stats.edges_added = EdgeDifference(g.edges(), reference->edges()).size();
    stats.edges_removed = EdgeDifference(reference->edges(), g.edges()).size();
  }
  return stats;
}

}  // namespace gtrans
