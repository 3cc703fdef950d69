#pragma once

#include <cstddef>

#include "gtrans/graph.h"

namespace gtrans {

// Interpretation statistics for a (possibly modified) graph.
struct GraphStats {
  double homophily = 0.0;
  double pairwise_feature_similarity = 0.0;
  std::size_t num_edges = 0;
  // Relative to a reference graph; zero when none was given.
  std::size_t edges_added = 0;
  std::size_t edges_removed = 0;
};

// Fraction of edges whose endpoints share a label.
double EdgeHomophily(const Graph& g);

// Mean cosine similarity of endpoint features over all edges. A zero feature
// vector has cosine 0 with anything.
double PairwiseFeatureSimilarity(const Graph& g);

GraphStats ComputeGraphStats(const Graph& g, const Graph* reference = nullptr);

}  // namespace gtrans
