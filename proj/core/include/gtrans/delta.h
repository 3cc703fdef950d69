#pragma once

#include <vector>

#include "gtrans/graph.h"

namespace gtrans {

// Free variables of a graph transformation: an additive feature
// perturbation and a relaxed deletion score in [0, 1] per candidate edge.
// Candidates index into the test graph's edge list.
struct DeltaState {
  Matrix delta_x;
  std::vector<double> delta_a;
  std::vector<EdgeId> candidates;
  double budget = 0.0;

  // All-zero state over every existing edge of g.
  static DeltaState Zero(const Graph& g, double budget);

  // Throws if shapes disagree with g or any invariant is broken.
  void Validate(const Graph& g) const;

  double FlipMass() const;
};

// Per-edge weights of A ⊕ ΔA restricted to existing edges: 1 - delta_a on
// candidates, 1 elsewhere.
std::vector<double> RelaxedEdgeWeights(const Graph& g, const DeltaState& delta);

}  // namespace gtrans
