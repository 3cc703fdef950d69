#pragma once

#include <cstdint>

#include "gtrans/graph.h"

namespace gtrans {

struct SbmParams {
  int blocks = 2;
  int nodes_per_block = 100;
  double p_in = 0.5;
  double p_out = 0.05;
  int feature_dim = 8;
  // Euclidean distance between any two block means.
  double feature_shift = 1.0;
  std::uint64_t seed = 0;
};

// Stochastic block model with Gaussian node features. Node i belongs to block
// i / nodes_per_block; block b's features are N(mu_b, I) where
// mu_b = feature_shift / sqrt(2) * e_b. Each block is split 60/20/20 into
// train/val/test. Deterministic in the seed.
Graph GenerateSbm(const SbmParams& params);

}  // namespace gtrans
