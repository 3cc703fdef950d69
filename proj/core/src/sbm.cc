#include "gtrans/sbm.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "gtrans/errors.h"
#include "gtrans/random.h"

namespace gtrans {

Graph GenerateSbm(const SbmParams& params) {
  if (params.blocks < 1 || params.nodes_per_block < 1) {
    throw DomainError("sbm: need at least one block with one node");
  }
  if (!(params.p_out >= 0.0 && params.p_out < params.p_in && params.p_in <= 1.0)) {
    throw DomainError("sbm: require 0 <= p_out < p_in <= 1");
  }
  if (params.feature_dim < params.blocks) {
    throw DomainError("sbm: feature_dim must be at least the number of blocks");
  }
  if (!std::isfinite(params.feature_shift)) throw DomainError("sbm: non-finite feature_shift");

  const NodeId n = static_cast<NodeId>(params.blocks) * params.nodes_per_block;
  const auto block_of = [&](NodeId i) { return static_cast<int>(i / params.nodes_per_block); };

  EdgeList edges;
  {
    Rng rng(SubSeed(params.seed, "sbm-edges"));
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (NodeId u = 0; u < n; ++u) {
      for (NodeId v = u + 1; v < n; ++v) {
        const double p = block_of(u) == block_of(v) ? params.p_in : params.p_out;
        if (unif(rng) < p) edges.push_back({u, v});
      }
    }
  }

  Matrix features(n, params.feature_dim);
  {
    Rng rng(SubSeed(params.seed, "sbm-features"));
    std::normal_distribution<double> gauss(0.0, 1.0);
    const double offset = params.feature_shift / std::sqrt(2.0);
    for (NodeId i = 0; i < n; ++i) {
      for (int j = 0; j < params.feature_dim; ++j) features(i, j) = gauss(rng);
      features(i, block_of(i)) += offset;
    }
  }

  std::vector<int> labels(static_cast<std::size_t>(n));
  for (NodeId i = 0; i < n; ++i) labels[i] = block_of(i);

  std::vector<Split> splits(static_cast<std::size_t>(n), Split::kNone);
  {
    Rng rng(SubSeed(params.seed, "sbm-splits"));
    const int per = params.nodes_per_block;
    const int n_train = static_cast<int>(std::lround(0.6 * per));
    const int n_val = static_cast<int>(std::lround(0.2 * per));
    std::vector<NodeId> order(static_cast<std::size_t>(per));
    for (int b = 0; b < params.blocks; ++b) {
      std::iota(order.begin(), order.end(), static_cast<NodeId>(b) * per);
      std::shuffle(order.begin(), order.end(), rng);
      for (int k = 0; k < per; ++k) {
        splits[order[k]] = k < n_train ? Split::kTrain : (k < n_train + n_val ? Split::kVal : Split::kTest);
      }
    }
  }

  return Graph::Create(n, std::move(edges), std::move(features), std::move(labels), params.blocks,
                       std::move(splits));
}

}  // namespace gtrans
