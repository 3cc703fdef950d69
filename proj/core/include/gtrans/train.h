#pragma once

#include <cstdint>
#include <vector>

#include "gtrans/gnn.h"
#include "gtrans/graph.h"

namespace gtrans {

struct TrainConfig {
  int epochs = 200;
  double lr = 0.01;
  double weight_decay = 5e-4;
  std::uint64_t seed = 0;
};

struct TrainResult {
  GcnModel model;
  std::vector<double> loss;
  std::vector<double> train_accuracy;
  std::vector<double> val_accuracy;  // empty when the graph has no val nodes
};

// Full-batch Adam on masked cross entropy over the train split (weight decay
// added to the gradient). Dropout is active during training only.
// Throws OptimizationError naming the epoch if the loss stops being finite.
TrainResult Train(GcnModel model, const Graph& g, const TrainConfig& config);

}  // namespace gtrans
