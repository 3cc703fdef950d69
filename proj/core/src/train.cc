#include "gtrans/train.h"

#include <cmath>
#include <span>
#include <string>

#include "gtrans/adam.h"
#include "gtrans/errors.h"
#include "gtrans/normalize.h"
#include "gtrans/random.h"

namespace gtrans {
namespace {

template <typename Dense>
std::span<double> Flat(Dense& m) {
  return {m.data(), static_cast<std::size_t>(m.size())};
}

template <typename Dense>
std::span<const double> Flat(const Dense& m) {
  return {m.data(), static_cast<std::size_t>(m.size())};
}

}  // namespace

TrainResult Train(GcnModel model, const Graph& g, const TrainConfig& config) {
  model.Validate();
  if (!g.has_labels()) throw DomainError("train: graph has no labels");
  if (g.feature_dim() != model.input_dim() || g.num_classes() > model.num_classes()) {
    throw DimensionError("train: model shape does not match the dataset");
  }
  const auto train_nodes = g.Nodes(Split::kTrain);
  const auto val_nodes = g.Nodes(Split::kVal);
  if (train_nodes.empty()) throw DomainError("train: empty train mask");

  const NormalizedAdjacency adj = NormalizeAdjacency(g);
  AdamState adam_w1(model.w1.size()), adam_b1(model.b1.size());
  AdamState adam_w2(model.w2.size()), adam_b2(model.b2.size());

  TrainResult result;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    const auto trace = Forward(model, adj, g.features(), SubSeed(config.seed, "dropout", epoch));
    Matrix d_logits;
    const double loss = MaskedCrossEntropy(trace.logits, g.labels(), train_nodes, &d_logits);
    if (!std::isfinite(loss)) {
      throw OptimizationError("training diverged at epoch " + std::to_string(epoch));
    }
    GradBundle grad = Backward(model, trace, d_logits);
    // L2 penalty on the weights, as in coupled weight decay.
    grad.d_w1 += config.weight_decay * model.w1;
    grad.d_w2 += config.weight_decay * model.w2;
    adam_w1.Step(Flat(model.w1), Flat(grad.d_w1), config.lr);
    adam_b1.Step(Flat(model.b1), Flat(grad.d_b1), config.lr);
    adam_w2.Step(Flat(model.w2), Flat(grad.d_w2), config.lr);
    adam_b2.Step(Flat(model.b2), Flat(grad.d_b2), config.lr);
    if (model.kind == ModelKind::kSgc2) model.b1.setZero();

    const auto eval = Forward(model, adj, g.features());
    result.loss.push_back(loss);
    result.train_accuracy.push_back(Accuracy(eval.logits, g.labels(), train_nodes));
    if (!val_nodes.empty()) {
      result.val_accuracy.push_back(Accuracy(eval.logits, g.labels(), val_nodes));
    }
  }
  if (!model.w1.allFinite() || !model.w2.allFinite()) {
    throw OptimizationError("training produced non-finite weights");
  }
  result.model = std::move(model);
  return result;
}

}  // namespace gtrans
