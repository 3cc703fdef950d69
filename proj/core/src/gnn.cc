#include "gtrans/gnn.h"

#include <cmath>
#include <random>
#include <string>

#include "gtrans/errors.h"
#include "gtrans/random.h"

namespace gtrans {

std::string_view ModelKindName(ModelKind kind) {
  return kind == ModelKind::kGcn2 ? "gcn2" : "sgc2";
}

ModelKind ParseModelKind(std::string_view name) {
  if (name == "gcn2" || name == "gcn") return ModelKind::kGcn2;
  if (name == "sgc2" || name == "sgc") return ModelKind::kSgc2;
  throw DomainError("unknown model kind '" + std::string(name) + "'");
}

GcnModel GcnModel::Init(ModelKind kind, Eigen::Index input_dim, Eigen::Index hidden_dim,
                        Eigen::Index num_classes, std::uint64_t seed) {
  if (input_dim < 1 || hidden_dim < 1 || num_classes < 1) {
    throw DimensionError("model dimensions must be positive");
  }
  Rng rng(SubSeed(seed, "model-init"));
  auto glorot = [&rng](Eigen::Index rows, Eigen::Index cols) {
    const double limit = std::sqrt(6.0 / static_cast<double>(rows + cols));
    std::uniform_real_distribution<double> unif(-limit, limit);
    Matrix m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
      for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = unif(rng);
    }
    return m;
  };
  GcnModel model;
  model.kind = kind;
  model.w1 = glorot(input_dim, hidden_dim);
  model.b1 = Vector::Zero(hidden_dim);
  model.w2 = glorot(hidden_dim, num_classes);
  model.b2 = Vector::Zero(num_classes);
  return model;
}

void GcnModel::Validate() const {
  if (w1.cols() != b1.size() || w1.cols() != w2.rows() || w2.cols() != b2.size()) {
    throw DimensionError("model weights have inconsistent shapes");
  }
  if (!w1.allFinite() || !b1.allFinite() || !w2.allFinite() || !b2.allFinite()) {
    throw DomainError("model weights are not finite");
  }
}

ForwardTrace Forward(const GcnModel& model, const NormalizedAdjacency& adj, const Matrix& x,
                     std::optional<std::uint64_t> dropout_seed) {
  if (x.rows() != adj.num_nodes()) {
    throw DimensionError("forward: " + std::to_string(x.rows()) + " feature rows for " +
                         std::to_string(adj.num_nodes()) + " nodes");
  }
  if (x.cols() != model.input_dim()) {
    throw DimensionError("forward: feature dim " + std::to_string(x.cols()) +
                         " does not match model input dim " + std::to_string(model.input_dim()));
  }
  if (!x.allFinite()) throw DomainError("forward: non-finite node features");

  ForwardTrace t;
  t.kind = model.kind;
  t.adj = adj;
  t.input = x;
  t.xw = x * model.w1;
  t.propagated = adj.Propagate(t.xw);
  if (model.kind == ModelKind::kGcn2) {
    t.pre_hidden = t.propagated.rowwise() + model.b1.transpose();
    t.hidden = t.pre_hidden.cwiseMax(0.0);
  } else {
    t.pre_hidden = adj.Propagate(t.propagated);
    t.hidden = t.pre_hidden;
  }
  if (dropout_seed && model.dropout_rate > 0.0) {
    Rng rng(*dropout_seed);
    std::bernoulli_distribution keep(1.0 - model.dropout_rate);
    const double scale = 1.0 / (1.0 - model.dropout_rate);
    t.dropout_mask.resize(t.hidden.rows(), t.hidden.cols());
    for (Eigen::Index i = 0; i < t.hidden.rows(); ++i) {
      for (Eigen::Index j = 0; j < t.hidden.cols(); ++j) {
        t.dropout_mask(i, j) = keep(rng) ? scale : 0.0;
      }
    }
    t.hidden = t.hidden.cwiseProduct(t.dropout_mask);
  }
  t.zw = t.hidden * model.w2;
  if (model.kind == ModelKind::kGcn2) {
    t.logits = adj.Propagate(t.zw);
  } else {
    t.logits = t.zw;
  }
  t.logits.rowwise() += model.b2.transpose();
  return t;
}

GradBundle Backward(const GcnModel& model, const ForwardTrace& trace, const Matrix& d_logits,
                    const Matrix* d_hidden, std::optional<std::span<const EdgeId>> candidates) {
  if (trace.kind != model.kind || trace.input.cols() != model.input_dim() ||
      trace.hidden.cols() != model.hidden_dim() || trace.logits.cols() != model.num_classes()) {
    throw ConsistencyError("backward: trace was not produced by this model");
  }
  if (d_logits.rows() != trace.logits.rows() || d_logits.cols() != trace.logits.cols()) {
    throw DimensionError("backward: upstream logit gradient has the wrong shape");
  }
  if (d_hidden != nullptr &&
      (d_hidden->rows() != trace.hidden.rows() || d_hidden->cols() != trace.hidden.cols())) {
    throw DimensionError("backward: upstream hidden gradient has the wrong shape");
  }

  const NormalizedAdjacency& adj = trace.adj;
  AdjacencyGradient adj_grad(adj);
  GradBundle g;
  g.d_b2 = d_logits.colwise().sum().transpose();

  Matrix d_zw;
  if (model.kind == ModelKind::kGcn2) {
    adj_grad.Accumulate(d_logits, trace.zw);
    d_zw = adj.Propagate(d_logits);
  } else {
    d_zw = d_logits;
  }
  g.d_w2 = trace.hidden.transpose() * d_zw;
  Matrix d_z = d_zw * model.w2.transpose();
  if (d_hidden != nullptr) d_z += *d_hidden;
  if (trace.dropout_mask.size() > 0) d_z = d_z.cwiseProduct(trace.dropout_mask);

  Matrix d_propagated;
  if (model.kind == ModelKind::kGcn2) {
    Matrix d_pre = (trace.pre_hidden.array() > 0.0).select(d_z, 0.0);
    g.d_b1 = d_pre.colwise().sum().transpose();
    d_propagated = std::move(d_pre);
  } else {
    g.d_b1 = Vector::Zero(model.hidden_dim());
    adj_grad.Accumulate(d_z, trace.propagated);
    d_propagated = adj.Propagate(d_z);
  }
  adj_grad.Accumulate(d_propagated, trace.xw);
  const Matrix d_xw = adj.Propagate(d_propagated);
  g.d_w1 = trace.input.transpose() * d_xw;
  g.d_features = d_xw * model.w1.transpose();

  std::vector<double> all = adj_grad.EdgeWeightGradient();
  if (candidates) {
    g.d_edge_weights.reserve(candidates->size());
    for (EdgeId e : *candidates) {
      if (e < 0 || static_cast<std::size_t>(e) >= all.size()) {
        throw ConsistencyError("backward: candidate edge " + std::to_string(e) +
                               " is not an edge of the traced adjacency");
      }
      g.d_edge_weights.push_back(all[e]);
    }
  } else {
    g.d_edge_weights = std::move(all);
  }
  return g;
}

Matrix Softmax(const Matrix& logits) {
  Matrix p(logits.rows(), logits.cols());
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    const double mx = logits.row(i).maxCoeff();
    p.row(i) = (logits.row(i).array() - mx).exp().matrix();
    p.row(i) /= p.row(i).sum();
  }
  return p;
}

double MaskedCrossEntropy(const Matrix& logits, std::span<const int> labels,
                          std::span<const NodeId> mask, Matrix* d_logits) {
  if (mask.empty()) throw DomainError("cross entropy over an empty mask");
  if (static_cast<Eigen::Index>(labels.size()) != logits.rows()) {
    throw DimensionError("cross entropy: label count does not match logit rows");
  }
  if (d_logits != nullptr) d_logits->setZero(logits.rows(), logits.cols());
  const double inv = 1.0 / static_cast<double>(mask.size());
  double total = 0.0;
  for (NodeId i : mask) {
    const auto row = logits.row(i);
    const double mx = row.maxCoeff();
    const double lse = mx + std::log((row.array() - mx).exp().sum());
    total += lse - row(labels[i]);
    if (d_logits != nullptr) {
      d_logits->row(i) = (row.array() - lse).exp().matrix() * inv;
      (*d_logits)(i, labels[i]) -= inv;
    }
  }
  return total * inv;
}

std::vector<int> Predict(const Matrix& logits) {
  std::vector<int> out(static_cast<std::size_t>(logits.rows()));
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    Eigen::Index arg = 0;
    logits.row(i).maxCoeff(&arg);
    out[i] = static_cast<int>(arg);
  }
  return out;
}

double Accuracy(const Matrix& logits, std::span<const int> labels, std::span<const NodeId> mask) {
  if (mask.empty()) throw DomainError("accuracy over an empty mask");
  std::size_t correct = 0;
  for (NodeId i : mask) {
    Eigen::Index arg = 0;
    logits.row(i).maxCoeff(&arg);
    if (static_cast<int>(arg) == labels[i]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(mask.size());
}

}  // namespace gtrans
