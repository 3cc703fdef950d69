#include "gtrans/surrogate.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>
#include <string>

#include "gtrans/errors.h"
#include "gtrans/normalize.h"
#include "gtrans/random.h"

namespace gtrans {

std::string_view SurrogateTagName(SurrogateTag tag) {
  switch (tag) {
    case SurrogateTag::kContrastive: return "contrastive";
    case SurrogateTag::kEntropy: return "entropy";
    case SurrogateTag::kReconstruction: return "reconstruction";
  }
  return "contrastive";
}

SurrogateTag ParseSurrogateTag(std::string_view name) {
  if (name == "contrastive") return SurrogateTag::kContrastive;
  if (name == "entropy") return SurrogateTag::kEntropy;
  if (name == "reconstruction") return SurrogateTag::kReconstruction;
  throw DomainError("unknown surrogate '" + std::string(name) + "'");
}

void SurrogateKind::Validate() const {
  if (!(drop_ratio >= 0.0 && drop_ratio < 1.0)) throw DomainError("drop_ratio must be in [0, 1)");
  if (!std::isfinite(lambda) || lambda < 0.0) throw DomainError("lambda must be finite and >= 0");
}

std::vector<bool> DropEdgeMask(std::size_t num_edges, double drop_ratio, std::uint64_t seed) {
  if (!(drop_ratio >= 0.0 && drop_ratio < 1.0)) throw DomainError("drop_ratio must be in [0, 1)");
  std::vector<bool> keep(num_edges, true);
  if (drop_ratio == 0.0) return keep;
  Rng rng(seed);
  std::bernoulli_distribution retain(1.0 - drop_ratio);
  for (std::size_t e = 0; e < num_edges; ++e) keep[e] = retain(rng);
  return keep;
}

EdgeList DropEdge(const EdgeList& edges, double drop_ratio, std::uint64_t seed) {
  const auto keep = DropEdgeMask(edges.size(), drop_ratio, seed);
  EdgeList out;
  for (std::size_t e = 0; e < edges.size(); ++e) {
    if (keep[e]) out.push_back(edges[e]);
  }
  return out;
}

ShuffledRows ShuffleNegatives(const Matrix& x, std::uint64_t seed) {
  if (x.rows() < 2) throw DomainError("shuffling needs at least two rows");
  ShuffledRows out;
  out.permutation.resize(static_cast<std::size_t>(x.rows()));
  std::iota(out.permutation.begin(), out.permutation.end(), NodeId{0});
  Rng rng(seed);
  std::shuffle(out.permutation.begin(), out.permutation.end(), rng);
  out.rows.resize(x.rows(), x.cols());
  for (Eigen::Index i = 0; i < x.rows(); ++i) out.rows.row(i) = x.row(out.permutation[i]);
  return out;
}

AlignmentResult CosineAlignment(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw DimensionError("cosine alignment: shape mismatch");
  }
  AlignmentResult r;
  r.d_a.resize(a.rows(), a.cols());
  r.d_b.resize(b.rows(), b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    const double na = a.row(i).norm();
    const double nb = b.row(i).norm();
    if (na == 0.0 || nb == 0.0) {
      throw NumericalError("degenerate representation: zero-norm row " + std::to_string(i));
    }
    const double cos = a.row(i).dot(b.row(i)) / (na * nb);
    r.loss += 1.0 - cos;
    // d(1 - cos)/da = -(b / (|a||b|) - cos * a / |a|^2)
    r.d_a.row(i) = cos * a.row(i) / (na * na) - b.row(i) / (na * nb);
    r.d_b.row(i) = cos * b.row(i) / (nb * nb) - a.row(i) / (na * nb);
  }
  return r;
}

ContrastiveResult ContrastiveLoss(const Matrix& anchor, const Matrix& positive,
                                  const Matrix& negative) {
  const AlignmentResult pos = CosineAlignment(anchor, positive);
  const AlignmentResult neg = CosineAlignment(anchor, negative);
  ContrastiveResult r;
  r.loss = pos.loss - neg.loss;
  r.d_anchor = pos.d_a - neg.d_a;
  r.d_positive = pos.d_b;
  r.d_negative = -neg.d_b;
  return r;
}

LogitLossResult EntropyLoss(const Matrix& logits, std::span<const NodeId> mask) {
  if (mask.empty()) throw DomainError("entropy over an empty mask");
  LogitLossResult r;
  r.d_logits.setZero(logits.rows(), logits.cols());
  const double inv = 1.0 / static_cast<double>(mask.size());
  for (NodeId i : mask) {
    const auto row = logits.row(i);
    const double mx = row.maxCoeff();
    const Eigen::ArrayXd shifted = (row.array() - mx).transpose();
    const double lse = std::log(shifted.exp().sum());
    const Eigen::ArrayXd log_p = shifted - lse;
    const Eigen::ArrayXd p = log_p.exp();
    const double h = -(p * log_p).sum();
    r.loss += h * inv;
    // dH/dl_k = -p_k (log p_k + H)
    r.d_logits.row(i) = (-(p * (log_p + h)) * inv).matrix().transpose();
  }
  return r;
}

EdgeList SampleNonEdges(const Graph& g, std::size_t count, std::uint64_t seed) {
  const NodeId n = g.num_nodes();
  const double total_pairs = 0.5 * static_cast<double>(n) * static_cast<double>(n - 1);
  if (static_cast<double>(count) > total_pairs - static_cast<double>(g.num_edges())) {
    throw SamplingError("graph too dense: cannot sample " + std::to_string(count) + " non-edges");
  }
  Rng rng(seed);
  std::uniform_int_distribution<NodeId> pick(0, n - 1);
  std::set<Edge> chosen;
  const std::size_t max_draws = 100 * count + 1000;
  std::size_t draws = 0;
  EdgeList out;
  out.reserve(count);
  while (out.size() < count) {
    if (++draws > max_draws) {
      throw SamplingError("non-edge sampling exhausted " + std::to_string(max_draws) + " draws");
    }
    const NodeId u = pick(rng);
    const NodeId v = pick(rng);
    if (u == v) continue;
    const Edge e = MakeEdge(u, v);
    if (g.FindEdge(e.u, e.v) >= 0 || !chosen.insert(e).second) continue;
    out.push_back(e);
  }
  return out;
}

HiddenLossResult ReconstructionLoss(const Matrix& z, const EdgeList& positives,
                                    const EdgeList& negatives) {
  const std::size_t pairs = positives.size() + negatives.size();
  if (pairs == 0) throw DomainError("reconstruction loss needs at least one pair");
  HiddenLossResult r;
  r.d_hidden.setZero(z.rows(), z.cols());
  const double inv = 1.0 / static_cast<double>(pairs);
  auto add = [&](const Edge& e, double target) {
    const double s = z.row(e.u).dot(z.row(e.v));
    // BCE with logits, stable form: max(s,0) - s*t + log(1 + exp(-|s|))
    r.loss += (std::max(s, 0.0) - s * target + std::log1p(std::exp(-std::abs(s)))) * inv;
    const double sig = s >= 0.0 ? 1.0 / (1.0 + std::exp(-s)) : std::exp(s) / (1.0 + std::exp(s));
    const double ds = (sig - target) * inv;
    r.d_hidden.row(e.u) += ds * z.row(e.v);
    r.d_hidden.row(e.v) += ds * z.row(e.u);
  };
  for (const Edge& e : positives) add(e, 1.0);
  for (const Edge& e : negatives) add(e, 0.0);
  return r;
}

ObjectiveValue EvaluateObjective(const SurrogateKind& kind, const GcnModel& model, const Graph& g,
                                 const Matrix& x, std::span<const double> edge_weights,
                                 bool include_train_loss, std::uint64_t seed, Matrix* d_x,
                                 std::vector<double>* d_weights) {
  kind.Validate();
  const bool want_grad = d_x != nullptr || d_weights != nullptr;
  const NormalizedAdjacency adj = NormalizeAdjacency(g, edge_weights);
  const ForwardTrace trace = Forward(model, adj, x);

  ObjectiveValue value;
  Matrix d_logits = Matrix::Zero(trace.logits.rows(), trace.logits.cols());
  if (include_train_loss) {
    const auto train_nodes = g.Nodes(Split::kTrain);
    Matrix d_ce;
    value.train_loss = MaskedCrossEntropy(trace.logits, g.labels(), train_nodes,
                                          want_grad ? &d_ce : nullptr);
    if (want_grad) d_logits += d_ce;
  }

  Matrix grad_x = Matrix::Zero(x.rows(), x.cols());
  std::vector<double> grad_w(g.num_edges(), 0.0);
  auto accumulate = [&](const GradBundle& b, const std::vector<bool>* keep) {
    grad_x += b.d_features;
    for (std::size_t e = 0; e < grad_w.size(); ++e) {
      if (keep == nullptr || (*keep)[e]) grad_w[e] += b.d_edge_weights[e];
    }
  };
  const Matrix zero_logits = Matrix::Zero(trace.logits.rows(), trace.logits.cols());

  switch (kind.tag) {
    case SurrogateTag::kContrastive: {
      const auto keep = DropEdgeMask(g.num_edges(), kind.drop_ratio, SubSeed(seed, "dropedge"));
      std::vector<double> aug_weights(edge_weights.begin(), edge_weights.end());
      for (std::size_t e = 0; e < aug_weights.size(); ++e) {
        if (!keep[e]) aug_weights[e] = 0.0;
      }
      const NormalizedAdjacency aug_adj = NormalizeAdjacency(g, aug_weights);
      const ForwardTrace aug = Forward(model, aug_adj, x);
      if (kind.positive_term_only) {
        const AlignmentResult pos = CosineAlignment(trace.hidden, aug.hidden);
        value.surrogate = pos.loss;
        if (want_grad) {
          const Matrix d_anchor = kind.lambda * pos.d_a;
          const Matrix d_pos = kind.lambda * pos.d_b;
          accumulate(Backward(model, trace, d_logits, &d_anchor), nullptr);
          accumulate(Backward(model, aug, zero_logits, &d_pos), &keep);
        }
        break;
      }
      const ShuffledRows shuffled = ShuffleNegatives(x, SubSeed(seed, "shuffle"));
      const ForwardTrace neg = Forward(model, adj, shuffled.rows);
      const ContrastiveResult c = ContrastiveLoss(trace.hidden, aug.hidden, neg.hidden);
      value.surrogate = c.loss;
      if (want_grad) {
        const Matrix d_anchor = kind.lambda * c.d_anchor;
        const Matrix d_pos = kind.lambda * c.d_positive;
        const Matrix d_neg = kind.lambda * c.d_negative;
        accumulate(Backward(model, trace, d_logits, &d_anchor), nullptr);
        accumulate(Backward(model, aug, zero_logits, &d_pos), &keep);
        GradBundle b = Backward(model, neg, zero_logits, &d_neg);
        // Row i of the shuffled input is row permutation[i] of x.
        Matrix unshuffled(b.d_features.rows(), b.d_features.cols());
        for (Eigen::Index i = 0; i < unshuffled.rows(); ++i) {
          unshuffled.row(shuffled.permutation[i]) = b.d_features.row(i);
        }
        b.d_features = std::move(unshuffled);
        accumulate(b, nullptr);
      }
      break;
    }
    case SurrogateTag::kEntropy: {
      std::vector<NodeId> all(static_cast<std::size_t>(g.num_nodes()));
      std::iota(all.begin(), all.end(), NodeId{0});
      const LogitLossResult ent = EntropyLoss(trace.logits, all);
      value.surrogate = ent.loss;
      if (want_grad) {
        d_logits += kind.lambda * ent.d_logits;
        accumulate(Backward(model, trace, d_logits), nullptr);
      }
      break;
    }
    case SurrogateTag::kReconstruction: {
      EdgeList positives;
      for (std::size_t e = 0; e < g.num_edges(); ++e) {
        if (edge_weights[e] > 0.0) positives.push_back(g.edges()[e]);
      }
      const EdgeList negatives = SampleNonEdges(g, positives.size(), SubSeed(seed, "nonedges"));
      const HiddenLossResult rec = ReconstructionLoss(trace.hidden, positives, negatives);
      value.surrogate = rec.loss;
      if (want_grad) {
        const Matrix d_hidden = kind.lambda * rec.d_hidden;
        accumulate(Backward(model, trace, d_logits, &d_hidden), nullptr);
      }
      break;
    }
  }

  value.total = value.train_loss + kind.lambda * value.surrogate;
  if (d_x != nullptr) *d_x = std::move(grad_x);
  if (d_weights != nullptr) *d_weights = std::move(grad_w);
  return value;
}

SurrogateEvaluation SurrogateValueAndGrad(const SurrogateKind& kind, const GcnModel& model,
                                          const Graph& g, const DeltaState& delta,
                                          bool include_train_loss, std::uint64_t seed) {
  delta.Validate(g);
  const Matrix x = g.features() + delta.delta_x;
  const std::vector<double> weights = RelaxedEdgeWeights(g, delta);
  SurrogateEvaluation out;
  std::vector<double> d_weights;
  out.value = EvaluateObjective(kind, model, g, x, weights, include_train_loss, seed,
                                &out.grad.d_delta_x, &d_weights);
  // w_e = 1 - delta_a[c] for candidate c on edge e.
  out.grad.d_delta_a.resize(delta.candidates.size());
  for (std::size_t c = 0; c < delta.candidates.size(); ++c) {
    out.grad.d_delta_a[c] = -d_weights[delta.candidates[c]];
  }
  return out;
}

}  // namespace gtrans
