#include "gtrans/transform.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <string>

#include "gtrans/errors.h"
#include "gtrans/graph_io.h"
#include "gtrans/random.h"

namespace gtrans {

// ---------------------------------------------------------------------------
// DeltaState

DeltaState DeltaState::Zero(const Graph& g, double budget) {
  DeltaState d;
  d.delta_x = Matrix::Zero(g.num_nodes(), g.feature_dim());
  d.candidates.resize(g.num_edges());
  std::iota(d.candidates.begin(), d.candidates.end(), EdgeId{0});
  d.delta_a.assign(g.num_edges(), 0.0);
  d.budget = budget;
  return d;
}

void DeltaState::Validate(const Graph& g) const {
  if (delta_x.rows() != g.num_nodes() || delta_x.cols() != g.feature_dim()) {
    throw DimensionError("delta_x shape does not match the graph features");
  }
  if (delta_a.size() != candidates.size()) {
    throw DimensionError("delta_a and candidate list differ in length");
  }
  for (EdgeId e : candidates) {
    if (e < 0 || static_cast<std::size_t>(e) >= g.num_edges()) {
      throw ConsistencyError("candidate " + std::to_string(e) + " is not an edge of the graph");
    }
  }
  for (double a : delta_a) {
    if (!(a >= 0.0 && a <= 1.0)) throw DomainError("delta_a entry outside [0, 1]");
  }
  if (!candidates.empty() && !(budget > 0.0)) throw DomainError("budget must be positive");
}

double DeltaState::FlipMass() const {
  return std::accumulate(delta_a.begin(), delta_a.end(), 0.0);
}

std::vector<double> RelaxedEdgeWeights(const Graph& g, const DeltaState& delta) {
  // Existing edge (A_e = 1): A ⊕ δ = 2 - (1 + δ) = 1 - δ.
  std::vector<double> w(g.num_edges(), 1.0);
  for (std::size_t c = 0; c < delta.candidates.size(); ++c) {
    w[delta.candidates[c]] = 1.0 - delta.delta_a[c];
  }
  return w;
}

// ---------------------------------------------------------------------------
// TransformConfig

void TransformConfig::Validate() const {
  if (tau1 < 0 || tau2 < 0 || tau1 + tau2 < 1) throw DomainError("need tau1, tau2 >= 0 and tau1 + tau2 >= 1");
  if (epochs < 1) throw DomainError("epochs (T) must be >= 1");
  if (samples < 1) throw DomainError("samples (K) must be >= 1");
  if (!(budget_fraction > 0.0)) throw DomainError("budget_fraction must be positive");
  if (!(eta1 >= 0.0) || !(eta2 >= 0.0)) throw DomainError("step sizes must be >= 0");
  MakeSurrogate(SurrogateTag::kContrastive).Validate();
}

SurrogateKind TransformConfig::MakeSurrogate(SurrogateTag tag) const {
  SurrogateKind kind;
  kind.tag = tag;
  kind.drop_ratio = drop_ratio;
  kind.lambda = lambda;
  return kind;
}

TransformConfig TransformConfig::FromConfig(const KeyValueConfig& kv) {
  return FromConfig(kv, TransformConfig{});
}

TransformConfig TransformConfig::FromConfig(const KeyValueConfig& kv, TransformConfig d) {
  d.eta1 = kv.GetReal("eta1", d.eta1);
  d.eta2 = kv.GetReal("eta2", d.eta2);
  d.tau1 = static_cast<int>(kv.GetInt("tau1", d.tau1));
  d.tau2 = static_cast<int>(kv.GetInt("tau2", d.tau2));
  d.epochs = static_cast<int>(kv.GetInt("epochs", d.epochs));
  d.samples = static_cast<int>(kv.GetInt("samples", d.samples));
  d.budget_fraction = kv.GetReal("budget_fraction", d.budget_fraction);
  d.drop_ratio = kv.GetReal("drop_ratio", d.drop_ratio);
  d.lambda = kv.GetReal("lambda", d.lambda);
  d.include_train_loss = kv.GetBool("include_train_loss", d.include_train_loss);
  d.seed = kv.GetSeed("seed", d.seed);
  try {
    d.Validate();
  } catch (const DomainError& e) {
    throw ConfigError(std::string("transform config: ") + e.what());
  }
  return d;
}

void TransformConfig::WriteTo(KeyValueConfig& kv) const {
  kv.SetReal("eta1", eta1);
  kv.SetReal("eta2", eta2);
  kv.SetInt("tau1", tau1);
  kv.SetInt("tau2", tau2);
  kv.SetInt("epochs", epochs);
  kv.SetInt("samples", samples);
  kv.SetReal("budget_fraction", budget_fraction);
  kv.SetReal("drop_ratio", drop_ratio);
  kv.SetReal("lambda", lambda);
  kv.SetBool("include_train_loss", include_train_loss);
  kv.Set("seed", std::to_string(seed));
}

// ---------------------------------------------------------------------------
// Budget projection

std::vector<double> ProjectBudget(std::span<const double> p, double budget) {
  if (!(budget > 0.0)) throw DomainError("projection budget must be positive");
  std::vector<double> out(p.size());
  double clamped_sum = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (!std::isfinite(p[i])) throw DomainError("projection input is not finite");
    out[i] = std::clamp(p[i], 0.0, 1.0);
    clamped_sum += out[i];
  }
  if (clamped_sum <= budget) return out;

  // f(gamma) = sum clamp(p - gamma, 0, 1) is continuous and non-increasing,
  // with f(min - 1) = n > B and f(max) = 0 < B. Bisect, and after each halving
  // drop entries whose clamp value is fixed on the whole bracket: they either
  // sit at 1 (p - hi >= 1) or at 0 (p - lo <= 0). Once no breakpoint remains
  // inside the bracket f is linear there and the root is solved directly.
  double lo = *std::min_element(p.begin(), p.end()) - 1.0;
  double hi = *std::max_element(p.begin(), p.end());
  std::vector<double> active(p.begin(), p.end());
  double saturated = 0.0;  // entries fixed at 1

  constexpr double kTolerance = 1e-9;
  constexpr int kMaxIterations = 200;
  double gamma = 0.5 * (lo + hi);
  bool solved = false;
  for (int iter = 0; iter < kMaxIterations; ++iter) {
    // Breakpoints of the active entries inside (lo, hi)?
    bool linear = true;
    double sum_active = 0.0;
    for (double v : active) {
      if ((v > lo && v < hi) || (v - 1.0 > lo && v - 1.0 < hi)) {
        linear = false;
        break;
      }
      sum_active += v;
    }
    if (linear) {
      // Every remaining entry satisfies 0 < p - gamma < 1 on the bracket.
      if (active.empty()) {
        gamma = 0.5 * (lo + hi);
      } else {
        gamma = (saturated + sum_active - budget) / static_cast<double>(active.size());
        gamma = std::clamp(gamma, lo, hi);
      }
      solved = true;
      break;
    }

    gamma = 0.5 * (lo + hi);
    double f = saturated;
    for (double v : active) f += std::clamp(v - gamma, 0.0, 1.0);
    if (std::abs(f - budget) <= kTolerance) {
      solved = true;
      break;
    }
    if (f > budget) {
      lo = gamma;
    } else {
      hi = gamma;
    }
    std::size_t keep = 0;
    for (double v : active) {
      if (v - hi >= 1.0) {
        saturated += 1.0;
      } else if (v - lo > 0.0) {
        active[keep++] = v;
      }
    }
    active.resize(keep);
  }
  if (!solved) throw NumericalError("budget projection: bisection did not converge");

  for (std::size_t i = 0; i < p.size(); ++i) out[i] = std::clamp(p[i] - gamma, 0.0, 1.0);
  return out;
}

// ---------------------------------------------------------------------------
// Optimizer steps

void StructureStep(DeltaState& delta, std::span<const double> grad, double eta2, AdamState& adam) {
  if (grad.size() != delta.delta_a.size()) {
    throw DimensionError("structure step: gradient length does not match the candidates");
  }
  for (std::size_t c = 0; c < grad.size(); ++c) {
    if (!std::isfinite(grad[c])) {
      throw NumericalError("structure step: non-finite gradient on candidate edge " +
                           std::to_string(delta.candidates[c]));
    }
  }
  if (adam.size() != grad.size()) adam = AdamState(grad.size());
  std::vector<double> dir(grad.size());
  adam.Direction(grad, dir);
  std::vector<double> moved(grad.size());
  for (std::size_t c = 0; c < grad.size(); ++c) moved[c] = delta.delta_a[c] - eta2 * dir[c];
  if (moved.empty()) return;
  delta.delta_a = ProjectBudget(moved, delta.budget);
}

void FeatureStep(DeltaState& delta, const Matrix& grad, double eta1, AdamState& adam) {
  if (grad.rows() != delta.delta_x.rows() || grad.cols() != delta.delta_x.cols()) {
    throw DimensionError("feature step: gradient shape does not match delta_x");
  }
  if (!grad.allFinite()) throw NumericalError("feature step: non-finite gradient");
  const auto n = static_cast<std::size_t>(grad.size());
  if (adam.size() != n) adam = AdamState(n);
  adam.Step({delta.delta_x.data(), n}, {grad.data(), n}, eta1);
}

// ---------------------------------------------------------------------------
// Discretization

DiscreteSample SampleDiscrete(const Graph& g, const DeltaState& delta, int samples,
                              const DiscreteLoss& eval_loss, std::uint64_t seed) {
  if (samples < 1) throw DomainError("need at least one Bernoulli sample");
  delta.Validate(g);
  DiscreteSample best;
  double best_loss = std::numeric_limits<double>::infinity();
  std::vector<bool> best_keep;
  for (int k = 0; k < samples; ++k) {
    Rng rng(SubSeed(seed, "bernoulli", static_cast<std::uint64_t>(k)));
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::vector<bool> keep(g.num_edges(), true);
    for (std::size_t c = 0; c < delta.candidates.size(); ++c) {
      // Draw for every candidate so trials stay aligned across delta values.
      const double u = unif(rng);
      if (u < delta.delta_a[c]) keep[delta.candidates[c]] = false;
    }
    std::vector<double> weights(g.num_edges());
    for (std::size_t e = 0; e < weights.size(); ++e) weights[e] = keep[e] ? 1.0 : 0.0;
    const double loss = eval_loss(weights);
    best.losses.push_back(loss);
    if (loss < best_loss || best_keep.empty()) {
      best_loss = loss;
      best.chosen = k;
      best_keep = keep;
    }
  }
  best.keep = best_keep;
  best.graph = g.WithEdgeSubset(best_keep).WithFeatures(g.features() + delta.delta_x);
  return best;
}

// ---------------------------------------------------------------------------
// Gradient correlation diagnostic

namespace {

double Dot(const Matrix& a, std::span<const double> wa, const Matrix& b, std::span<const double> wb) {
  double s = a.cwiseProduct(b).sum();
  for (std::size_t e = 0; e < wa.size(); ++e) s += wa[e] * wb[e];
  return s;
}

}  // namespace

CorrelationResult CorrelationDiagnostic(const GraphObjective& classification,
                                        const GraphObjective& surrogate, const Matrix& x,
                                        std::span<const double> weights, double epsilon) {
  Matrix gc_x, gs_x;
  std::vector<double> gc_w, gs_w;
  CorrelationResult r;
  r.loss_before = classification(x, weights, &gc_x, &gc_w);
  surrogate(x, weights, &gs_x, &gs_w);
  const double nc = std::sqrt(Dot(gc_x, gc_w, gc_x, gc_w));
  const double ns = std::sqrt(Dot(gs_x, gs_w, gs_x, gs_w));
  if (!(nc > 0.0) || !(ns > 0.0)) {
    throw NumericalError("degenerate diagnostic: zero-norm gradient");
  }
  r.rho = Dot(gc_x, gc_w, gs_x, gs_w) / (nc * ns);
  r.epsilon = epsilon > 0.0 ? epsilon : 1e-4 * nc / ns;
  const Matrix x_step = x - r.epsilon * gs_x;
  std::vector<double> w_step(weights.begin(), weights.end());
  for (std::size_t e = 0; e < w_step.size(); ++e) {
    w_step[e] = std::max(0.0, w_step[e] - r.epsilon * gs_w[e]);
  }
  r.loss_after = classification(x_step, w_step, nullptr, nullptr);
  r.descent_verified = r.loss_after < r.loss_before;
  return r;
}

GraphObjective ClassificationObjective(const GcnModel& model, const Graph& g,
                                       std::vector<NodeId> nodes) {
  return [&model, &g, nodes = std::move(nodes)](const Matrix& x, std::span<const double> w,
                                                 Matrix* d_x, std::vector<double>* d_w) {
    const NormalizedAdjacency adj = NormalizeAdjacency(g, w);
    const ForwardTrace trace = Forward(model, adj, x);
    const bool want = d_x != nullptr || d_w != nullptr;
    Matrix d_logits;
    const double loss = MaskedCrossEntropy(trace.logits, g.labels(), nodes, want ? &d_logits : nullptr);
    if (want) {
      GradBundle b = Backward(model, trace, d_logits);
      if (d_x != nullptr) *d_x = std::move(b.d_features);
      if (d_w != nullptr) *d_w = std::move(b.d_edge_weights);
    }
    return loss;
  };
}

GraphObjective SurrogateObjective(const GcnModel& model, const Graph& g, SurrogateKind kind,
                                  bool include_train_loss, std::uint64_t seed) {
  return [&model, &g, kind, include_train_loss, seed](const Matrix& x, std::span<const double> w,
                                                      Matrix* d_x, std::vector<double>* d_w) {
    return EvaluateObjective(kind, model, g, x, w, include_train_loss, seed, d_x, d_w).total;
  };
}

CorrelationResult CorrelationDiagnostic(const GcnModel& model, const Graph& g,
                                        std::span<const NodeId> diagnostic_nodes,
                                        const SurrogateKind& kind, bool include_train_loss,
                                        double epsilon, std::uint64_t seed) {
  if (diagnostic_nodes.empty()) throw DomainError("diagnostic needs labeled nodes");
  if (!g.has_labels()) throw DomainError("diagnostic needs labels");
  const std::vector<double> weights(g.num_edges(), 1.0);
  return CorrelationDiagnostic(
      ClassificationObjective(model, g, {diagnostic_nodes.begin(), diagnostic_nodes.end()}),
      SurrogateObjective(model, g, kind, include_train_loss, seed), g.features(), weights,
      epsilon);
}

// ---------------------------------------------------------------------------
// Adaptation loop

AdaptResult GtransAdapt(const GcnModel& model, const Graph& g, const SurrogateKind& kind,
                        const TransformConfig& cfg, const AdaptOptions& options) {
  const auto start = std::chrono::steady_clock::now();
  cfg.Validate();
  kind.Validate();
  model.Validate();

  AdaptResult result;
  AdaptReport& report = result.report;
  report.budget = cfg.budget_fraction * static_cast<double>(g.num_edges());
  DeltaState delta = DeltaState::Zero(g, report.budget);
  AdamState adam_x, adam_a;

  const GraphObjective diag_classification =
      options.diagnostic_nodes.empty() ? GraphObjective()
                                       : ClassificationObjective(model, g, options.diagnostic_nodes);

  const int cycle = cfg.tau1 + cfg.tau2;
  for (int t = 0; t < cfg.epochs; ++t) {
    const std::uint64_t epoch_seed = SubSeed(cfg.seed, "augment", static_cast<std::uint64_t>(t));
    const SurrogateEvaluation eval =
        SurrogateValueAndGrad(kind, model, g, delta, cfg.include_train_loss, epoch_seed);
    report.loss.push_back(eval.value.total);
    report.surrogate.push_back(eval.value.surrogate);

    if (diag_classification) {
      Matrix gc_x;
      std::vector<double> gc_w;
      const Matrix x = g.features() + delta.delta_x;
      diag_classification(x, RelaxedEdgeWeights(g, delta), &gc_x, &gc_w);
      // Gradients w.r.t. delta_a are the negated weight gradients; the
      // correlation is computed on (ΔX, ΔA) directly.
      double dot = gc_x.cwiseProduct(eval.grad.d_delta_x).sum();
      double nc = gc_x.squaredNorm();
      double ns = eval.grad.d_delta_x.squaredNorm();
      for (std::size_t c = 0; c < delta.candidates.size(); ++c) {
        const double gc = -gc_w[delta.candidates[c]];
        const double gs = eval.grad.d_delta_a[c];
        dot += gc * gs;
        nc += gc * gc;
        ns += gs * gs;
      }
      report.rho.push_back(nc > 0.0 && ns > 0.0 ? dot / std::sqrt(nc * ns) : 0.0);
    }

    if (t % cycle < cfg.tau1) {
      FeatureStep(delta, eval.grad.d_delta_x, cfg.eta1, adam_x);
      report.step.push_back('x');
    } else {
      StructureStep(delta, eval.grad.d_delta_a, cfg.eta2, adam_a);
      report.step.push_back('a');
    }
    report.flip_mass.push_back(delta.FlipMass());
  }

  {
    const Matrix x = g.features() + delta.delta_x;
    const auto weights = RelaxedEdgeWeights(g, delta);
    report.final_loss = EvaluateObjective(kind, model, g, x, weights, cfg.include_train_loss,
                                          SubSeed(cfg.seed, "augment", 0))
                            .total;
    report.loss_increased = report.final_loss > report.loss.front();
  }

  const Matrix final_x = g.features() + delta.delta_x;
  const std::uint64_t eval_seed = SubSeed(cfg.seed, "sample-eval");
  const DiscreteLoss eval_loss = [&](std::span<const double> weights) {
    return EvaluateObjective(kind, model, g, final_x, weights, cfg.include_train_loss, eval_seed)
        .total;
  };
  DiscreteSample sample = SampleDiscrete(g, delta, cfg.samples, eval_loss, SubSeed(cfg.seed, "sample"));
  report.chosen_sample = sample.chosen;
  report.sample_losses = sample.losses;
  for (std::size_t e = 0; e < g.num_edges(); ++e) {
    if (!sample.keep[e]) report.flipped_edges.push_back(g.edges()[e]);
  }
  if (g.has_labels() && g.num_edges() > 0 && sample.graph.num_edges() > 0) {
    report.stats_before = ComputeGraphStats(g);
    report.stats_after = ComputeGraphStats(sample.graph, &g);
  }
  result.graph = std::move(sample.graph);
  result.delta = std::move(delta);
  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

// ---------------------------------------------------------------------------
// Report text

namespace {

void AppendStats(std::string& out, const char* prefix, const GraphStats& s) {
  out += std::string(prefix) + "homophily=" + FormatReal(s.homophily) + "\n";
  out += std::string(prefix) + "pairwise_feature_similarity=" +
         FormatReal(s.pairwise_feature_similarity) + "\n";
  out += std::string(prefix) + "num_edges=" + std::to_string(s.num_edges) + "\n";
  out += std::string(prefix) + "edges_added=" + std::to_string(s.edges_added) + "\n";
  out += std::string(prefix) + "edges_removed=" + std::to_string(s.edges_removed) + "\n";
}

}  // namespace

std::string SerializeReportHeader(const AdaptReport& report) {
  std::string out;
  out += "epochs=" + std::to_string(report.loss.size()) + "\n";
  out += "initial_loss=" + FormatReal(report.loss.empty() ? 0.0 : report.loss.front()) + "\n";
  out += "final_loss=" + FormatReal(report.final_loss) + "\n";
  out += "loss_increased=" + std::string(report.loss_increased ? "true" : "false") + "\n";
  out += "budget=" + FormatReal(report.budget) + "\n";
  out += "samples=" + std::to_string(report.sample_losses.size()) + "\n";
  out += "chosen_sample=" + std::to_string(report.chosen_sample) + "\n";
  out += "chosen_sample_loss=" +
         FormatReal(report.sample_losses.empty() ? 0.0 : report.sample_losses[report.chosen_sample]) +
         "\n";
  std::string losses;
  for (std::size_t k = 0; k < report.sample_losses.size(); ++k) {
    if (k > 0) losses += ",";
    losses += FormatReal(report.sample_losses[k]);
  }
  out += "sample_losses=" + losses + "\n";
  out += "flipped_edges=" + std::to_string(report.flipped_edges.size()) + "\n";
  if (report.stats_before) AppendStats(out, "before.", *report.stats_before);
  if (report.stats_after) AppendStats(out, "after.", *report.stats_after);
  return out;
}

std::string SerializeTrajectory(const AdaptReport& report) {
  std::string out = "epoch,step,loss,surrogate,flip_mass,rho\n";
  for (std::size_t t = 0; t < report.loss.size(); ++t) {
    out += std::to_string(t) + "," + report.step[t] + "," + FormatReal(report.loss[t]) + "," +
           FormatReal(report.surrogate[t]) + "," + FormatReal(report.flip_mass[t]) + "," +
           (t < report.rho.size() ? FormatReal(report.rho[t]) : std::string()) + "\n";
  }
  return out;
}

std::string SerializeEdgeList(const EdgeList& edges) {
  std::string out;
  for (const Edge& e : edges) out += std::to_string(e.u) + "\t" + std::to_string(e.v) + "\n";
  return out;
}

void WriteAdaptReport(const AdaptReport& report, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  WriteTextFile(dir / "adapt_report.txt", SerializeReportHeader(report));
  WriteTextFile(dir / "trajectory.csv", SerializeTrajectory(report));
  WriteTextFile(dir / "flipped_edges.tsv", SerializeEdgeList(report.flipped_edges));
}

}  // namespace gtrans
