#include "gtrans/corruption.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <random>
#include <sstream>

#include "gtrans/errors.h"
#include "gtrans/graph_io.h"
#include "gtrans/normalize.h"
#include "gtrans/random.h"
#include "gtrans/transform.h"

namespace gtrans {

std::string_view CorruptionKindName(CorruptionKind kind) {
  return kind == CorruptionKind::kAbnormalFeatures ? "abnormal_features" : "structure_attack";
}

CorruptionResult InjectAbnormalFeatures(const Graph& g, double noise_ratio, std::uint64_t seed) {
  if (!(noise_ratio >= 0.0 && noise_ratio <= 1.0)) throw DomainError("noise_ratio must be in [0, 1]");
  std::vector<NodeId> test = g.Nodes(Split::kTest);
  if (test.empty()) throw DomainError("abnormal features: empty test mask");

  const auto count = static_cast<std::size_t>(std::floor(noise_ratio * static_cast<double>(test.size())));
  Rng rng(SubSeed(seed, "abnormal-nodes"));
  std::shuffle(test.begin(), test.end(), rng);
  std::vector<NodeId> chosen(test.begin(), test.begin() + static_cast<std::ptrdiff_t>(count));
  std::sort(chosen.begin(), chosen.end());

  CorruptionResult out;
  out.record.kind = CorruptionKind::kAbnormalFeatures;
  out.record.rate = noise_ratio;
  out.record.seed = seed;
  out.record.nodes = chosen;
  out.record.replacement_rows.resize(static_cast<Eigen::Index>(count), g.feature_dim());
  Rng feature_rng(SubSeed(seed, "abnormal-features"));
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (Eigen::Index r = 0; r < out.record.replacement_rows.rows(); ++r) {
    for (Eigen::Index j = 0; j < g.feature_dim(); ++j) {
      out.record.replacement_rows(r, j) = gauss(feature_rng);
    }
  }
  out.graph = ApplyCorruption(g, out.record);
  return out;
}

namespace {

// Current relaxed perturbation: flip probability per node pair.
using Block = std::map<Edge, double>;

double TestCrossEntropy(const GcnModel& model, const Graph& g, std::span<const double> weights,
                        std::span<const NodeId> test, std::vector<double>* d_weights) {
  const NormalizedAdjacency adj = NormalizeAdjacency(g, weights);
  const ForwardTrace trace = Forward(model, adj, g.features());
  Matrix d_logits;
  const double loss =
      MaskedCrossEntropy(trace.logits, g.labels(), test, d_weights ? &d_logits : nullptr);
  if (d_weights != nullptr) *d_weights = Backward(model, trace, d_logits).d_edge_weights;
  return loss;
}

}  // namespace

CorruptionResult AttackStructure(const GcnModel& model, const Graph& g, const AttackConfig& cfg) {
  if (!(cfg.ptb_rate > 0.0 && cfg.ptb_rate <= 0.5)) throw DomainError("ptb_rate must be in (0, 0.5]");
  if (!g.has_labels()) throw DomainError("attack needs labels");
  const auto budget = static_cast<std::size_t>(std::floor(cfg.ptb_rate * static_cast<double>(g.num_edges())));
  if (budget == 0) throw DomainError("attack budget is zero");
  if (cfg.steps < 0 || cfg.trials < 1) throw DomainError("attack needs steps >= 0 and trials >= 1");
  const std::vector<NodeId> test = g.Nodes(Split::kTest);
  if (test.empty()) throw DomainError("attack: empty test mask");
  const NodeId n = g.num_nodes();
  if (n < 2) throw DomainError("attack: graph too small");

  CorruptionResult out;
  out.record.kind = CorruptionKind::kStructureAttack;
  out.record.rate = cfg.ptb_rate;
  out.record.seed = cfg.seed;
  out.record.budget = budget;
  if (cfg.steps == 0) {
    out.graph = g;
    return out;
  }

  const std::size_t block_size = cfg.block_size > 0 ? static_cast<std::size_t>(cfg.block_size) : 4 * budget;
  const double max_pairs = 0.5 * static_cast<double>(n) * static_cast<double>(n - 1);
  const std::size_t target = static_cast<std::size_t>(std::min<double>(static_cast<double>(block_size), max_pairs));

  Rng rng(SubSeed(cfg.seed, "attack-block"));
  std::uniform_int_distribution<NodeId> pick(0, n - 1);
  Block block;

  // Graph over clean edges plus the non-edges currently in the block; returns
  // the per-edge weights and each block entry's edge index.
  auto build = [&](Graph& aug, std::vector<double>& weights, std::vector<EdgeId>& index,
                   std::vector<bool>& existing) {
    EdgeList edges = g.edges();
    for (const auto& [pair, _] : block) {
      if (g.FindEdge(pair.u, pair.v) < 0) edges.push_back(pair);
    }
    aug = g.WithEdges(std::move(edges));
    weights.assign(aug.num_edges(), 1.0);
    for (const Edge& e : aug.edges()) {
      if (g.FindEdge(e.u, e.v) < 0) weights[aug.FindEdge(e.u, e.v)] = 0.0;
    }
    index.clear();
    existing.clear();
    for (const auto& [pair, p] : block) {
      const EdgeId id = aug.FindEdge(pair.u, pair.v);
      const bool is_edge = g.FindEdge(pair.u, pair.v) >= 0;
      weights[id] = is_edge ? 1.0 - p : p;
      index.push_back(id);
      existing.push_back(is_edge);
    }
  };

  for (int step = 0; step < cfg.steps; ++step) {
    // Resample: keep entries carrying mass, refill with uniform pairs.
    for (auto it = block.begin(); it != block.end();) {
      it = it->second > 1e-3 ? std::next(it) : block.erase(it);
    }
    std::size_t guard = 0;
    while (block.size() < target && guard++ < 20 * target + 100) {
      const NodeId u = pick(rng);
      const NodeId v = pick(rng);
      if (u == v) continue;
      block.emplace(MakeEdge(u, v), 0.0);
    }

    Graph aug;
    std::vector<double> weights;
    std::vector<EdgeId> index;
    std::vector<bool> existing;
    build(aug, weights, index, existing);
    std::vector<double> d_weights;
    TestCrossEntropy(model, aug, weights, test, &d_weights);

    std::vector<double> grad(index.size());
    double scale = 0.0;
    for (std::size_t k = 0; k < index.size(); ++k) {
      grad[k] = existing[k] ? -d_weights[index[k]] : d_weights[index[k]];
      scale = std::max(scale, std::abs(grad[k]));
    }
    if (scale == 0.0) continue;
    const double lr = cfg.step_size / std::sqrt(static_cast<double>(step + 1));
    std::vector<double> moved(index.size());
    std::size_t k = 0;
    for (auto& [pair, p] : block) {
      moved[k] = p + lr * grad[k] / scale;
      ++k;
    }
    const auto projected = ProjectBudget(moved, static_cast<double>(budget));
    k = 0;
    for (auto& [pair, p] : block) p = projected[k++];
  }

  // Discretize: worst of K samples, trimmed to the budget by flip probability.
  std::vector<std::pair<Edge, double>> entries(block.begin(), block.end());
  double worst = -std::numeric_limits<double>::infinity();
  EdgeList best_injected, best_deleted;
  Graph best_graph = g;
  for (int trial = 0; trial < cfg.trials; ++trial) {
    Rng trial_rng(SubSeed(cfg.seed, "attack-sample", static_cast<std::uint64_t>(trial)));
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::vector<std::pair<double, Edge>> flips;
    for (const auto& [pair, p] : entries) {
      if (unif(trial_rng) < p) flips.emplace_back(p, pair);
    }
    if (flips.size() > budget) {
      std::stable_sort(flips.begin(), flips.end(),
                       [](const auto& a, const auto& b) { return a.first > b.first; });
      flips.resize(budget);
    }
    EdgeList injected, deleted;
    for (const auto& [p, pair] : flips) {
      (g.FindEdge(pair.u, pair.v) >= 0 ? deleted : injected).push_back(pair);
    }
    std::sort(injected.begin(), injected.end());
    std::sort(deleted.begin(), deleted.end());
    EdgeList edges = EdgeDifference(g.edges(), deleted);
    edges.insert(edges.end(), injected.begin(), injected.end());
    Graph candidate = g.WithEdges(std::move(edges));
    const std::vector<double> ones(candidate.num_edges(), 1.0);
    const double loss = TestCrossEntropy(model, candidate, ones, test, nullptr);
    if (loss > worst) {
      worst = loss;
      best_injected = std::move(injected);
      best_deleted = std::move(deleted);
      best_graph = std::move(candidate);
    }
  }
  out.record.injected = std::move(best_injected);
  out.record.deleted = std::move(best_deleted);
  out.graph = std::move(best_graph);
  return out;
}

RemovalFractions AdversarialEdgeRemovalFraction(const Graph& clean, const Graph& attacked,
                                                const Graph& defended) {
  if (clean.num_nodes() != attacked.num_nodes() || clean.num_nodes() != defended.num_nodes()) {
    throw DomainError("removal fraction: node counts differ");
  }
  const EdgeList adversarial = EdgeDifference(attacked.edges(), clean.edges());
  if (adversarial.empty()) throw UndefinedStatisticError("no adversarial edges");
  const EdgeList surviving_clean = EdgeIntersection(clean.edges(), attacked.edges());
  const EdgeList removed = EdgeDifference(attacked.edges(), defended.edges());

  RemovalFractions r;
  r.adversarial_removed = static_cast<double>(EdgeIntersection(adversarial, removed).size()) /
                          static_cast<double>(adversarial.size());
  if (!surviving_clean.empty()) {
    r.clean_removed = static_cast<double>(EdgeIntersection(surviving_clean, removed).size()) /
                      static_cast<double>(surviving_clean.size());
  }
  return r;
}

std::string SerializeCorruptionRecord(const CorruptionRecord& record) {
  std::string out;
  out += "kind=" + std::string(CorruptionKindName(record.kind)) + "\n";
  out += "rate=" + FormatReal(record.rate) + "\n";
  out += "seed=" + std::to_string(record.seed) + "\n";
  out += "budget=" + std::to_string(record.budget) + "\n";
  out += "[nodes]\n";
  for (std::size_t r = 0; r < record.nodes.size(); ++r) {
    out += std::to_string(record.nodes[r]);
    for (Eigen::Index j = 0; j < record.replacement_rows.cols(); ++j) {
      out += "," + FormatReal(record.replacement_rows(static_cast<Eigen::Index>(r), j));
    }
    out += "\n";
  }
  out += "[injected]\n";
  for (const Edge& e : record.injected) out += std::to_string(e.u) + "\t" + std::to_string(e.v) + "\n";
  out += "[deleted]\n";
  for (const Edge& e : record.deleted) out += std::to_string(e.u) + "\t" + std::to_string(e.v) + "\n";
  return out;
}

CorruptionRecord ParseCorruptionRecord(const std::string& text) {
  CorruptionRecord record;
  std::istringstream in(text);
  std::string line, section;
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line.front() == '[') {
      section = line;
      continue;
    }
    if (section.empty()) {
      const auto eq = line.find('=');
      if (eq == std::string::npos) throw MalformedInputError("corruption record: bad header '" + line + "'");
      const std::string key = line.substr(0, eq), value = line.substr(eq + 1);
      if (key == "kind") {
        if (value == "abnormal_features") record.kind = CorruptionKind::kAbnormalFeatures;
        else if (value == "structure_attack") record.kind = CorruptionKind::kStructureAttack;
        else throw MalformedInputError("corruption record: unknown kind '" + value + "'");
      } else if (key == "rate") {
        record.rate = ParseReal(value);
      } else if (key == "seed") {
        record.seed = std::stoull(value);
      } else if (key == "budget") {
        record.budget = std::stoull(value);
      }
    } else if (section == "[nodes]") {
      std::vector<double> row;
      std::size_t start = 0;
      const auto comma = line.find(',');
      record.nodes.push_back(std::stoll(line.substr(0, comma)));
      start = comma == std::string::npos ? line.size() : comma + 1;
      while (start < line.size()) {
        const auto next = line.find(',', start);
        row.push_back(ParseReal(std::string_view(line).substr(start, next == std::string::npos ? std::string::npos : next - start)));
        start = next == std::string::npos ? line.size() : next + 1;
      }
      rows.push_back(std::move(row));
    } else {
      const auto tab = line.find_first_of(" \t");
      if (tab == std::string::npos) throw MalformedInputError("corruption record: bad edge '" + line + "'");
      const Edge e = MakeEdge(std::stoll(line.substr(0, tab)), std::stoll(line.substr(tab + 1)));
      (section == "[injected]" ? record.injected : record.deleted).push_back(e);
    }
  }
  const Eigen::Index d = rows.empty() ? 0 : static_cast<Eigen::Index>(rows.front().size());
  record.replacement_rows.resize(static_cast<Eigen::Index>(rows.size()), d);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (static_cast<Eigen::Index>(rows[r].size()) != d) throw DimensionError("corruption record: ragged rows");
    for (Eigen::Index j = 0; j < d; ++j) record.replacement_rows(static_cast<Eigen::Index>(r), j) = rows[r][j];
  }
  return record;
}

Graph ApplyCorruption(const Graph& clean, const CorruptionRecord& record) {
  if (record.kind == CorruptionKind::kAbnormalFeatures) {
    if (record.nodes.empty()) return clean;
    if (record.replacement_rows.rows() != static_cast<Eigen::Index>(record.nodes.size()) ||
        record.replacement_rows.cols() != clean.feature_dim()) {
      throw DimensionError("corruption record rows do not match the graph");
    }
    Matrix x = clean.features();
    for (std::size_t r = 0; r < record.nodes.size(); ++r) {
      const NodeId i = record.nodes[r];
      if (i < 0 || i >= clean.num_nodes()) throw DomainError("corruption record node out of range");
      x.row(i) = record.replacement_rows.row(static_cast<Eigen::Index>(r));
    }
    return clean.WithFeatures(std::move(x));
  }
  EdgeList deleted = record.deleted;
  std::sort(deleted.begin(), deleted.end());
  EdgeList edges = EdgeDifference(clean.edges(), deleted);
  edges.insert(edges.end(), record.injected.begin(), record.injected.end());
  return clean.WithEdges(std::move(edges));
}

}  // namespace gtrans
