#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "gtrans/gnn.h"
#include "gtrans/graph.h"

namespace gtrans {

enum class CorruptionKind { kAbnormalFeatures, kStructureAttack };

std::string_view CorruptionKindName(CorruptionKind kind);

// Everything needed to replay a corruption on the clean graph.
struct CorruptionRecord {
  CorruptionKind kind = CorruptionKind::kAbnormalFeatures;
  double rate = 0.0;  // noise ratio or perturbation rate
  std::uint64_t seed = 0;
  std::size_t budget = 0;  // attack only
  std::vector<NodeId> nodes;  // abnormal nodes, ascending
  Matrix replacement_rows;    // one row per abnormal node
  EdgeList injected;
  EdgeList deleted;
};

struct CorruptionResult {
  Graph graph;
  CorruptionRecord record;
};

// Replaces the feature rows of floor(noise_ratio * |test|) uniformly chosen
// test nodes with standard Gaussian draws. Structure, labels, splits and all
// other rows are left untouched.
CorruptionResult InjectAbnormalFeatures(const Graph& g, double noise_ratio, std::uint64_t seed);

struct AttackConfig {
  double ptb_rate = 0.2;
  int block_size = 0;  // 0: four times the budget
  int steps = 50;
  int trials = 5;      // discrete samples; the worst for the model wins
  double step_size = 1.0;
  std::uint64_t seed = 0;
};

// Evasion attack on the structure: randomized block projected gradient ascent
// of the test cross entropy over edge flips (deletions of existing edges and
// insertions of non-edges), followed by worst-of-K discretization. At most
// floor(ptb_rate * |E|) flips. The model is not modified.
CorruptionResult AttackStructure(const GcnModel& model, const Graph& g, const AttackConfig& cfg);

struct RemovalFractions {
  double adversarial_removed = 0.0;  // share of injected edges the defense dropped
  double clean_removed = 0.0;        // share of surviving clean edges it dropped
};

// Adversarial edges are E(attacked) \ E(clean); removed edges are
// E(attacked) \ E(defended).
RemovalFractions AdversarialEdgeRemovalFraction(const Graph& clean, const Graph& attacked,
                                                const Graph& defended);

std::string SerializeCorruptionRecord(const CorruptionRecord& record);
CorruptionRecord ParseCorruptionRecord(const std::string& text);
// Re-applies a recorded corruption to the clean graph.
Graph ApplyCorruption(const Graph& clean, const CorruptionRecord& record);

}  // namespace gtrans
