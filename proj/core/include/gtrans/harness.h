#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "gtrans/config.h"
#include "gtrans/corruption.h"
#include "gtrans/gnn.h"
#include "gtrans/graph.h"
#include "gtrans/sbm.h"
#include "gtrans/stats.h"
#include "gtrans/surrogate.h"
#include "gtrans/train.h"
#include "gtrans/transform.h"

namespace gtrans {

enum class Scenario { kOodShift, kAbnormalFeatures, kStructureAttack };

std::string_view ScenarioName(Scenario scenario);
Scenario ParseScenario(std::string_view name);

// Adaptation defaults per scenario. Corruption scenarios use the combined
// loss (train CE + lambda * surrogate), the shift scenario the surrogate alone.
TransformConfig ScenarioTransformDefaults(Scenario scenario);

struct DatasetSource {
  bool from_files = false;
  SbmParams sbm;
  std::filesystem::path edges, features, labels, masks;
  int num_classes = 0;
};

struct ExperimentConfig {
  Scenario scenario = Scenario::kAbnormalFeatures;
  DatasetSource dataset;
  ModelKind backbone = ModelKind::kGcn2;
  int hidden = 32;
  double dropout = 0.5;
  TrainConfig train;
  TransformConfig transform;
  SurrogateTag surrogate = SurrogateTag::kContrastive;
  double noise_ratio = 0.3;  // abnormal_features
  AttackConfig attack;       // structure_attack
  // ood_shift: the test graph is a fresh SBM draw with inter-block edge
  // probability ood_p_out and every feature shifted by ood_offset / sqrt(d).
  double ood_offset = 2.0;
  double ood_p_out = 0.1;
  int repeat = 10;
  std::uint64_t seed = 0;
  std::filesystem::path out_dir;

  void Validate() const;

  // Reads the flat key=value form. Keys of another scenario (for example
  // ptb_rate under abnormal_features) are rejected. Throws ConfigError.
  static ExperimentConfig FromConfig(const KeyValueConfig& kv);
  // Complete replayable form; FromConfig(ToConfig()) reproduces this object.
  KeyValueConfig ToConfig() const;
};

// Everything a single seeded run needs before adaptation.
struct PreparedRun {
  int run_index = 0;
  std::uint64_t seed = 0;  // base seed + run index
  Graph clean;
  GcnModel model;          // trained on the clean train split
  Graph corrupted;         // the graph handed to the adaptation
  std::optional<CorruptionRecord> record;
  std::vector<NodeId> eval_nodes;      // test split
  std::vector<NodeId> abnormal_nodes;  // abnormal_features only
};

// Builds the data, trains `backbone` (the configured one when absent) and
// applies the scenario's corruption.
PreparedRun PrepareRun(const ExperimentConfig& cfg, int run_index,
                       std::optional<ModelKind> backbone = std::nullopt);

// Trains a model of `kind` on the run's clean graph with the run's train
// sub-seed.
GcnModel TrainBackbone(const ExperimentConfig& cfg, const PreparedRun& run, ModelKind kind);

struct Aggregate {
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation, 0 for a single value
};
Aggregate Summarize(const std::vector<double>& values);

struct SeedRow {
  int run = 0;
  std::uint64_t seed = 0;
  bool failed = false;
  std::string error;
  double vanilla = 0.0;
  double adapted = 0.0;
  // Abnormal-node subset; NaN outside abnormal_features.
  double vanilla_abnormal = 0.0;
  double adapted_abnormal = 0.0;
  // Frozen model on the uncorrupted graph (for ood_shift the training graph).
  double clean_accuracy = 0.0;
  // structure_attack only; NaN otherwise.
  double frac_adv_removed = 0.0;
  double frac_clean_removed = 0.0;
};

struct StatsRow {
  int run = 0;
  std::string graph;  // clean / corrupted / defended
  GraphStats stats;
};

struct AblationEntry {
  std::string variant;
  std::vector<double> adapted;  // per successful run, same order as rows
  Aggregate summary;
};

struct ExperimentResult {
  ExperimentConfig config;
  std::vector<SeedRow> rows;
  Aggregate clean, vanilla, adapted;
  Aggregate vanilla_abnormal, adapted_abnormal;
  std::vector<StatsRow> stats;
  // Indexed like `rows`; empty for failed runs (and for ood_shift records).
  std::vector<std::optional<CorruptionRecord>> corruptions;
  std::vector<std::optional<AdaptReport>> reports;
  std::vector<AblationEntry> ablation;

  // Recomputes the aggregates from the successful rows.
  void Finalize();
};

// Per seed: prepare, adapt the corrupted graph with the frozen model, and
// evaluate on the test split. A failing seed yields an error row; the call
// throws only when every seed fails.
ExperimentResult RunExperiment(const ExperimentConfig& cfg);

enum class AblationAxis { kLoss, kParams };
AblationAxis ParseAblationAxis(std::string_view name);

// params: features-only, structure-only, both.
// loss: surrogate, train, combined, entropy, reconstruction.
ExperimentResult Ablation(const ExperimentConfig& cfg, AblationAxis axis);

struct TransferMatrix {
  std::array<ModelKind, 2> kinds = {ModelKind::kGcn2, ModelKind::kSgc2};
  std::array<double, 2> noisy{};                  // [eval backbone]
  std::array<std::array<double, 2>, 2> adapted{};  // [adapt backbone][eval backbone]
  int runs = 0;
};

// Both backbones are trained on the same clean data per seed; the graph
// adapted under one is evaluated under both. Means over the seeds.
TransferMatrix CrossArchitecture(const ExperimentConfig& cfg);

// results.csv, summary.txt, stats.csv, config.txt, ablation.csv (when
// present), corruptions/run_<i>.txt and runs/<i>/ adaptation reports.
// Rewriting the same result produces identical bytes.
void EmitReport(const ExperimentResult& result, const std::filesystem::path& out_dir);
std::string SerializeResultsCsv(const ExperimentResult& result);
std::string SerializeSummary(const ExperimentResult& result);
std::string SerializeStatsCsv(const ExperimentResult& result);
std::string SerializeTransfer(const TransferMatrix& matrix);

}  // namespace gtrans
