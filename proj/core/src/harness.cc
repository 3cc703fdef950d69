#include "gtrans/harness.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>

#include "gtrans/checkpoint.h"
#include "gtrans/errors.h"
#include "gtrans/graph_io.h"
#include "gtrans/random.h"

namespace gtrans {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

const std::set<std::string> kAbnormalKeys = {"noise_ratio"};
const std::set<std::string> kAttackKeys = {"ptb_rate", "attack.steps", "attack.block_size",
                                           "attack.trials", "attack.step_size"};
const std::set<std::string> kOodKeys = {"ood.offset", "ood.p_out"};

void RejectKeys(const KeyValueConfig& kv, const std::set<std::string>& keys, Scenario scenario) {
  for (const auto& key : keys) {
    if (kv.Has(key)) {
      throw ConfigError("key '" + key + "' does not apply to scenario " +
                        std::string(ScenarioName(scenario)));
    }
  }
}

}  // namespace

std::string_view ScenarioName(Scenario scenario) {
  switch (scenario) {
    case Scenario::kOodShift: return "ood_shift";
    case Scenario::kAbnormalFeatures: return "abnormal_features";
    case Scenario::kStructureAttack: return "structure_attack";
  }
  return "unknown";
}

Scenario ParseScenario(std::string_view name) {
  if (name == "ood_shift") return Scenario::kOodShift;
  if (name == "abnormal_features") return Scenario::kAbnormalFeatures;
  if (name == "structure_attack") return Scenario::kStructureAttack;
  throw ConfigError("unknown scenario '" + std::string(name) + "'");
}

TransformConfig ScenarioTransformDefaults(Scenario scenario) {
  TransformConfig t;
  switch (scenario) {
    case Scenario::kOodShift:
      t.include_train_loss = false;
      break;
    case Scenario::kAbnormalFeatures:
      t.eta1 = 0.1;
      t.eta2 = 0.1;
      t.epochs = 20;
      t.budget_fraction = 0.05;
      t.lambda = 1e-4;
      t.include_train_loss = true;
      break;
    case Scenario::kStructureAttack:
      t.tau1 = 1;
      t.tau2 = 4;
      t.eta1 = 1e-3;
      t.eta2 = 0.1;
      t.epochs = 50;
      t.budget_fraction = 0.3;
      t.lambda = 1.0;
      t.include_train_loss = true;
      break;
  }
  return t;
}

// ---------------------------------------------------------------------------
// ExperimentConfig

void ExperimentConfig::Validate() const {
  if (repeat < 1) throw ConfigError("repeat must be >= 1");
  if (hidden < 1) throw ConfigError("hidden must be >= 1");
  if (!(dropout >= 0.0 && dropout < 1.0)) throw ConfigError("dropout must be in [0, 1)");
  if (train.epochs < 0 || !(train.lr > 0.0)) throw ConfigError("bad training settings");
  if (scenario == Scenario::kOodShift && dataset.from_files) {
    throw ConfigError("ood_shift needs an sbm dataset");
  }
  if (dataset.from_files && (dataset.edges.empty() || dataset.features.empty())) {
    throw ConfigError("file dataset needs data.edges and data.features");
  }
  if (scenario == Scenario::kAbnormalFeatures && !(noise_ratio >= 0.0 && noise_ratio <= 1.0)) {
    throw ConfigError("noise_ratio must be in [0, 1]");
  }
  if (scenario == Scenario::kStructureAttack && !(attack.ptb_rate > 0.0 && attack.ptb_rate <= 0.5)) {
    throw ConfigError("ptb_rate must be in (0, 0.5]");
  }
  try {
    transform.Validate();
  } catch (const DomainError& e) {
    throw ConfigError(std::string("transform: ") + e.what());
  }
}

ExperimentConfig ExperimentConfig::FromConfig(const KeyValueConfig& kv) {
  ExperimentConfig c;
  try {
    c.scenario = ParseScenario(kv.GetString("scenario", "abnormal_features"));
    switch (c.scenario) {
      case Scenario::kOodShift:
        RejectKeys(kv, kAbnormalKeys, c.scenario);
        RejectKeys(kv, kAttackKeys, c.scenario);
        break;
      case Scenario::kAbnormalFeatures:
        RejectKeys(kv, kAttackKeys, c.scenario);
        RejectKeys(kv, kOodKeys, c.scenario);
        break;
      case Scenario::kStructureAttack:
        RejectKeys(kv, kAbnormalKeys, c.scenario);
        RejectKeys(kv, kOodKeys, c.scenario);
        break;
    }

    const std::string source = kv.GetString("dataset", "sbm");
    if (source == "files") {
      c.dataset.from_files = true;
      c.dataset.edges = kv.RequireString("data.edges");
      c.dataset.features = kv.RequireString("data.features");
      c.dataset.labels = kv.GetString("data.labels", "");
      c.dataset.masks = kv.GetString("data.masks", "");
      c.dataset.num_classes = static_cast<int>(kv.GetInt("data.num_classes", 0));
    } else if (source != "sbm") {
      throw ConfigError("dataset must be sbm or files");
    }
    SbmParams& s = c.dataset.sbm;
    s.blocks = static_cast<int>(kv.GetInt("sbm.blocks", s.blocks));
    s.nodes_per_block = static_cast<int>(kv.GetInt("sbm.nodes_per_block", s.nodes_per_block));
    s.p_in = kv.GetReal("sbm.p_in", s.p_in);
    s.p_out = kv.GetReal("sbm.p_out", s.p_out);
    s.feature_dim = static_cast<int>(kv.GetInt("sbm.feature_dim", s.feature_dim));
    s.feature_shift = kv.GetReal("sbm.feature_shift", s.feature_shift);

    c.backbone = ParseModelKind(kv.GetString("backbone", "gcn2"));
    c.hidden = static_cast<int>(kv.GetInt("hidden", c.hidden));
    c.dropout = kv.GetReal("dropout", c.dropout);
    c.train.epochs = static_cast<int>(kv.GetInt("train.epochs", c.train.epochs));
    c.train.lr = kv.GetReal("train.lr", c.train.lr);
    c.train.weight_decay = kv.GetReal("train.weight_decay", c.train.weight_decay);

    c.transform = TransformConfig::FromConfig(kv, ScenarioTransformDefaults(c.scenario));
    c.surrogate = ParseSurrogateTag(kv.GetString("surrogate", "contrastive"));

    c.noise_ratio = kv.GetReal("noise_ratio", c.noise_ratio);
    c.attack.ptb_rate = kv.GetReal("ptb_rate", c.attack.ptb_rate);
    c.attack.steps = static_cast<int>(kv.GetInt("attack.steps", c.attack.steps));
    c.attack.block_size = static_cast<int>(kv.GetInt("attack.block_size", c.attack.block_size));
    c.attack.trials = static_cast<int>(kv.GetInt("attack.trials", c.attack.trials));
    c.attack.step_size = kv.GetReal("attack.step_size", c.attack.step_size);
    c.ood_offset = kv.GetReal("ood.offset", c.ood_offset);
    c.ood_p_out = kv.GetReal("ood.p_out", c.ood_p_out);

    c.repeat = static_cast<int>(kv.GetInt("repeat", c.repeat));
    c.seed = kv.GetSeed("seed", c.seed);
    c.out_dir = kv.GetString("out", "");
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  c.Validate();
  return c;
}

KeyValueConfig ExperimentConfig::ToConfig() const {
  KeyValueConfig kv;
  kv.Set("scenario", std::string(ScenarioName(scenario)));
  if (dataset.from_files) {
    kv.Set("dataset", "files");
    kv.Set("data.edges", dataset.edges.string());
    kv.Set("data.features", dataset.features.string());
    kv.Set("data.labels", dataset.labels.string());
    kv.Set("data.masks", dataset.masks.string());
    kv.SetInt("data.num_classes", dataset.num_classes);
  } else {
    kv.Set("dataset", "sbm");
    kv.SetInt("sbm.blocks", dataset.sbm.blocks);
    kv.SetInt("sbm.nodes_per_block", dataset.sbm.nodes_per_block);
    kv.SetReal("sbm.p_in", dataset.sbm.p_in);
    kv.SetReal("sbm.p_out", dataset.sbm.p_out);
    kv.SetInt("sbm.feature_dim", dataset.sbm.feature_dim);
    kv.SetReal("sbm.feature_shift", dataset.sbm.feature_shift);
  }
  kv.Set("backbone", std::string(ModelKindName(backbone)));
  kv.SetInt("hidden", hidden);
  kv.SetReal("dropout", dropout);
  kv.SetInt("train.epochs", train.epochs);
  kv.SetReal("train.lr", train.lr);
  kv.SetReal("train.weight_decay", train.weight_decay);
  transform.WriteTo(kv);
  kv.Set("surrogate", std::string(SurrogateTagName(surrogate)));
  switch (scenario) {
    case Scenario::kAbnormalFeatures:
      kv.SetReal("noise_ratio", noise_ratio);
      break;
    case Scenario::kStructureAttack:
      kv.SetReal("ptb_rate", attack.ptb_rate);
      kv.SetInt("attack.steps", attack.steps);
      kv.SetInt("attack.block_size", attack.block_size);
      kv.SetInt("attack.trials", attack.trials);
      kv.SetReal("attack.step_size", attack.step_size);
      break;
    case Scenario::kOodShift:
      kv.SetReal("ood.offset", ood_offset);
      kv.SetReal("ood.p_out", ood_p_out);
      break;
  }
  kv.SetInt("repeat", repeat);
  // The transform seed is derived per run; the shared key holds the base seed.
  kv.Set("seed", std::to_string(seed));
  if (!out_dir.empty()) kv.Set("out", out_dir.string());
  return kv;
}

// ---------------------------------------------------------------------------
// Runs

namespace {

Graph BuildData(const ExperimentConfig& cfg, std::uint64_t run_seed) {
  if (cfg.dataset.from_files) {
    return LoadDataset(cfg.dataset.edges, cfg.dataset.features, cfg.dataset.labels,
                       cfg.dataset.masks, cfg.dataset.num_classes)
        .graph;
  }
  SbmParams params = cfg.dataset.sbm;
  params.seed = SubSeed(run_seed, "data");
  return GenerateSbm(params);
}

Graph OodGraph(const ExperimentConfig& cfg, std::uint64_t run_seed) {
  SbmParams params = cfg.dataset.sbm;
  params.p_out = cfg.ood_p_out;
  params.seed = SubSeed(run_seed, "corrupt");
  Graph g = GenerateSbm(params);
  Matrix x = g.features();
  x.array() += cfg.ood_offset / std::sqrt(static_cast<double>(x.cols()));
  return g.WithFeatures(std::move(x));
}

double EvalAccuracy(const GcnModel& model, const Graph& g, std::span<const NodeId> nodes) {
  if (nodes.empty()) return kNaN;
  const ForwardTrace trace = Forward(model, NormalizeAdjacency(g, std::nullopt), g.features());
  return Accuracy(trace.logits, g.labels(), nodes);
}

TransformConfig RunTransform(const ExperimentConfig& cfg, const PreparedRun& run) {
  TransformConfig t = cfg.transform;
  t.seed = SubSeed(run.seed, "adapt");
  return t;
}

SeedRow FailedRow(int run, std::uint64_t seed, const std::string& what) {
  SeedRow row;
  row.run = run;
  row.seed = seed;
  row.failed = true;
  row.error = what;
  row.vanilla = row.adapted = kNaN;
  row.vanilla_abnormal = row.adapted_abnormal = kNaN;
  row.clean_accuracy = row.frac_adv_removed = row.frac_clean_removed = kNaN;
  return row;
}

struct Adapted {
  AdaptResult result;
  double accuracy = 0.0;
  double abnormal_accuracy = kNaN;
};

Adapted AdaptAndEvaluate(const PreparedRun& run, const GcnModel& model, const SurrogateKind& kind,
                         const TransformConfig& t) {
  const std::uint64_t before = ModelFingerprint(model);
  Adapted a{GtransAdapt(model, run.corrupted, kind, t)};
  if (ModelFingerprint(model) != before) throw ConsistencyError("adaptation modified the model");
  a.accuracy = EvalAccuracy(model, a.result.graph, run.eval_nodes);
  a.abnormal_accuracy = EvalAccuracy(model, a.result.graph, run.abnormal_nodes);
  return a;
}

void AddStats(std::vector<StatsRow>& out, int run, const std::string& name, const Graph& g,
              const Graph& reference) {
  try {
    out.push_back({run, name, ComputeGraphStats(g, &reference)});
  } catch (const Error&) {
    // Statistics are interpretation only; graphs without edges are skipped.
  }
}

}  // namespace

GcnModel TrainBackbone(const ExperimentConfig& cfg, const PreparedRun& run, ModelKind kind) {
  const std::uint64_t train_seed = SubSeed(run.seed, "train");
  GcnModel model = GcnModel::Init(kind, run.clean.feature_dim(), cfg.hidden,
                                  run.clean.num_classes(), train_seed);
  model.dropout_rate = cfg.dropout;
  TrainConfig tc = cfg.train;
  tc.seed = train_seed;
  return Train(std::move(model), run.clean, tc).model;
}

PreparedRun PrepareRun(const ExperimentConfig& cfg, int run_index, std::optional<ModelKind> backbone) {
  PreparedRun run;
  run.run_index = run_index;
  run.seed = cfg.seed + static_cast<std::uint64_t>(run_index);
  run.clean = BuildData(cfg, run.seed);
  if (!run.clean.has_labels()) throw DomainError("experiments need a labeled graph");
  run.model = TrainBackbone(cfg, run, backbone.value_or(cfg.backbone));

  const std::uint64_t corrupt_seed = SubSeed(run.seed, "corrupt");
  switch (cfg.scenario) {
    case Scenario::kOodShift:
      run.corrupted = OodGraph(cfg, run.seed);
      break;
    case Scenario::kAbnormalFeatures: {
      CorruptionResult c = InjectAbnormalFeatures(run.clean, cfg.noise_ratio, corrupt_seed);
      run.corrupted = std::move(c.graph);
      run.abnormal_nodes = c.record.nodes;
      run.record = std::move(c.record);
      break;
    }
    case Scenario::kStructureAttack: {
      AttackConfig ac = cfg.attack;
      ac.seed = corrupt_seed;
      CorruptionResult c = AttackStructure(run.model, run.clean, ac);
      run.corrupted = std::move(c.graph);
      run.record = std::move(c.record);
      break;
    }
  }
  run.eval_nodes = run.corrupted.Nodes(Split::kTest);
  return run;
}

Aggregate Summarize(const std::vector<double>& values) {
  Aggregate a;
  if (values.empty()) return {kNaN, kNaN};
  a.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - a.mean) * (v - a.mean);
    a.std = std::sqrt(ss / static_cast<double>(values.size() - 1));
  }
  return a;
}

void ExperimentResult::Finalize() {
  std::vector<double> c, v, a, va, aa;
  for (const SeedRow& row : rows) {
    if (row.failed) continue;
    c.push_back(row.clean_accuracy);
    v.push_back(row.vanilla);
    a.push_back(row.adapted);
    if (!std::isnan(row.vanilla_abnormal)) va.push_back(row.vanilla_abnormal);
    if (!std::isnan(row.adapted_abnormal)) aa.push_back(row.adapted_abnormal);
  }
  clean = Summarize(c);
  vanilla = Summarize(v);
  adapted = Summarize(a);
  vanilla_abnormal = Summarize(va);
  adapted_abnormal = Summarize(aa);
  for (AblationEntry& entry : ablation) entry.summary = Summarize(entry.adapted);
}

namespace {

struct Variant {
  std::string name;
  TransformConfig transform;
  SurrogateTag tag;
};

std::vector<Variant> AblationVariants(const ExperimentConfig& cfg, AblationAxis axis) {
  std::vector<Variant> out;
  const TransformConfig base = cfg.transform;
  if (axis == AblationAxis::kParams) {
    TransformConfig f = base, s = base;
    f.tau1 = 1;
    f.tau2 = 0;
    s.tau1 = 0;
    s.tau2 = 1;
    out.push_back({"features-only", f, cfg.surrogate});
    out.push_back({"structure-only", s, cfg.surrogate});
    out.push_back({"both", base, cfg.surrogate});
  } else {
    TransformConfig surrogate = base, train = base, combined = base;
    surrogate.include_train_loss = false;
    train.include_train_loss = true;
    train.lambda = 0.0;
    combined.include_train_loss = true;
    out.push_back({"surrogate", surrogate, SurrogateTag::kContrastive});
    out.push_back({"train", train, SurrogateTag::kContrastive});
    out.push_back({"combined", combined, SurrogateTag::kContrastive});
    out.push_back({"entropy", surrogate, SurrogateTag::kEntropy});
    out.push_back({"reconstruction", surrogate, SurrogateTag::kReconstruction});
  }
  return out;
}

// Shared driver: the first variant's result fills the main rows.
ExperimentResult Drive(const ExperimentConfig& cfg, const std::vector<Variant>& variants,
                       std::size_t primary) {
  cfg.Validate();
  ExperimentResult result;
  result.config = cfg;
  for (const Variant& v : variants) result.ablation.push_back({v.name, {}, {}});
  if (variants.size() == 1) result.ablation.clear();

  std::string last_error;
  for (int i = 0; i < cfg.repeat; ++i) {
    const std::uint64_t seed = cfg.seed + static_cast<std::uint64_t>(i);
    try {
      const PreparedRun run = PrepareRun(cfg, i);
      SeedRow row = FailedRow(i, seed, "");
      row.failed = false;
      row.clean_accuracy = EvalAccuracy(run.model, run.clean, run.eval_nodes);
      row.vanilla = EvalAccuracy(run.model, run.corrupted, run.eval_nodes);
      row.vanilla_abnormal = EvalAccuracy(run.model, run.corrupted, run.abnormal_nodes);

      std::vector<Adapted> adapted;
      for (const Variant& v : variants) {
        TransformConfig t = v.transform;
        t.seed = RunTransform(cfg, run).seed;
        adapted.push_back(AdaptAndEvaluate(run, run.model, t.MakeSurrogate(v.tag), t));
      }
      const Adapted& main = adapted[primary];
      row.adapted = main.accuracy;
      row.adapted_abnormal = main.abnormal_accuracy;

      std::vector<StatsRow> stats;
      AddStats(stats, i, "clean", run.clean, run.clean);
      AddStats(stats, i, "corrupted", run.corrupted, run.clean);
      AddStats(stats, i, "defended", main.result.graph, run.clean);
      if (cfg.scenario == Scenario::kStructureAttack) {
        try {
          const RemovalFractions r =
              AdversarialEdgeRemovalFraction(run.clean, run.corrupted, main.result.graph);
          row.frac_adv_removed = r.adversarial_removed;
          row.frac_clean_removed = r.clean_removed;
        } catch (const UndefinedStatisticError&) {
          // Attack injected nothing.
        }
      }

      result.rows.push_back(row);
      result.stats.insert(result.stats.end(), stats.begin(), stats.end());
      result.corruptions.push_back(run.record);
      result.reports.push_back(main.result.report);
      if (!result.ablation.empty()) {
        for (std::size_t k = 0; k < variants.size(); ++k) {
          result.ablation[k].adapted.push_back(adapted[k].accuracy);
        }
      }
    } catch (const Error& e) {
      last_error = e.what();
      result.rows.push_back(FailedRow(i, seed, e.what()));
      result.corruptions.emplace_back();
      result.reports.emplace_back();
    }
  }
  if (std::all_of(result.rows.begin(), result.rows.end(), [](const SeedRow& r) { return r.failed; })) {
    throw Error("all " + std::to_string(cfg.repeat) + " runs failed; last error: " + last_error);
  }
  result.Finalize();
  return result;
}

}  // namespace

ExperimentResult RunExperiment(const ExperimentConfig& cfg) {
  return Drive(cfg, {{"main", cfg.transform, cfg.surrogate}}, 0);
}

AblationAxis ParseAblationAxis(std::string_view name) {
  if (name == "loss") return AblationAxis::kLoss;
  if (name == "params") return AblationAxis::kParams;
  throw ConfigError("ablation axis must be loss or params");
}

ExperimentResult Ablation(const ExperimentConfig& cfg, AblationAxis axis) {
  const auto variants = AblationVariants(cfg, axis);
  const std::string primary = axis == AblationAxis::kParams ? "both" : "combined";
  std::size_t index = 0;
  while (variants[index].name != primary) ++index;
  return Drive(cfg, variants, index);
}

TransferMatrix CrossArchitecture(const ExperimentConfig& cfg) {
  cfg.Validate();
  TransferMatrix m;
  std::string last_error;
  for (int i = 0; i < cfg.repeat; ++i) {
    try {
      const PreparedRun run = PrepareRun(cfg, i, m.kinds[0]);
      const std::array<GcnModel, 2> models = {run.model, TrainBackbone(cfg, run, m.kinds[1])};
      const SurrogateKind kind = cfg.transform.MakeSurrogate(cfg.surrogate);
      const TransformConfig t = RunTransform(cfg, run);
      std::array<double, 2> noisy{};
      std::array<std::array<double, 2>, 2> adapted{};
      for (int j = 0; j < 2; ++j) noisy[j] = EvalAccuracy(models[j], run.corrupted, run.eval_nodes);
      for (int a = 0; a < 2; ++a) {
        const Adapted result = AdaptAndEvaluate(run, models[a], kind, t);
        for (int j = 0; j < 2; ++j) {
          adapted[a][j] = EvalAccuracy(models[j], result.result.graph, run.eval_nodes);
        }
      }
      for (int j = 0; j < 2; ++j) {
        m.noisy[j] += noisy[j];
        for (int a = 0; a < 2; ++a) m.adapted[a][j] += adapted[a][j];
      }
      ++m.runs;
    } catch (const Error& e) {
      last_error = e.what();
    }
  }
  if (m.runs == 0) throw Error("all transfer runs failed; last error: " + last_error);
  for (int j = 0; j < 2; ++j) {
    m.noisy[j] /= m.runs;
    for (int a = 0; a < 2; ++a) m.adapted[a][j] /= m.runs;
  }
  return m;
}

// ---------------------------------------------------------------------------
// Reports

std::string SerializeResultsCsv(const ExperimentResult& result) {
  std::string out =
      "run,seed,status,vanilla,adapted,vanilla_abnormal,adapted_abnormal,clean,"
      "frac_adv_removed,frac_clean_removed,error\n";
  for (const SeedRow& r : result.rows) {
    std::string error = r.error;
    std::replace(error.begin(), error.end(), ',', ';');
    std::replace(error.begin(), error.end(), '\n', ' ');
    out += std::to_string(r.run) + "," + std::to_string(r.seed) + "," + (r.failed ? "failed" : "ok") +
           "," + FormatReal(r.vanilla) + "," + FormatReal(r.adapted) + "," +
           FormatReal(r.vanilla_abnormal) + "," + FormatReal(r.adapted_abnormal) + "," +
           FormatReal(r.clean_accuracy) + "," + FormatReal(r.frac_adv_removed) + "," +
           FormatReal(r.frac_clean_removed) + "," + error + "\n";
  }
  return out;
}

std::string SerializeSummary(const ExperimentResult& result) {
  std::size_t failed = 0;
  for (const SeedRow& r : result.rows) failed += r.failed ? 1 : 0;
  std::string out;
  out += "scenario=" + std::string(ScenarioName(result.config.scenario)) + "\n";
  out += "runs=" + std::to_string(result.rows.size()) + "\n";
  out += "failed=" + std::to_string(failed) + "\n";
  auto line = [&](const std::string& name, const Aggregate& a) {
    out += name + " mean=" + FormatReal(a.mean) + " std=" + FormatReal(a.std) + "\n";
  };
  line("clean", result.clean);
  line("vanilla", result.vanilla);
  line("adapted", result.adapted);
  if (result.config.scenario == Scenario::kAbnormalFeatures) {
    line("vanilla_abnormal", result.vanilla_abnormal);
    line("adapted_abnormal", result.adapted_abnormal);
  }
  for (const AblationEntry& e : result.ablation) line("ablation:" + e.variant, e.summary);
  return out;
}

std::string SerializeStatsCsv(const ExperimentResult& result) {
  std::string out = "run,graph,homophily,pairwise_feature_similarity,edges,edges_added,edges_removed\n";
  for (const StatsRow& s : result.stats) {
    out += std::to_string(s.run) + "," + s.graph + "," + FormatReal(s.stats.homophily) + "," +
           FormatReal(s.stats.pairwise_feature_similarity) + "," + std::to_string(s.stats.num_edges) +
           "," + std::to_string(s.stats.edges_added) + "," + std::to_string(s.stats.edges_removed) + "\n";
  }
  return out;
}

std::string SerializeTransfer(const TransferMatrix& m) {
  std::string out = "adapted_with";
  for (ModelKind k : m.kinds) out += ",eval_" + std::string(ModelKindName(k));
  out += "\nnoisy";
  for (double v : m.noisy) out += "," + FormatReal(v);
  out += "\n";
  for (int a = 0; a < 2; ++a) {
    out += std::string(ModelKindName(m.kinds[a]));
    for (double v : m.adapted[a]) out += "," + FormatReal(v);
    out += "\n";
  }
  return out;
}

void EmitReport(const ExperimentResult& result, const std::filesystem::path& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create " + out_dir.string() + ": " + ec.message());
  WriteTextFile(out_dir / "results.csv", SerializeResultsCsv(result));
  WriteTextFile(out_dir / "summary.txt", SerializeSummary(result));
  WriteTextFile(out_dir / "stats.csv", SerializeStatsCsv(result));
  WriteTextFile(out_dir / "config.txt", result.config.ToConfig().Serialize());
  if (!result.ablation.empty()) {
    std::string csv = "run,variant,adapted\n";
    for (const AblationEntry& e : result.ablation) {
      std::size_t k = 0;
      for (const SeedRow& r : result.rows) {
        if (r.failed) continue;
        csv += std::to_string(r.run) + "," + e.variant + "," + FormatReal(e.adapted[k++]) + "\n";
      }
    }
    WriteTextFile(out_dir / "ablation.csv", csv);
  }
  for (std::size_t i = 0; i < result.rows.size(); ++i) {
    const std::string run = std::to_string(result.rows[i].run);
    if (i < result.corruptions.size() && result.corruptions[i]) {
      std::filesystem::create_directories(out_dir / "corruptions", ec);
      WriteTextFile(out_dir / "corruptions" / ("run_" + run + ".txt"),
                    SerializeCorruptionRecord(*result.corruptions[i]));
    }
    if (i < result.reports.size() && result.reports[i]) {
      const auto dir = out_dir / "runs" / run;
      std::filesystem::create_directories(dir, ec);
      if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
      WriteAdaptReport(*result.reports[i], dir);
    }
  }
}

}  // namespace gtrans
