// gtrans command line: train, corrupt, attack, adapt, eval, ablate, transfer,
// stats. Exit codes: 0 success, 1 configuration error, 2 runtime error.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "gtrans/checkpoint.h"
#include "gtrans/config.h"
#include "gtrans/corruption.h"
#include "gtrans/errors.h"
#include "gtrans/graph_io.h"
#include "gtrans/harness.h"
#include "gtrans/random.h"
#include "gtrans/stats.h"
#include "gtrans/transform.h"

namespace fs = std::filesystem;

namespace {

struct CommonArgs {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out = ".";
};

void AddCommon(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config, "flat key=value experiment file");
  cmd->add_option("--seed", args.seed, "base seed (overrides the config)");
  cmd->add_option("--out", args.out, "output directory");
}

gtrans::ExperimentConfig LoadExperiment(const CommonArgs& args) {
  gtrans::KeyValueConfig kv;
  if (!args.config.empty()) kv = gtrans::KeyValueConfig::Load(args.config);
  if (args.seed) kv.Set("seed", std::to_string(*args.seed));
  gtrans::ExperimentConfig cfg = gtrans::ExperimentConfig::FromConfig(kv);
  cfg.out_dir = args.out;
  return cfg;
}

fs::path PrepareOut(const CommonArgs& args) {
  fs::create_directories(args.out);
  return args.out;
}

void WriteStats(const gtrans::GraphStats& s, const fs::path& path) {
  gtrans::KeyValueConfig kv;
  kv.SetReal("homophily", s.homophily);
  kv.SetReal("pairwise_feature_similarity", s.pairwise_feature_similarity);
  kv.SetInt("edges", static_cast<std::int64_t>(s.num_edges));
  kv.SetInt("edges_added", static_cast<std::int64_t>(s.edges_added));
  kv.SetInt("edges_removed", static_cast<std::int64_t>(s.edges_removed));
  gtrans::WriteTextFile(path, kv.Serialize());
  std::cout << kv.Serialize();
}

void PrintSummary(const gtrans::ExperimentResult& result) { std::cout << gtrans::SerializeSummary(result); }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Test-time graph transformation for frozen graph neural networks"};
  app.require_subcommand(1);

  CommonArgs common;
  std::string model_path, graph_prefix, reference_prefix, axis = "params";

  auto* train = app.add_subcommand("train", "train a backbone on the clean graph of run 0");
  AddCommon(train, common);

  auto* corrupt = app.add_subcommand("corrupt", "inject abnormal features into the test split");
  AddCommon(corrupt, common);
  corrupt->add_option("--graph", graph_prefix, "clean graph prefix (default: build from config)");

  auto* attack = app.add_subcommand("attack", "structure evasion attack against a trained model");
  AddCommon(attack, common);
  attack->add_option("--graph", graph_prefix, "clean graph prefix (default: build from config)");
  attack->add_option("--model", model_path, "model checkpoint (default: train one)");

  auto* adapt = app.add_subcommand("adapt", "transform a test graph for a frozen model");
  AddCommon(adapt, common);
  adapt->add_option("--model", model_path, "model checkpoint")->required();
  adapt->add_option("--graph", graph_prefix, "test graph prefix (default: corrupted graph of run 0)");

  auto* eval = app.add_subcommand("eval", "full experiment: vanilla vs adapted accuracy per seed");
  AddCommon(eval, common);

  auto* ablate = app.add_subcommand("ablate", "ablation grid over the loss or the updated variables");
  AddCommon(ablate, common);
  ablate->add_option("--axis", axis, "loss or params");

  auto* transfer = app.add_subcommand("transfer", "cross-architecture transfer matrix");
  AddCommon(transfer, common);

  auto* stats = app.add_subcommand("stats", "interpretation statistics of a graph");
  AddCommon(stats, common);
  stats->add_option("--graph", graph_prefix, "graph prefix")->required();
  stats->add_option("--reference", reference_prefix, "reference graph prefix for edge counts");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (stats->parsed()) {
      const fs::path out = PrepareOut(common);
      const gtrans::Graph g = gtrans::LoadGraph(graph_prefix);
      std::optional<gtrans::Graph> ref;
      if (!reference_prefix.empty()) ref = gtrans::LoadGraph(reference_prefix);
      WriteStats(gtrans::ComputeGraphStats(g, ref ? &*ref : nullptr), out / "stats.txt");
      return 0;
    }

    const gtrans::ExperimentConfig cfg = LoadExperiment(common);
    const fs::path out = PrepareOut(common);
    gtrans::WriteTextFile(out / "config.txt", cfg.ToConfig().Serialize());

    if (train->parsed()) {
      const gtrans::PreparedRun run = gtrans::PrepareRun(cfg, 0);
      gtrans::SaveModel(run.model, out / "model.txt");
      gtrans::SaveGraph(run.clean, out / "clean");
      std::cout << "model: " << (out / "model.txt").string() << "\n";
    } else if (corrupt->parsed()) {
      gtrans::Graph clean = graph_prefix.empty() ? gtrans::PrepareRun(cfg, 0).clean
                                                 : gtrans::LoadGraph(graph_prefix);
      const auto result = gtrans::InjectAbnormalFeatures(
          clean, cfg.noise_ratio, gtrans::SubSeed(cfg.seed, "corrupt"));
      gtrans::SaveGraph(result.graph, out / "corrupted");
      gtrans::WriteTextFile(out / "corruption.txt", gtrans::SerializeCorruptionRecord(result.record));
      std::cout << "abnormal nodes: " << result.record.nodes.size() << "\n";
    } else if (attack->parsed()) {
      std::optional<gtrans::PreparedRun> run;
      if (graph_prefix.empty() || model_path.empty()) run = gtrans::PrepareRun(cfg, 0);
      const gtrans::Graph clean = graph_prefix.empty() ? run->clean : gtrans::LoadGraph(graph_prefix);
      const gtrans::GcnModel model = model_path.empty() ? run->model : gtrans::LoadModel(model_path);
      gtrans::AttackConfig ac = cfg.attack;
      ac.seed = gtrans::SubSeed(cfg.seed, "corrupt");
      const auto result = gtrans::AttackStructure(model, clean, ac);
      gtrans::SaveGraph(result.graph, out / "attacked");
      gtrans::WriteTextFile(out / "corruption.txt", gtrans::SerializeCorruptionRecord(result.record));
      std::cout << "injected: " << result.record.injected.size()
                << " deleted: " << result.record.deleted.size() << "\n";
    } else if (adapt->parsed()) {
      const gtrans::GcnModel model = gtrans::LoadModel(model_path);
      const gtrans::Graph g = graph_prefix.empty() ? gtrans::PrepareRun(cfg, 0).corrupted
                                                   : gtrans::LoadGraph(graph_prefix);
      gtrans::TransformConfig t = cfg.transform;
      t.seed = gtrans::SubSeed(cfg.seed, "adapt");
      const auto result = gtrans::GtransAdapt(model, g, t.MakeSurrogate(cfg.surrogate), t);
      gtrans::SaveGraph(result.graph, out / "transformed");
      gtrans::WriteAdaptReport(result.report, out);
      std::cout << "flipped edges: " << result.report.flipped_edges.size()
                << " final loss: " << gtrans::FormatReal(result.report.final_loss) << "\n";
    } else if (eval->parsed()) {
      const auto result = gtrans::RunExperiment(cfg);
      gtrans::EmitReport(result, out);
      PrintSummary(result);
    } else if (ablate->parsed()) {
      const auto result = gtrans::Ablation(cfg, gtrans::ParseAblationAxis(axis));
      gtrans::EmitReport(result, out);
      PrintSummary(result);
    } else if (transfer->parsed()) {
      const auto matrix = gtrans::CrossArchitecture(cfg);
      const std::string text = gtrans::SerializeTransfer(matrix);
      gtrans::WriteTextFile(out / "transfer.csv", text);
      std::cout << text;
    }
  } catch (const gtrans::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
