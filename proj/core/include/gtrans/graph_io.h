#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "gtrans/graph.h"

namespace gtrans {

struct LoadedDataset {
  Graph graph;
  GraphBuildInfo info;
};

// Reads the four-file text format:
//   edges     one "u<TAB>v" pair per line (any whitespace accepted), 0-based
//   features  comma-separated reals, one row per node; defines N
//   labels    one integer per line (empty path: unlabeled graph)
//   masks     one of train/val/test/none per line (empty path: all none)
// Reversed and repeated pairs collapse into one undirected edge; self-loops
// are dropped and counted in `info`.
LoadedDataset LoadDataset(const std::filesystem::path& edge_file,
                          const std::filesystem::path& feature_file,
                          const std::filesystem::path& label_file,
                          const std::filesystem::path& mask_file, int num_classes = 0);

// Writes <prefix>.header/.edges/.features/.labels/.masks.
void SaveGraph(const Graph& g, const std::filesystem::path& prefix);
Graph LoadGraph(const std::filesystem::path& prefix);

// Shortest round-trippable decimal text (17 significant digits).
std::string FormatReal(double value);
double ParseReal(std::string_view text);

std::string_view SplitName(Split split);
Split ParseSplit(std::string_view token);

// Whole-file helpers shared by the report writers.
void WriteTextFile(const std::filesystem::path& path, const std::string& content);
std::string ReadTextFile(const std::filesystem::path& path);

}  // namespace gtrans
