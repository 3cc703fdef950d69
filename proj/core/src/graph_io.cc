#include "gtrans/graph_io.h"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

#include "gtrans/errors.h"

namespace gtrans {
namespace {

std::string_view Trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::string Where(const std::filesystem::path& path, std::size_t line) {
  return path.string() + ":" + std::to_string(line);
}

std::ifstream OpenOrThrow(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  return in;
}

std::int64_t ParseInt(std::string_view text, const std::string& where) {
  std::int64_t value = 0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end) {
    throw MalformedInputError(where + ": expected an integer, got '" + std::string(text) + "'");
  }
  return value;
}

Matrix ReadFeatures(const std::filesystem::path& path) {
  auto in = OpenOrThrow(path);
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto trimmed = Trim(line);
    if (trimmed.empty()) continue;
    std::vector<double> row;
    std::size_t start = 0;
    while (start <= trimmed.size()) {
      const auto comma = trimmed.find(',', start);
      const auto field = Trim(trimmed.substr(start, comma == std::string_view::npos
                                                        ? std::string_view::npos
                                                        : comma - start));
      try {
        row.push_back(ParseReal(field));
      } catch (const MalformedInputError&) {
        throw MalformedInputError(Where(path, lineno) + ": bad real '" + std::string(field) + "'");
      }
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw DimensionError(Where(path, lineno) + ": row has " + std::to_string(row.size()) +
                           " values, expected " + std::to_string(rows.front().size()));
    }
    rows.push_back(std::move(row));
  }
  const Eigen::Index n = static_cast<Eigen::Index>(rows.size());
  const Eigen::Index d = rows.empty() ? 0 : static_cast<Eigen::Index>(rows.front().size());
  Matrix x(n, d);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) x(i, j) = rows[i][j];
  }
  return x;
}

}  // namespace

std::string FormatReal(double value) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  return buf;
}

double ParseReal(std::string_view text) {
  text = Trim(text);
  double value = 0.0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (text.empty() || ec != std::errc() || ptr != end) {
    throw MalformedInputError("expected a real number, got '" + std::string(text) + "'");
  }
  return value;
}

std::string_view SplitName(Split split) {
  switch (split) {
    case Split::kTrain: return "train";
    case Split::kVal: return "val";
    case Split::kTest: return "test";
    case Split::kNone: break;
  }
  return "none";
}

Split ParseSplit(std::string_view token) {
  if (token == "train") return Split::kTrain;
  if (token == "val") return Split::kVal;
  if (token == "test") return Split::kTest;
  if (token == "none") return Split::kNone;
  throw MalformedInputError("unknown split '" + std::string(token) + "'");
}

LoadedDataset LoadDataset(const std::filesystem::path& edge_file,
                          const std::filesystem::path& feature_file,
                          const std::filesystem::path& label_file,
                          const std::filesystem::path& mask_file, int num_classes) {
  Matrix features = ReadFeatures(feature_file);
  const NodeId n = features.rows();

  EdgeList edges;
  {
    auto in = OpenOrThrow(edge_file);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      const auto trimmed = Trim(line);
      if (trimmed.empty() || trimmed.front() == '#') continue;
      const auto sep = trimmed.find_first_of(" \t");
      if (sep == std::string_view::npos) {
        throw MalformedInputError(Where(edge_file, lineno) + ": expected two node indices");
      }
      const auto where = Where(edge_file, lineno);
      const NodeId u = ParseInt(Trim(trimmed.substr(0, sep)), where);
      const NodeId v = ParseInt(Trim(trimmed.substr(sep + 1)), where);
      if (u < 0 || v < 0 || u >= n || v >= n) {
        throw MalformedInputError(where + ": edge (" + std::to_string(u) + ", " +
                                  std::to_string(v) + ") out of range for " + std::to_string(n) +
                                  " nodes");
      }
      edges.push_back({u, v});
    }
  }

  std::vector<int> labels;
  if (!label_file.empty()) {
    auto in = OpenOrThrow(label_file);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      const auto trimmed = Trim(line);
      if (trimmed.empty()) continue;
      const auto y = ParseInt(trimmed, Where(label_file, lineno));
      if (y < 0) throw MalformedInputError(Where(label_file, lineno) + ": negative label");
      labels.push_back(static_cast<int>(y));
    }
    if (static_cast<NodeId>(labels.size()) != n) {
      throw DimensionError(label_file.string() + ": " + std::to_string(labels.size()) +
                           " labels for " + std::to_string(n) + " nodes");
    }
  }

  std::vector<Split> splits;
  if (!mask_file.empty()) {
    auto in = OpenOrThrow(mask_file);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      const auto trimmed = Trim(line);
      if (trimmed.empty()) continue;
      try {
        splits.push_back(ParseSplit(trimmed));
      } catch (const MalformedInputError& e) {
        throw MalformedInputError(Where(mask_file, lineno) + ": " + e.what());
      }
    }
    if (static_cast<NodeId>(splits.size()) != n) {
      throw DimensionError(mask_file.string() + ": " + std::to_string(splits.size()) +
                           " mask rows for " + std::to_string(n) + " nodes");
    }
  }

  LoadedDataset out;
  out.graph = Graph::Create(n, std::move(edges), std::move(features), std::move(labels),
                            num_classes, std::move(splits), &out.info);
  return out;
}

void WriteTextFile(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << content;
  if (!out) throw IoError("write failed for " + path.string());
}

std::string ReadTextFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

namespace {

std::filesystem::path WithSuffix(const std::filesystem::path& prefix, const char* suffix) {
  return std::filesystem::path(prefix.string() + suffix);
}

}  // namespace

void SaveGraph(const Graph& g, const std::filesystem::path& prefix) {
  std::ostringstream header;
  header << "num_nodes=" << g.num_nodes() << "\n"
         << "d=" << g.feature_dim() << "\n"
         << "K=" << g.num_classes() << "\n";
  WriteTextFile(WithSuffix(prefix, ".header"), header.str());

  std::string edges;
  for (const Edge& e : g.edges()) {
    edges += std::to_string(e.u) + "\t" + std::to_string(e.v) + "\n";
  }
  WriteTextFile(WithSuffix(prefix, ".edges"), edges);

  std::string features;
  const Matrix& x = g.features();
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
      if (j > 0) features += ",";
      features += FormatReal(x(i, j));
    }
    features += "\n";
  }
  WriteTextFile(WithSuffix(prefix, ".features"), features);

  std::string labels;
  for (int y : g.labels()) labels += std::to_string(y) + "\n";
  WriteTextFile(WithSuffix(prefix, ".labels"), labels);

  std::string masks;
  for (Split s : g.splits()) {
    masks += SplitName(s);
    masks += "\n";
  }
  WriteTextFile(WithSuffix(prefix, ".masks"), masks);
}

Graph LoadGraph(const std::filesystem::path& prefix) {
  const auto header_path = WithSuffix(prefix, ".header");
  std::istringstream header(ReadTextFile(header_path));
  std::int64_t num_nodes = -1, dim = -1, classes = 0;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(header, line)) {
    ++lineno;
    const auto trimmed = Trim(line);
    if (trimmed.empty()) continue;
    const auto eq = trimmed.find('=');
    if (eq == std::string_view::npos) {
      throw MalformedInputError(Where(header_path, lineno) + ": expected key=value");
    }
    const auto key = Trim(trimmed.substr(0, eq));
    const auto value = ParseInt(Trim(trimmed.substr(eq + 1)), Where(header_path, lineno));
    if (key == "num_nodes") num_nodes = value;
    else if (key == "d") dim = value;
    else if (key == "K") classes = value;
  }
  const bool has_labels = std::filesystem::exists(WithSuffix(prefix, ".labels")) &&
                          std::filesystem::file_size(WithSuffix(prefix, ".labels")) > 0;
  auto loaded = LoadDataset(WithSuffix(prefix, ".edges"), WithSuffix(prefix, ".features"),
                            has_labels ? WithSuffix(prefix, ".labels") : std::filesystem::path(),
                            WithSuffix(prefix, ".masks"), static_cast<int>(classes));
  if (num_nodes >= 0 && loaded.graph.num_nodes() != num_nodes) {
    throw DimensionError(header_path.string() + ": header num_nodes disagrees with features");
  }
  if (dim >= 0 && loaded.graph.feature_dim() != dim && loaded.graph.num_nodes() > 0) {
    throw DimensionError(header_path.string() + ": header d disagrees with features");
  }
  return loaded.graph;
}

}  // namespace gtrans
