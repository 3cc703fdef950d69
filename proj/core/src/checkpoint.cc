#include "gtrans/checkpoint.h"

#include <sstream>
#include <vector>

#include "gtrans/errors.h"
#include "gtrans/graph_io.h"

namespace gtrans {
namespace {

void AppendBlock(std::string& out, const char* name, const Matrix& m) {
  out += name;
  out += "\n";
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j > 0) out += ",";
      out += FormatReal(m(i, j));
    }
    out += "\n";
  }
}

std::vector<double> ParseRow(const std::string& line) {
  std::vector<double> row;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    row.push_back(ParseReal(std::string_view(line).substr(
        start, comma == std::string::npos ? std::string::npos : comma - start)));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return row;
}

Matrix ReadBlock(std::istream& in, const char* name, Eigen::Index rows, Eigen::Index cols) {
  std::string line;
  if (!std::getline(in, line) || line != name) {
    throw MalformedInputError(std::string("checkpoint: expected block ") + name);
  }
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    if (!std::getline(in, line)) {
      throw MalformedInputError(std::string("checkpoint: block ") + name + " is truncated");
    }
    const auto row = ParseRow(line);
    if (static_cast<Eigen::Index>(row.size()) != cols) {
      throw MalformedInputError(std::string("checkpoint: block ") + name + " row has wrong length");
    }
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = row[j];
  }
  return m;
}

}  // namespace

std::string SerializeModel(const GcnModel& model) {
  std::string out;
  out += "kind=" + std::string(ModelKindName(model.kind)) + "\n";
  out += "d=" + std::to_string(model.input_dim()) + "\n";
  out += "h=" + std::to_string(model.hidden_dim()) + "\n";
  out += "K=" + std::to_string(model.num_classes()) + "\n";
  out += "dropout=" + FormatReal(model.dropout_rate) + "\n";
  AppendBlock(out, "W1", model.w1);
  AppendBlock(out, "b1", model.b1.transpose());
  AppendBlock(out, "W2", model.w2);
  AppendBlock(out, "b2", model.b2.transpose());
  return out;
}

GcnModel ParseModel(const std::string& text) {
  std::istringstream in(text);
  GcnModel model;
  Eigen::Index d = -1, h = -1, k = -1;
  std::string line;
  for (int i = 0; i < 5; ++i) {
    if (!std::getline(in, line)) throw MalformedInputError("checkpoint: truncated header");
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw MalformedInputError("checkpoint: bad header line '" + line + "'");
    const std::string key = line.substr(0, eq);
    const std::string value = line.substr(eq + 1);
    if (key == "kind") model.kind = ParseModelKind(value);
    else if (key == "d") d = std::stol(value);
    else if (key == "h") h = std::stol(value);
    else if (key == "K") k = std::stol(value);
    else if (key == "dropout") model.dropout_rate = ParseReal(value);
    else throw MalformedInputError("checkpoint: unknown header key '" + key + "'");
  }
  if (d < 1 || h < 1 || k < 1) throw MalformedInputError("checkpoint: missing dimensions");
  model.w1 = ReadBlock(in, "W1", d, h);
  model.b1 = ReadBlock(in, "b1", 1, h).transpose();
  model.w2 = ReadBlock(in, "W2", h, k);
  model.b2 = ReadBlock(in, "b2", 1, k).transpose();
  model.Validate();
  return model;
}

void SaveModel(const GcnModel& model, const std::filesystem::path& path) {
  WriteTextFile(path, SerializeModel(model));
}

GcnModel LoadModel(const std::filesystem::path& path) { return ParseModel(ReadTextFile(path)); }

std::uint64_t Fnv1a(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t ModelFingerprint(const GcnModel& model) { return Fnv1a(SerializeModel(model)); }

}  // namespace gtrans
