#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

namespace gtrans {

// Dense matrices are row-major: one row per node.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

using NodeId = std::int64_t;
using EdgeId = std::int64_t;

// Undirected edge stored canonically with u < v.
struct Edge {
  NodeId u = 0;
  NodeId v = 0;

  friend bool operator==(const Edge&, const Edge&) = default;
  friend auto operator<=>(const Edge&, const Edge&) = default;
};

using EdgeList = std::vector<Edge>;

enum class Split : std::uint8_t { kNone = 0, kTrain, kVal, kTest };

}  // namespace gtrans
