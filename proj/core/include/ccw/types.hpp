#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace ccw {

using index_t = std::int32_t;
using seed_t = std::uint64_t;

// Row-major so that a node's embedding is a contiguous row.
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

struct Edge {
  index_t user;
  index_t item;

  friend bool operator==(const Edge&, const Edge&) = default;
  friend auto operator<=>(const Edge&, const Edge&) = default;
};

enum class NodeKind : std::uint8_t { user, item };

struct NodeRef {
  NodeKind kind;
  index_t index;

  static NodeRef user(index_t i) { return {NodeKind::user, i}; }
  static NodeRef item(index_t i) { return {NodeKind::item, i}; }
};

// Malformed or inconsistent input data.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid configuration values or flag combinations.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Non-finite values appeared during optimization.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace ccw
