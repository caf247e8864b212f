#pragma once

#include <Eigen/Dense>

#include "ccw/corpus.hpp"
#include "ccw/types.hpp"

namespace ccw {

// Abstract real matrix accessed through block products only.
class LinearOperator {
 public:
  virtual ~LinearOperator() = default;
  virtual Eigen::Index rows() const = 0;
  virtual Eigen::Index cols() const = 0;
  // out = A * in   (in: cols x b, out: rows x b)
  virtual void apply(const Eigen::MatrixXd& in, Eigen::MatrixXd& out) const = 0;
  // out = A^T * in (in: rows x b, out: cols x b)
  virtual void apply_transpose(const Eigen::MatrixXd& in, Eigen::MatrixXd& out) const = 0;
};

// diag(row_scale) * A[rows, cols] * diag(col_scale) over a row/column subset
// of a binary incidence matrix. Subsets are given as compact->original maps.
class ScaledIncidenceOperator final : public LinearOperator {
 public:
  ScaledIncidenceOperator(const SparseIncidenceMatrix& a, std::vector<index_t> row_subset,
                          std::vector<index_t> col_subset, Eigen::VectorXd row_scale,
                          Eigen::VectorXd col_scale);

  Eigen::Index rows() const override { return static_cast<Eigen::Index>(row_subset_.size()); }
  Eigen::Index cols() const override { return static_cast<Eigen::Index>(col_subset_.size()); }
  void apply(const Eigen::MatrixXd& in, Eigen::MatrixXd& out) const override;
  void apply_transpose(const Eigen::MatrixXd& in, Eigen::MatrixXd& out) const override;

 private:
  const SparseIncidenceMatrix& a_;
  std::vector<index_t> row_subset_;
  std::vector<index_t> col_subset_;
  std::vector<index_t> col_compact_;  // original column -> compact index or -1
  Eigen::VectorXd row_scale_;
  Eigen::VectorXd col_scale_;
};

struct TruncatedSvdOptions {
  int rank = 2;
  int oversample = 10;
  double tolerance = 1e-8;  // on ||A v - s u|| for each requested pair
  int max_iterations = 300;
  seed_t seed = 0;
};

struct TruncatedSvd {
  Eigen::VectorXd singular_values;  // descending
  Eigen::MatrixXd left;             // rows x rank
  Eigen::MatrixXd right;            // cols x rank
  Eigen::VectorXd residuals;
  int iterations = 0;
  bool converged = false;
};

// Leading singular triplets by block subspace iteration with a Rayleigh-Ritz
// projection after every sweep. Signs are fixed so that the largest-magnitude
// entry of each left vector is positive.
TruncatedSvd truncated_svd(const LinearOperator& op, const TruncatedSvdOptions& options);

}  // namespace ccw
