#include "ccw/sparse_svd.hpp"

#include <algorithm>
#include <cmath>

#include "ccw/log.hpp"
#include "ccw/rng.hpp"

namespace ccw {

ScaledIncidenceOperator::ScaledIncidenceOperator(const SparseIncidenceMatrix& a,
                                                 std::vector<index_t> row_subset,
                                                 std::vector<index_t> col_subset,
                                                 Eigen::VectorXd row_scale, Eigen::VectorXd col_scale)
    : a_(a),
      row_subset_(std::move(row_subset)),
      col_subset_(std::move(col_subset)),
      col_compact_(static_cast<std::size_t>(a.cols()), -1),
      row_scale_(std::move(row_scale)),
      col_scale_(std::move(col_scale)) {
  if (row_scale_.size() != rows() || col_scale_.size() != cols())
    throw std::invalid_argument("scaled operator: scale length mismatch");
  for (std::size_t c = 0; c < col_subset_.size(); ++c)
    col_compact_[static_cast<std::size_t>(col_subset_[c])] = static_cast<index_t>(c);
}

void ScaledIncidenceOperator::apply(const Eigen::MatrixXd& in, Eigen::MatrixXd& out) const {
  const Eigen::Index b = in.cols();
  // Row-major scratch keeps the per-edge inner loop contiguous.
  RowMatrix scaled = col_scale_.asDiagonal() * in;
  RowMatrix acc = RowMatrix::Zero(rows(), b);
  for (Eigen::Index r = 0; r < rows(); ++r) {
    auto dst = acc.row(r);
    for (index_t c : a_.row(row_subset_[static_cast<std::size_t>(r)])) {
      const index_t cc = col_compact_[static_cast<std::size_t>(c)];
      if (cc >= 0) dst += scaled.row(cc);
    }
  }
  out = row_scale_.asDiagonal() * acc;
}

void ScaledIncidenceOperator::apply_transpose(const Eigen::MatrixXd& in, Eigen::MatrixXd& out) const {
  const Eigen::Index b = in.cols();
  RowMatrix scaled = row_scale_.asDiagonal() * in;
  RowMatrix acc = RowMatrix::Zero(cols(), b);
  for (Eigen::Index r = 0; r < rows(); ++r) {
    auto src = scaled.row(r);
    for (index_t c : a_.row(row_subset_[static_cast<std::size_t>(r)])) {
      const index_t cc = col_compact_[static_cast<std::size_t>(c)];
      if (cc >= 0) acc.row(cc) += src;
    }
  }
  out = col_scale_.asDiagonal() * acc;
}

namespace {

Eigen::MatrixXd orthonormalize(const Eigen::MatrixXd& m) {
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(m);
  return qr.householderQ() * Eigen::MatrixXd::Identity(m.rows(), m.cols());
}

}  // namespace

TruncatedSvd truncated_svd(const LinearOperator& op, const TruncatedSvdOptions& options) {
  const Eigen::Index m = op.rows();
  const Eigen::Index n = op.cols();
  const Eigen::Index full = std::min(m, n);
  if (options.rank < 1 || options.rank > full)
    throw std::invalid_argument("truncated_svd: rank must be in [1, min(rows, cols)]");
  const Eigen::Index rank = options.rank;
  const Eigen::Index block = std::min<Eigen::Index>(full, rank + std::max(options.oversample, 0));

  Rng rng(options.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd v(n, block);
  for (Eigen::Index j = 0; j < block; ++j)
    for (Eigen::Index i = 0; i < n; ++i) v(i, j) = normal(rng);
  v = orthonormalize(v);

  TruncatedSvd out;
  Eigen::MatrixXd y(m, block);
  Eigen::MatrixXd z(n, block);
  Eigen::MatrixXd u;
  Eigen::VectorXd sigma;
  bool have_ritz = false;

  for (int it = 1; it <= options.max_iterations + 1; ++it) {
    op.apply(v, y);
    if (have_ritz) {
      // A^T u = s v holds exactly for the Ritz pairs, so only the left
      // residual needs checking.
      Eigen::VectorXd res(rank);
      for (Eigen::Index j = 0; j < rank; ++j) res(j) = (y.col(j) - sigma(j) * u.col(j)).norm();
      out.residuals = res;
      out.iterations = it - 1;
      if (res.maxCoeff() <= options.tolerance) {
        out.converged = true;
        break;
      }
      if (it > options.max_iterations) break;
    }
    Eigen::MatrixXd qu = orthonormalize(y);
    op.apply_transpose(qu, z);
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(z);
    Eigen::MatrixXd qv = qr.householderQ() * Eigen::MatrixXd::Identity(n, block);
    Eigen::MatrixXd r = qr.matrixQR().topRows(block).triangularView<Eigen::Upper>();
    // qu^T A = r^T qv^T
    Eigen::JacobiSVD<Eigen::MatrixXd> small(r.transpose(), Eigen::ComputeFullU | Eigen::ComputeFullV);
    u = qu * small.matrixU();
    v = qv * small.matrixV();
    sigma = small.singularValues();
    have_ritz = true;
  }
  if (!out.converged) {
    log::warn("truncated_svd: not converged after ", options.max_iterations,
              " iterations (max residual ", out.residuals.size() ? out.residuals.maxCoeff() : -1.0, ")");
  }

  out.singular_values = sigma.head(rank);
  out.left = u.leftCols(rank);
  out.right = v.leftCols(rank);
  for (Eigen::Index j = 0; j < rank; ++j) {
    Eigen::Index arg = 0;
    out.left.col(j).cwiseAbs().maxCoeff(&arg);
    if (out.left(arg, j) < 0) {
      out.left.col(j) *= -1.0;
      out.right.col(j) *= -1.0;
    }
  }
  return out;
}

}  // namespace ccw
