#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "ccw/types.hpp"

namespace ccw {

// Binary user x item matrix with both CSR and CSC access. Indices within a
// row (column) are sorted ascending.
class SparseIncidenceMatrix {
 public:
  SparseIncidenceMatrix() = default;
  // Duplicate edges are collapsed.
  SparseIncidenceMatrix(index_t num_rows, index_t num_cols, std::span<const Edge> edges);

  index_t rows() const { return rows_; }
  index_t cols() const { return cols_; }
  std::size_t nnz() const { return col_index_.size(); }
  double density() const;

  std::span<const index_t> row(index_t u) const {
    return {col_index_.data() + row_ptr_[u], col_index_.data() + row_ptr_[u + 1]};
  }
  std::span<const index_t> col(index_t i) const {
    return {row_index_.data() + col_ptr_[i], row_index_.data() + col_ptr_[i + 1]};
  }
  index_t row_degree(index_t u) const { return static_cast<index_t>(row_ptr_[u + 1] - row_ptr_[u]); }
  index_t col_degree(index_t i) const { return static_cast<index_t>(col_ptr_[i + 1] - col_ptr_[i]); }
  bool contains(index_t u, index_t i) const;

  // Row-major edge list.
  std::vector<Edge> edges() const;

  // y = A x and y = A^T x.
  void multiply(std::span<const double> x, std::span<double> y) const;
  void multiply_transpose(std::span<const double> x, std::span<double> y) const;

 private:
  index_t rows_ = 0;
  index_t cols_ = 0;
  std::vector<std::size_t> row_ptr_{0};
  std::vector<index_t> col_index_;
  std::vector<std::size_t> col_ptr_{0};
  std::vector<index_t> row_index_;
};

struct LoadReport {
  std::size_t train_duplicates_dropped = 0;
  std::size_t test_duplicates_dropped = 0;
  std::size_t test_overlap_dropped = 0;  // test pairs already present in train
  std::size_t empty_test_lines = 0;
};

// Immutable pre-split implicit-feedback dataset over contiguous indices.
class InteractionDataset {
 public:
  InteractionDataset() = default;

  // Validates and builds a dataset from index-space edges. Duplicates are
  // dropped (and counted in report when given). Raw ids default to indices.
  static InteractionDataset from_edges(index_t num_users, index_t num_items,
                                       std::vector<Edge> train, std::vector<Edge> test,
                                       std::vector<std::int64_t> user_raw_ids = {},
                                       std::vector<std::int64_t> item_raw_ids = {},
                                       LoadReport* report = nullptr);

  index_t num_users() const { return num_users_; }
  index_t num_items() const { return num_items_; }
  const std::vector<Edge>& train_edges() const { return train_; }
  const std::vector<Edge>& test_edges() const { return test_; }

  std::span<const index_t> train_items(index_t u) const { return train_adj_[static_cast<std::size_t>(u)]; }
  std::span<const index_t> test_items(index_t u) const { return test_adj_[static_cast<std::size_t>(u)]; }
  bool is_train_pair(index_t u, index_t i) const;

  std::int64_t user_raw_id(index_t u) const { return user_raw_[static_cast<std::size_t>(u)]; }
  std::int64_t item_raw_id(index_t i) const { return item_raw_[static_cast<std::size_t>(i)]; }

  // Users with at least one test item, ascending.
  std::vector<index_t> test_users() const;

  double train_density() const;
  double combined_density() const;

 private:
  index_t num_users_ = 0;
  index_t num_items_ = 0;
  std::vector<Edge> train_;
  std::vector<Edge> test_;
  std::vector<std::vector<index_t>> train_adj_;
  std::vector<std::vector<index_t>> test_adj_;
  std::vector<std::int64_t> user_raw_;
  std::vector<std::int64_t> item_raw_;
};

// Reads the adjacency-list format: "<user> <item> <item> ...", one user per
// line. A trailing ':' on the user id is accepted.
InteractionDataset load_dataset(const std::filesystem::path& train_path,
                                const std::filesystem::path& test_path,
                                LoadReport* report = nullptr);

// Writes both splits back in the same format using raw ids.
void write_dataset(const InteractionDataset& ds, const std::filesystem::path& train_path,
                   const std::filesystem::path& test_path);

SparseIncidenceMatrix incidence_matrix(const InteractionDataset& ds);

// Moves a random fraction of each user's train items (keeping at least one)
// into the test split of the returned dataset; the original test split is
// discarded. Used for validating on a held-out slice of train.
InteractionDataset split_holdout(const InteractionDataset& ds, double fraction, seed_t seed);

}  // namespace ccw
