#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ccw/types.hpp"

namespace ccw {

enum class BaseVariant : std::uint32_t { plain_mf = 0, graph_propagated = 1 };

std::string_view to_string(BaseVariant v);
BaseVariant parse_base_variant(std::string_view name);

// Symmetric degree-normalized adjacency of a bipartite graph, 1/sqrt(du di)
// per edge. Nodes without edges propagate nothing.
class BipartiteGraph {
 public:
  BipartiteGraph() = default;
  BipartiteGraph(index_t num_users, index_t num_items, std::span<const Edge> edges);

  index_t num_users() const { return num_users_; }
  index_t num_items() const { return num_items_; }
  std::size_t num_edges() const { return user_nbr_.size(); }

  // One step over the stacked [users; items] block: new users gather from
  // items and new items gather from users.
  void propagate(const RowMatrix& users, const RowMatrix& items, RowMatrix& out_users, RowMatrix& out_items) const;
  // Structural version of propagate: marks nodes adjacent to marked nodes.
  void propagate_marks(const std::vector<char>& users, const std::vector<char>& items, std::vector<char>& out_users,
                       std::vector<char>& out_items) const;

 private:
  index_t num_users_ = 0;
  index_t num_items_ = 0;
  std::vector<std::size_t> user_ptr_{0};
  std::vector<index_t> user_nbr_;
  std::vector<double> user_w_;
  std::vector<std::size_t> item_ptr_{0};
  std::vector<index_t> item_nbr_;
  std::vector<double> item_w_;
};

// Per-row gradient accumulator sized like a pair of embedding tables. Only
// rows flagged as touched may be nonzero.
class TableGradient {
 public:
  TableGradient() = default;
  TableGradient(index_t num_users, index_t num_items, int dim);

  RowMatrix users;
  RowMatrix items;

  auto user_row(index_t u) {
    touch_user(u);
    return users.row(u);
  }
  auto item_row(index_t i) {
    touch_item(i);
    return items.row(i);
  }
  void touch_user(index_t u);
  void touch_item(index_t i);
  const std::vector<index_t>& touched_users() const { return touched_users_; }
  const std::vector<index_t>& touched_items() const { return touched_items_; }
  bool user_touched(index_t u) const { return user_flag_[static_cast<std::size_t>(u)] != 0; }
  bool item_touched(index_t i) const { return item_flag_[static_cast<std::size_t>(i)] != 0; }
  const std::vector<char>& user_flags() const { return user_flag_; }
  const std::vector<char>& item_flags() const { return item_flag_; }

  // Replaces the touched sets with the given flags (entries outside are zero).
  void set_touched(std::vector<char> user_flags, std::vector<char> item_flags);
  // Zeroes touched rows and forgets them.
  void clear();

 private:
  std::vector<char> user_flag_;
  std::vector<char> item_flag_;
  std::vector<index_t> touched_users_;
  std::vector<index_t> touched_items_;
};

// Final (scoring) embeddings of a model. For plain MF these alias the
// tables; for the propagated variant they are owned.
class FinalEmbeddings {
 public:
  static FinalEmbeddings alias(const RowMatrix& users, const RowMatrix& items) {
    FinalEmbeddings f;
    f.users_ = &users;
    f.items_ = &items;
    return f;
  }
  static FinalEmbeddings own(RowMatrix users, RowMatrix items) {
    FinalEmbeddings f;
    f.own_users_ = std::move(users);
    f.own_items_ = std::move(items);
    f.owned_ = true;
    return f;
  }

  const RowMatrix& users() const { return owned_ ? own_users_ : *users_; }
  const RowMatrix& items() const { return owned_ ? own_items_ : *items_; }

 private:
  const RowMatrix* users_ = nullptr;
  const RowMatrix* items_ = nullptr;
  RowMatrix own_users_;
  RowMatrix own_items_;
  bool owned_ = false;
};

// User/item embedding tables plus the edge set the model propagates over.
class EmbeddingModel {
 public:
  EmbeddingModel() = default;
  EmbeddingModel(index_t num_users, index_t num_items, int dim, BaseVariant variant, int layers, seed_t seed);

  index_t num_users() const { return static_cast<index_t>(users_.rows()); }
  index_t num_items() const { return static_cast<index_t>(items_.rows()); }
  int dim() const { return static_cast<int>(users_.cols()); }
  BaseVariant variant() const { return variant_; }
  int layers() const { return layers_; }
  seed_t seed() const { return seed_; }

  RowMatrix& user_table() { return users_; }
  RowMatrix& item_table() { return items_; }
  const RowMatrix& user_table() const { return users_; }
  const RowMatrix& item_table() const { return items_; }

  void set_edge_scope(std::span<const Edge> edges);
  const BipartiteGraph& graph() const { return graph_; }
  std::size_t num_edges() const { return graph_.num_edges(); }
  // True when scoring embeddings are the raw table rows.
  bool is_identity() const { return variant_ == BaseVariant::plain_mf || layers_ == 0; }

  FinalEmbeddings forward() const;
  // Maps a gradient w.r.t. final embeddings onto the tables. For an identity
  // model this copies; touched sets follow the graph structure.
  void backward(const TableGradient& final_grad, TableGradient& table_grad) const;

  Eigen::RowVectorXd embed(NodeRef node) const;
  double score(index_t u, index_t i) const;

  bool all_finite() const { return users_.allFinite() && items_.allFinite(); }

 private:
  RowMatrix users_;
  RowMatrix items_;
  BaseVariant variant_ = BaseVariant::plain_mf;
  int layers_ = 0;
  seed_t seed_ = 0;
  BipartiteGraph graph_;
};

// Tables drawn i.i.d. from Normal(0, 0.01^2).
EmbeddingModel init_model(index_t num_users, index_t num_items, int dim, BaseVariant variant, seed_t seed,
                          int layers = 3);

}  // namespace ccw
