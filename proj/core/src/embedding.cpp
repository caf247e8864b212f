#include "ccw/embedding.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "ccw/rng.hpp"

namespace ccw {

std::string_view to_string(BaseVariant v) {
  switch (v) {
    case BaseVariant::plain_mf: return "mf";
    case BaseVariant::graph_propagated: return "propagated";
  }
  return "?";
}

BaseVariant parse_base_variant(std::string_view name) {
  if (name == "mf" || name == "plain-mf" || name == "plain_mf") return BaseVariant::plain_mf;
  if (name == "propagated" || name == "graph-propagated" || name == "graph_propagated")
    return BaseVariant::graph_propagated;
  throw ConfigError("unknown base variant '" + std::string(name) + "' (expected mf or propagated)");
}

BipartiteGraph::BipartiteGraph(index_t num_users, index_t num_items, std::span<const Edge> edges)
    : num_users_(num_users), num_items_(num_items) {
  std::vector<Edge> sorted(edges.begin(), edges.end());
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  std::vector<std::size_t> udeg(static_cast<std::size_t>(num_users), 0);
  std::vector<std::size_t> ideg(static_cast<std::size_t>(num_items), 0);
  for (const Edge& e : sorted) {
    if (e.user < 0 || e.user >= num_users || e.item < 0 || e.item >= num_items)
      throw std::invalid_argument("bipartite graph: edge out of range");
    ++udeg[static_cast<std::size_t>(e.user)];
    ++ideg[static_cast<std::size_t>(e.item)];
  }
  user_ptr_.assign(static_cast<std::size_t>(num_users) + 1, 0);
  item_ptr_.assign(static_cast<std::size_t>(num_items) + 1, 0);
  for (index_t u = 0; u < num_users; ++u) user_ptr_[static_cast<std::size_t>(u) + 1] = user_ptr_[static_cast<std::size_t>(u)] + udeg[static_cast<std::size_t>(u)];
  for (index_t i = 0; i < num_items; ++i) item_ptr_[static_cast<std::size_t>(i) + 1] = item_ptr_[static_cast<std::size_t>(i)] + ideg[static_cast<std::size_t>(i)];
  user_nbr_.resize(sorted.size());
  user_w_.resize(sorted.size());
  item_nbr_.resize(sorted.size());
  item_w_.resize(sorted.size());
  std::vector<std::size_t> ufill(user_ptr_.begin(), user_ptr_.end() - 1);
  std::vector<std::size_t> ifill(item_ptr_.begin(), item_ptr_.end() - 1);
  for (const Edge& e : sorted) {
    const double w = 1.0 / std::sqrt(static_cast<double>(udeg[static_cast<std::size_t>(e.user)]) *
                                     static_cast<double>(ideg[static_cast<std::size_t>(e.item)]));
    const std::size_t a = ufill[static_cast<std::size_t>(e.user)]++;
    user_nbr_[a] = e.item;
    user_w_[a] = w;
    const std::size_t b = ifill[static_cast<std::size_t>(e.item)]++;
    item_nbr_[b] = e.user;
    item_w_[b] = w;
  }
}

void BipartiteGraph::propagate(const RowMatrix& users, const RowMatrix& items, RowMatrix& out_users,
                               RowMatrix& out_items) const {
  out_users.setZero(users.rows(), users.cols());
  out_items.setZero(items.rows(), items.cols());
  for (index_t u = 0; u < num_users_; ++u) {
    auto dst = out_users.row(u);
    for (std::size_t e = user_ptr_[static_cast<std::size_t>(u)]; e < user_ptr_[static_cast<std::size_t>(u) + 1]; ++e)
      dst += user_w_[e] * items.row(user_nbr_[e]);
  }
  for (index_t i = 0; i < num_items_; ++i) {
    auto dst = out_items.row(i);
    for (std::size_t e = item_ptr_[static_cast<std::size_t>(i)]; e < item_ptr_[static_cast<std::size_t>(i) + 1]; ++e)
      dst += item_w_[e] * users.row(item_nbr_[e]);
  }
}

void BipartiteGraph::propagate_marks(const std::vector<char>& users, const std::vector<char>& items,
                                     std::vector<char>& out_users, std::vector<char>& out_items) const {
  out_users.assign(static_cast<std::size_t>(num_users_), 0);
  out_items.assign(static_cast<std::size_t>(num_items_), 0);
  for (index_t u = 0; u < num_users_; ++u) {
    if (!users[static_cast<std::size_t>(u)]) continue;
    for (std::size_t e = user_ptr_[static_cast<std::size_t>(u)]; e < user_ptr_[static_cast<std::size_t>(u) + 1]; ++e)
      out_items[static_cast<std::size_t>(user_nbr_[e])] = 1;
  }
  for (index_t i = 0; i < num_items_; ++i) {
    if (!items[static_cast<std::size_t>(i)]) continue;
    for (std::size_t e = item_ptr_[static_cast<std::size_t>(i)]; e < item_ptr_[static_cast<std::size_t>(i) + 1]; ++e)
      out_users[static_cast<std::size_t>(item_nbr_[e])] = 1;
  }
}

TableGradient::TableGradient(index_t num_users, index_t num_items, int dim)
    : users(RowMatrix::Zero(num_users, dim)),
      items(RowMatrix::Zero(num_items, dim)),
      user_flag_(static_cast<std::size_t>(num_users), 0),
      item_flag_(static_cast<std::size_t>(num_items), 0) {}

void TableGradient::touch_user(index_t u) {
  char& f = user_flag_[static_cast<std::size_t>(u)];
  if (!f) {
    f = 1;
    touched_users_.push_back(u);
  }
}

void TableGradient::touch_item(index_t i) {
  char& f = item_flag_[static_cast<std::size_t>(i)];
  if (!f) {
    f = 1;
    touched_items_.push_back(i);
  }
}

void TableGradient::set_touched(std::vector<char> user_flags, std::vector<char> item_flags) {
  user_flag_ = std::move(user_flags);
  item_flag_ = std::move(item_flags);
  touched_users_.clear();
  touched_items_.clear();
  for (std::size_t u = 0; u < user_flag_.size(); ++u)
    if (user_flag_[u]) touched_users_.push_back(static_cast<index_t>(u));
  for (std::size_t i = 0; i < item_flag_.size(); ++i)
    if (item_flag_[i]) touched_items_.push_back(static_cast<index_t>(i));
}

void TableGradient::clear() {
  for (index_t u : touched_users_) {
    users.row(u).setZero();
    user_flag_[static_cast<std::size_t>(u)] = 0;
  }
  for (index_t i : touched_items_) {
    items.row(i).setZero();
    item_flag_[static_cast<std::size_t>(i)] = 0;
  }
  touched_users_.clear();
  touched_items_.clear();
}

EmbeddingModel::EmbeddingModel(index_t num_users, index_t num_items, int dim, BaseVariant variant, int layers,
                               seed_t seed)
    : users_(RowMatrix::Zero(num_users, dim)),
      items_(RowMatrix::Zero(num_items, dim)),
      variant_(variant),
      layers_(variant == BaseVariant::plain_mf ? 0 : layers),
      seed_(seed),
      graph_(num_users, num_items, {}) {
  if (dim < 1) throw std::invalid_argument("embedding model: dim must be >= 1");
  if (num_users < 0 || num_items < 0) throw std::invalid_argument("embedding model: negative size");
  if (layers < 0) throw std::invalid_argument("embedding model: layers must be >= 0");
}

void EmbeddingModel::set_edge_scope(std::span<const Edge> edges) {
  graph_ = BipartiteGraph(num_users(), num_items(), edges);
}

FinalEmbeddings EmbeddingModel::forward() const {
  if (is_identity()) return FinalEmbeddings::alias(users_, items_);
  RowMatrix acc_u = users_;
  RowMatrix acc_i = items_;
  RowMatrix hu = users_;
  RowMatrix hi = items_;
  RowMatrix nu;
  RowMatrix ni;
  for (int l = 0; l < layers_; ++l) {
    graph_.propagate(hu, hi, nu, ni);
    acc_u += nu;
    acc_i += ni;
    std::swap(hu, nu);
    std::swap(hi, ni);
  }
  const double scale = 1.0 / static_cast<double>(layers_ + 1);
  acc_u *= scale;
  acc_i *= scale;
  return FinalEmbeddings::own(std::move(acc_u), std::move(acc_i));
}

void EmbeddingModel::backward(const TableGradient& final_grad, TableGradient& table_grad) const {
  if (is_identity()) {
    for (index_t u : final_grad.touched_users()) table_grad.user_row(u) += final_grad.users.row(u);
    for (index_t i : final_grad.touched_items()) table_grad.item_row(i) += final_grad.items.row(i);
    return;
  }
  // The normalized adjacency is symmetric, so the adjoint of the layer
  // average is the same layer average applied to the gradient.
  RowMatrix acc_u = final_grad.users;
  RowMatrix acc_i = final_grad.items;
  RowMatrix hu = final_grad.users;
  RowMatrix hi = final_grad.items;
  RowMatrix nu;
  RowMatrix ni;
  std::vector<char> mark_u = final_grad.user_flags();
  std::vector<char> mark_i = final_grad.item_flags();
  std::vector<char> reach_u = mark_u;
  std::vector<char> reach_i = mark_i;
  std::vector<char> next_u;
  std::vector<char> next_i;
  for (int l = 0; l < layers_; ++l) {
    graph_.propagate(hu, hi, nu, ni);
    acc_u += nu;
    acc_i += ni;
    std::swap(hu, nu);
    std::swap(hi, ni);
    graph_.propagate_marks(mark_u, mark_i, next_u, next_i);
    for (std::size_t u = 0; u < reach_u.size(); ++u) reach_u[u] |= next_u[u];
    for (std::size_t i = 0; i < reach_i.size(); ++i) reach_i[i] |= next_i[i];
    std::swap(mark_u, next_u);
    std::swap(mark_i, next_i);
  }
  const double scale = 1.0 / static_cast<double>(layers_ + 1);
  for (std::size_t u = 0; u < reach_u.size(); ++u)
    if (reach_u[u] || table_grad.user_touched(static_cast<index_t>(u))) reach_u[u] = 1;
  for (std::size_t i = 0; i < reach_i.size(); ++i)
    if (reach_i[i] || table_grad.item_touched(static_cast<index_t>(i))) reach_i[i] = 1;
  table_grad.users += scale * acc_u;
  table_grad.items += scale * acc_i;
  table_grad.set_touched(std::move(reach_u), std::move(reach_i));
}

Eigen::RowVectorXd EmbeddingModel::embed(NodeRef node) const {
  const index_t limit = node.kind == NodeKind::user ? num_users() : num_items();
  if (node.index < 0 || node.index >= limit) throw std::invalid_argument("embed: node index out of range");
  if (is_identity()) return node.kind == NodeKind::user ? users_.row(node.index) : items_.row(node.index);
  const FinalEmbeddings f = forward();
  return node.kind == NodeKind::user ? f.users().row(node.index) : f.items().row(node.index);
}

double EmbeddingModel::score(index_t u, index_t i) const {
  if (is_identity()) {
    if (u < 0 || u >= num_users() || i < 0 || i >= num_items()) throw std::invalid_argument("score: index out of range");
    return users_.row(u).dot(items_.row(i));
  }
  return embed(NodeRef::user(u)).dot(embed(NodeRef::item(i)));
}

EmbeddingModel init_model(index_t num_users, index_t num_items, int dim, BaseVariant variant, seed_t seed,
                          int layers) {
  EmbeddingModel m(num_users, num_items, dim, variant, layers, seed);
  Rng rng(seed);
  std::normal_distribution<double> normal(0.0, 0.01);
  for (Eigen::Index r = 0; r < m.user_table().rows(); ++r)
    for (Eigen::Index c = 0; c < m.user_table().cols(); ++c) m.user_table()(r, c) = normal(rng);
  for (Eigen::Index r = 0; r < m.item_table().rows(); ++r)
    for (Eigen::Index c = 0; c < m.item_table().cols(); ++c) m.item_table()(r, c) = normal(rng);
  return m;
}

}  // namespace ccw
