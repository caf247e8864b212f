#include "ccw/wrapper.hpp"

#include <cmath>
#include <limits>
#include <random>

#include "ccw/log.hpp"
#include "ccw/rng.hpp"

namespace ccw {

std::string_view to_string(ScoreMode m) {
  switch (m) {
    case ScoreMode::with_lic: return "with-lic";
    case ScoreMode::equal_weight: return "equal-weight";
    case ScoreMode::base_only: return "base-only";
  }
  return "?";
}

ScoreMode parse_score_mode(std::string_view name) {
  if (name == "with-lic" || name == "lic" || name == "ccw") return ScoreMode::with_lic;
  if (name == "equal-weight" || name == "equal" || name == "1:1") return ScoreMode::equal_weight;
  if (name == "base-only" || name == "base") return ScoreMode::base_only;
  throw ConfigError("unknown score mode '" + std::string(name) + "' (expected with-lic, equal-weight or base-only)");
}

double LicNetwork::evaluate(const Eigen::Ref<const Eigen::RowVectorXd>& global,
                            const Eigen::Ref<const Eigen::RowVectorXd>& local, Eigen::RowVectorXd* pre) const {
  const auto gd = global.size();
  Eigen::RowVectorXd h = global * w1.topRows(gd) + local * w1.bottomRows(w1.rows() - gd) + b1.transpose();
  if (pre) *pre = h;
  return h.cwiseMax(0.0).dot(w2) + b2;
}

LicNetwork LicNetwork::init(int global_dim, int local_dim, int hidden_dim, seed_t seed) {
  const int in = global_dim + local_dim;
  LicNetwork net;
  net.w1.resize(in, hidden_dim);
  Rng rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0 / std::sqrt(static_cast<double>(in)));
  for (Eigen::Index r = 0; r < net.w1.rows(); ++r)
    for (Eigen::Index c = 0; c < net.w1.cols(); ++c) net.w1(r, c) = normal(rng);
  net.b1 = Vector::Zero(hidden_dim);
  net.w2 = Vector::Zero(hidden_dim);
  net.b2 = 1.0;
  return net;
}

CCWModel assemble_ccw(const InteractionDataset& ds, const CoClustering& cc, BaseVariant variant,
                      const AssembleOptions& options, seed_t seed) {
  if (cc.num_users() != ds.num_users() || cc.num_items() != ds.num_items())
    throw std::invalid_argument("assemble_ccw: clustering does not match dataset");
  if (options.dim < 1) throw ConfigError("assemble_ccw: dim must be >= 1");
  const int local_dim = options.local_dim > 0 ? options.local_dim : options.dim;
  const int hidden = options.lic_hidden > 0 ? options.lic_hidden : options.dim;

  CCWModel m;
  m.mode = options.mode;
  m.clustering = cc.has_subgraphs() ? cc : build_subgraphs(incidence_matrix(ds), cc);
  m.global = init_model(ds.num_users(), ds.num_items(), options.dim, variant, derive_seed(seed, "global"),
                        options.layers);
  m.global.set_edge_scope(ds.train_edges());
  const seed_t local_root = derive_seed(seed, "local");
  for (int c = 0; c < m.clustering.k; ++c) {
    const Subgraph& g = m.clustering.subgraphs[static_cast<std::size_t>(c)];
    EmbeddingModel local = init_model(static_cast<index_t>(g.users.size()), static_cast<index_t>(g.items.size()),
                                      local_dim, variant, derive_seed(local_root, static_cast<std::uint64_t>(c)),
                                      options.layers);
    local.set_edge_scope(g.local_edges);
    if (g.users.empty() || g.items.empty()) {
      m.inert_clusters.push_back(c);
      log::warn("cluster ", c, " has ", g.users.size(), " users and ", g.items.size(),
                " items; its local model has no trainable pairs");
    }
    m.locals.push_back(std::move(local));
  }
  m.lic = LicNetwork::init(options.dim, local_dim, hidden, derive_seed(seed, "lic"));
  return m;
}

CCWScorer::CCWScorer(const CCWModel& model) : model_(model), global_(model.global.forward()) {
  const CoClustering& cc = model.clustering;
  if (!cc.has_subgraphs()) throw std::invalid_argument("CCWScorer: clustering lacks subgraphs");
  locals_.reserve(model.locals.size());
  for (const EmbeddingModel& l : model.locals) locals_.push_back(l.forward());
  lic_users_ = Vector::Ones(model.num_users());
  lic_items_ = Vector::Ones(model.num_items());
  if (model.mode == ScoreMode::with_lic) {
    for (index_t u = 0; u < model.num_users(); ++u) {
      const auto& lf = locals_[static_cast<std::size_t>(cc.cluster_of_user(u))];
      lic_users_(u) = model.lic.evaluate(global_.users().row(u), lf.users().row(cc.user_local[static_cast<std::size_t>(u)]));
    }
    for (index_t i = 0; i < model.num_items(); ++i) {
      const auto& lf = locals_[static_cast<std::size_t>(cc.cluster_of_item(i))];
      lic_items_(i) = model.lic.evaluate(global_.items().row(i), lf.items().row(cc.item_local[static_cast<std::size_t>(i)]));
    }
  }
  for (int c = 0; c < cc.k; ++c) {
    const Subgraph& g = cc.subgraphs[static_cast<std::size_t>(c)];
    RowMatrix su = locals_[static_cast<std::size_t>(c)].users();
    RowMatrix si = locals_[static_cast<std::size_t>(c)].items();
    for (std::size_t r = 0; r < g.users.size(); ++r) su.row(static_cast<Eigen::Index>(r)) *= lic_users_(g.users[r]);
    for (std::size_t r = 0; r < g.items.size(); ++r) si.row(static_cast<Eigen::Index>(r)) *= lic_items_(g.items[r]);
    scaled_users_.push_back(std::move(su));
    scaled_items_.push_back(std::move(si));
  }
}

double CCWScorer::lic(NodeRef node) const {
  return node.kind == NodeKind::user ? lic_users_(node.index) : lic_items_(node.index);
}

Eigen::RowVectorXd CCWScorer::local_embedding(NodeRef node) const {
  const CoClustering& cc = model_.clustering;
  if (node.kind == NodeKind::user) {
    return locals_[static_cast<std::size_t>(cc.cluster_of_user(node.index))].users().row(
        cc.user_local[static_cast<std::size_t>(node.index)]);
  }
  return locals_[static_cast<std::size_t>(cc.cluster_of_item(node.index))].items().row(
      cc.item_local[static_cast<std::size_t>(node.index)]);
}

double CCWScorer::score(index_t u, index_t i) const {
  if (u < 0 || u >= model_.num_users() || i < 0 || i >= model_.num_items())
    throw std::invalid_argument("rank_score: index out of range");
  double s = global_.users().row(u).dot(global_.items().row(i));
  const CoClustering& cc = model_.clustering;
  if (model_.mode == ScoreMode::base_only || !cc.same_cluster(u, i)) return s;
  const auto c = static_cast<std::size_t>(cc.cluster_of_user(u));
  s += scaled_users_[c].row(cc.user_local[static_cast<std::size_t>(u)])
           .dot(scaled_items_[c].row(cc.item_local[static_cast<std::size_t>(i)]));
  return s;
}

RowMatrix CCWScorer::rating_block(std::span<const index_t> users, const InteractionDataset* mask,
                                  std::size_t cell_budget) const {
  if (users.empty()) throw std::invalid_argument("rating_matrix: empty user subset");
  const std::size_t cells = users.size() * static_cast<std::size_t>(model_.num_items());
  if (cells > cell_budget) {
    throw std::length_error("rating_matrix: block of " + std::to_string(cells) + " cells exceeds budget of " +
                            std::to_string(cell_budget) + "; score users in smaller batches");
  }
  const auto nu = static_cast<Eigen::Index>(users.size());
  RowMatrix gu(nu, global_.users().cols());
  for (Eigen::Index r = 0; r < nu; ++r) {
    const index_t u = users[static_cast<std::size_t>(r)];
    if (u < 0 || u >= model_.num_users()) throw std::invalid_argument("rating_matrix: user out of range");
    gu.row(r) = global_.users().row(u);
  }
  RowMatrix block = gu * global_.items().transpose();
  const CoClustering& cc = model_.clustering;
  if (model_.mode != ScoreMode::base_only) {
    for (Eigen::Index r = 0; r < nu; ++r) {
      const index_t u = users[static_cast<std::size_t>(r)];
      const auto c = static_cast<std::size_t>(cc.cluster_of_user(u));
      const Subgraph& g = cc.subgraphs[c];
      if (g.items.empty()) continue;
      const Eigen::RowVectorXd local =
          scaled_users_[c].row(cc.user_local[static_cast<std::size_t>(u)]) * scaled_items_[c].transpose();
      for (std::size_t j = 0; j < g.items.size(); ++j) block(r, g.items[j]) += local(static_cast<Eigen::Index>(j));
    }
  }
  if (mask) {
    constexpr double ninf = -std::numeric_limits<double>::infinity();
    for (Eigen::Index r = 0; r < nu; ++r)
      for (index_t i : mask->train_items(users[static_cast<std::size_t>(r)])) block(r, i) = ninf;
  }
  return block;
}

double lic(const CCWModel& model, NodeRef node) {
  const auto& cc = model.clustering;
  const FinalEmbeddings global = model.global.forward();
  if (node.kind == NodeKind::user) {
    const auto c = static_cast<std::size_t>(cc.cluster_of_user(node.index));
    const FinalEmbeddings local = model.locals[c].forward();
    return model.lic.evaluate(global.users().row(node.index),
                              local.users().row(cc.user_local[static_cast<std::size_t>(node.index)]));
  }
  const auto c = static_cast<std::size_t>(cc.cluster_of_item(node.index));
  const FinalEmbeddings local = model.locals[c].forward();
  return model.lic.evaluate(global.items().row(node.index),
                            local.items().row(cc.item_local[static_cast<std::size_t>(node.index)]));
}

double rank_score(const CCWModel& model, index_t u, index_t i) { return CCWScorer(model).score(u, i); }

RowMatrix rating_matrix(const CCWModel& model, std::span<const index_t> users, const InteractionDataset* mask,
                        std::size_t cell_budget) {
  return CCWScorer(model).rating_block(users, mask, cell_budget);
}

}  // namespace ccw
