#include "ccw/train.hpp"

#include <cmath>
#include <fstream>
#include <algorithm>
#include <iomanip>
#include <optional>
#include <sstream>
#include <unordered_map>

#include "ccw/evalkit.hpp"
#include "ccw/log.hpp"

namespace ccw {

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be > 0");
  if (!(lambda >= 0.0)) throw ConfigError("lambda must be >= 0");
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (epochs < 0) throw ConfigError("epochs must be >= 0");
  if (!(adam_beta1 >= 0.0 && adam_beta1 < 1.0) || !(adam_beta2 >= 0.0 && adam_beta2 < 1.0))
    throw ConfigError("adam betas must be in [0,1)");
  if (!(adam_eps > 0.0)) throw ConfigError("adam_eps must be > 0");
  if (eval_every < 0 || early_stop_patience < 0) throw ConfigError("eval_every and patience must be >= 0");
  if (eval_k < 1) throw ConfigError("eval_k must be >= 1");
}

TripleSampler::TripleSampler(const InteractionDataset& ds) : ds_(&ds) {
  for (index_t u = 0; u < ds.num_users(); ++u) {
    const auto items = ds.train_items(u);
    if (items.empty()) continue;
    if (static_cast<index_t>(items.size()) >= ds.num_items()) {
      excluded_.push_back(u);
      continue;
    }
    for (index_t i : items) edges_.push_back({u, i});
  }
  if (!excluded_.empty())
    log::warn("sampler: ", excluded_.size(), " users interacted with every item and are excluded from sampling");
  if (edges_.empty()) throw DataError("sampler: no train edge has a possible negative item");
}

BprTriple TripleSampler::draw(Rng& rng) const {
  std::uniform_int_distribution<std::size_t> pick_edge(0, edges_.size() - 1);
  std::uniform_int_distribution<index_t> pick_item(0, ds_->num_items() - 1);
  const Edge e = edges_[pick_edge(rng)];
  index_t neg = pick_item(rng);
  while (ds_->is_train_pair(e.user, neg)) neg = pick_item(rng);
  return {e.user, e.item, neg};
}

std::vector<BprTriple> TripleSampler::sample(std::size_t n, Rng& rng) const {
  std::vector<BprTriple> out;
  out.reserve(n);
  for (std::size_t t = 0; t < n; ++t) out.push_back(draw(rng));
  return out;
}

std::vector<BprTriple> sample_triples(const InteractionDataset& ds, std::size_t batch_size, Rng& rng) {
  return TripleSampler(ds).sample(batch_size, rng);
}

double softplus_neg(double x) {
  // -ln sigmoid(x) = ln(1 + e^-x)
  return x > 0 ? std::log1p(std::exp(-x)) : -x + std::log1p(std::exp(x));
}

namespace {

double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

TableGradient make_grad(const EmbeddingModel& m) { return TableGradient(m.num_users(), m.num_items(), m.dim()); }

struct LicCacheEntry {
  double value;
  Eigen::RowVectorXd pre;
  double grad = 0.0;
};

// Shared forward/backward. With grad == nullptr only the loss is computed.
LossValue loss_impl(const CCWModel& model, std::span<const BprTriple> batch, const RegularizerOptions& reg,
                    CCWGradient* grad) {
  if (batch.empty()) return {};
  const CoClustering& cc = model.clustering;
  const bool use_local = model.mode != ScoreMode::base_only;
  const bool use_lic = model.mode == ScoreMode::with_lic;
  const double inv_b = 1.0 / static_cast<double>(batch.size());

  const FinalEmbeddings global = model.global.forward();
  std::vector<FinalEmbeddings> locals;
  if (use_local) {
    locals.reserve(model.locals.size());
    for (const auto& l : model.locals) locals.push_back(l.forward());
  }

  // Final-embedding gradients, mapped to tables at the end.
  std::optional<TableGradient> g_global;
  std::vector<TableGradient> g_locals;
  if (grad) {
    g_global.emplace(make_grad(model.global));
    if (use_local)
      for (const auto& l : model.locals) g_locals.push_back(make_grad(l));
  }

  const index_t nu = model.num_users();
  std::unordered_map<index_t, LicCacheEntry> lic_cache;  // users: u, items: nu + i
  auto local_row = [&](NodeKind kind, index_t node) -> Eigen::RowVectorXd {
    if (kind == NodeKind::user) {
      return locals[static_cast<std::size_t>(cc.cluster_of_user(node))].users().row(
          cc.user_local[static_cast<std::size_t>(node)]);
    }
    return locals[static_cast<std::size_t>(cc.cluster_of_item(node))].items().row(
        cc.item_local[static_cast<std::size_t>(node)]);
  };
  auto lic_of = [&](NodeKind kind, index_t node) -> LicCacheEntry& {
    const index_t key = kind == NodeKind::user ? node : nu + node;
    auto it = lic_cache.find(key);
    if (it != lic_cache.end()) return it->second;
    const Eigen::RowVectorXd g = kind == NodeKind::user ? global.users().row(node) : global.items().row(node);
    LicCacheEntry e;
    e.value = use_lic ? model.lic.evaluate(g, local_row(kind, node), &e.pre) : 1.0;
    return lic_cache.emplace(key, std::move(e)).first->second;
  };

  LossValue loss;
  for (const BprTriple& t : batch) {
    const auto gu = global.users().row(t.user);
    const auto gi = global.items().row(t.pos);
    const auto gj = global.items().row(t.neg);
    double s_ui = gu.dot(gi);
    double s_uj = gu.dot(gj);
    const index_t cu = cc.cluster_of_user(t.user);
    const bool same_i = use_local && cc.cluster_of_item(t.pos) == cu;
    const bool same_j = use_local && cc.cluster_of_item(t.neg) == cu;
    Eigen::RowVectorXd lu;
    Eigen::RowVectorXd li;
    Eigen::RowVectorXd lj;
    double a_u = 1.0, a_i = 1.0, a_j = 1.0, dot_i = 0.0, dot_j = 0.0;
    if (same_i || same_j) {
      lu = local_row(NodeKind::user, t.user);
      a_u = lic_of(NodeKind::user, t.user).value;
    }
    if (same_i) {
      li = local_row(NodeKind::item, t.pos);
      a_i = lic_of(NodeKind::item, t.pos).value;
      dot_i = lu.dot(li);
      s_ui += a_u * a_i * dot_i;
    }
    if (same_j) {
      lj = local_row(NodeKind::item, t.neg);
      a_j = lic_of(NodeKind::item, t.neg).value;
      dot_j = lu.dot(lj);
      s_uj += a_u * a_j * dot_j;
    }
    const double x = s_ui - s_uj;
    loss.ranking += softplus_neg(x);
    if (!grad) continue;

    const double delta = -sigmoid(-x) * inv_b;  // d loss / d x
    g_global->user_row(t.user) += delta * (gi - gj);
    g_global->item_row(t.pos) += delta * gu;
    g_global->item_row(t.neg) -= delta * gu;
    auto& gl = g_locals.empty() ? *g_global : g_locals[static_cast<std::size_t>(cu)];
    const index_t lu_idx = cc.user_local[static_cast<std::size_t>(t.user)];
    if (same_i) {
      const double w = delta * a_u * a_i;
      gl.user_row(lu_idx) += w * li;
      gl.item_row(cc.item_local[static_cast<std::size_t>(t.pos)]) += w * lu;
      if (use_lic) {
        lic_of(NodeKind::user, t.user).grad += delta * a_i * dot_i;
        lic_of(NodeKind::item, t.pos).grad += delta * a_u * dot_i;
      }
    }
    if (same_j) {
      const double w = -delta * a_u * a_j;
      gl.user_row(lu_idx) += w * lj;
      gl.item_row(cc.item_local[static_cast<std::size_t>(t.neg)]) += w * lu;
      if (use_lic) {
        lic_of(NodeKind::user, t.user).grad -= delta * a_j * dot_j;
        lic_of(NodeKind::item, t.neg).grad -= delta * a_u * dot_j;
      }
    }
  }
  loss.ranking *= inv_b;

  if (grad && use_lic) {
    const auto gd = static_cast<Eigen::Index>(model.global.dim());
    const LicNetwork& net = model.lic;
    // Visit in key order so accumulation is independent of hash layout.
    std::vector<index_t> keys;
    keys.reserve(lic_cache.size());
    for (const auto& [key, _] : lic_cache) keys.push_back(key);
    std::sort(keys.begin(), keys.end());
    for (index_t key : keys) {
      const LicCacheEntry& e = lic_cache.at(key);
      if (e.grad == 0.0) continue;
      const bool is_user = key < nu;
      const index_t node = is_user ? key : key - nu;
      const NodeKind kind = is_user ? NodeKind::user : NodeKind::item;
      const Eigen::RowVectorXd hidden = e.pre.cwiseMax(0.0);
      grad->lic_b2 += e.grad;
      grad->lic_w2 += e.grad * hidden.transpose();
      Eigen::RowVectorXd dpre = e.grad * net.w2.transpose();
      for (Eigen::Index h = 0; h < dpre.size(); ++h)
        if (e.pre(h) <= 0.0) dpre(h) = 0.0;
      Eigen::RowVectorXd z(net.input_dim());
      z << (is_user ? global.users().row(node) : global.items().row(node)), local_row(kind, node);
      grad->lic_w1 += z.transpose() * dpre;
      grad->lic_b1 += dpre.transpose();
      const Eigen::RowVectorXd dz = dpre * net.w1.transpose();
      const auto c = static_cast<std::size_t>(is_user ? cc.cluster_of_user(node) : cc.cluster_of_item(node));
      if (is_user) {
        g_global->user_row(node) += dz.head(gd);
        g_locals[c].user_row(cc.user_local[static_cast<std::size_t>(node)]) += dz.tail(dz.size() - gd);
      } else {
        g_global->item_row(node) += dz.head(gd);
        g_locals[c].item_row(cc.item_local[static_cast<std::size_t>(node)]) += dz.tail(dz.size() - gd);
      }
    }
    grad->lic_touched = true;
  }

  if (grad) {
    model.global.backward(*g_global, grad->global);
    for (std::size_t c = 0; c < g_locals.size(); ++c) model.locals[c].backward(g_locals[c], grad->locals[c]);
  }

  // Regularization acts on table (ego) parameters.
  const double lambda = reg.lambda;
  if (lambda > 0.0) {
    if (reg.full_norm) {
      auto whole = [&](const EmbeddingModel& m, TableGradient* g) {
        loss.regularization += lambda * (m.user_table().squaredNorm() + m.item_table().squaredNorm());
        if (!g) return;
        for (index_t u = 0; u < m.num_users(); ++u) g->user_row(u) += 2.0 * lambda * m.user_table().row(u);
        for (index_t i = 0; i < m.num_items(); ++i) g->item_row(i) += 2.0 * lambda * m.item_table().row(i);
      };
      whole(model.global, grad ? &grad->global : nullptr);
      if (use_local)
        for (std::size_t c = 0; c < model.locals.size(); ++c) whole(model.locals[c], grad ? &grad->locals[c] : nullptr);
    } else {
      const double w = lambda * inv_b;
      auto user_term = [&](const EmbeddingModel& m, TableGradient* g, index_t row) {
        loss.regularization += w * m.user_table().row(row).squaredNorm();
        if (g) g->user_row(row) += 2.0 * w * m.user_table().row(row);
      };
      auto item_term = [&](const EmbeddingModel& m, TableGradient* g, index_t row) {
        loss.regularization += w * m.item_table().row(row).squaredNorm();
        if (g) g->item_row(row) += 2.0 * w * m.item_table().row(row);
      };
      for (const BprTriple& t : batch) {
        TableGradient* gg = grad ? &grad->global : nullptr;
        user_term(model.global, gg, t.user);
        item_term(model.global, gg, t.pos);
        item_term(model.global, gg, t.neg);
        if (!use_local) continue;
        const index_t cu = cc.cluster_of_user(t.user);
        const bool same_i = cc.cluster_of_item(t.pos) == cu;
        const bool same_j = cc.cluster_of_item(t.neg) == cu;
        if (!same_i && !same_j) continue;
        const auto& lm = model.locals[static_cast<std::size_t>(cu)];
        TableGradient* gl = grad ? &grad->locals[static_cast<std::size_t>(cu)] : nullptr;
        user_term(lm, gl, cc.user_local[static_cast<std::size_t>(t.user)]);
        if (same_i) item_term(lm, gl, cc.item_local[static_cast<std::size_t>(t.pos)]);
        if (same_j) item_term(lm, gl, cc.item_local[static_cast<std::size_t>(t.neg)]);
      }
    }
    if (use_lic) {
      double w = lambda;
      if (!reg.full_norm && reg.num_train_edges > 0)
        w *= static_cast<double>(batch.size()) / static_cast<double>(reg.num_train_edges);
      loss.regularization += w * model.lic.squared_norm();
      if (grad) {
        grad->lic_w1 += 2.0 * w * model.lic.w1;
        grad->lic_b1 += 2.0 * w * model.lic.b1;
        grad->lic_w2 += 2.0 * w * model.lic.w2;
        grad->lic_b2 += 2.0 * w * model.lic.b2;
        grad->lic_touched = true;
      }
    }
  }
  return loss;
}

}  // namespace

CCWGradient::CCWGradient(const CCWModel& model)
    : global(make_grad(model.global)),
      lic_w1(RowMatrix::Zero(model.lic.w1.rows(), model.lic.w1.cols())),
      lic_b1(Vector::Zero(model.lic.b1.size())),
      lic_w2(Vector::Zero(model.lic.w2.size())) {
  for (const auto& l : model.locals) locals.push_back(make_grad(l));
}

void CCWGradient::clear() {
  global.clear();
  for (auto& l : locals) l.clear();
  if (lic_touched) {
    lic_w1.setZero();
    lic_b1.setZero();
    lic_w2.setZero();
    lic_b2 = 0.0;
    lic_touched = false;
  }
}

LossValue bpr_loss(const CCWModel& model, std::span<const BprTriple> batch, const RegularizerOptions& reg) {
  return loss_impl(model, batch, reg, nullptr);
}

LossValue bpr_loss_and_gradient(const CCWModel& model, std::span<const BprTriple> batch,
                                const RegularizerOptions& reg, CCWGradient& grad) {
  return loss_impl(model, batch, reg, &grad);
}

CCWOptimizer::CCWOptimizer(const CCWModel& model, const TrainConfig& cfg)
    : lr_(cfg.learning_rate), beta1_(cfg.adam_beta1), beta2_(cfg.adam_beta2), eps_(cfg.adam_eps) {
  auto zeros = [](const EmbeddingModel& m) {
    return Moments{RowMatrix::Zero(m.num_users(), m.dim()), RowMatrix::Zero(m.num_users(), m.dim()),
                   RowMatrix::Zero(m.num_items(), m.dim()), RowMatrix::Zero(m.num_items(), m.dim())};
  };
  global_ = zeros(model.global);
  for (const auto& l : model.locals) locals_.push_back(zeros(l));
  m_w1_ = v_w1_ = RowMatrix::Zero(model.lic.w1.rows(), model.lic.w1.cols());
  m_b1_ = v_b1_ = Vector::Zero(model.lic.b1.size());
  m_w2_ = v_w2_ = Vector::Zero(model.lic.w2.size());
}

namespace {

template <typename Param, typename Grad, typename Moment>
void adam_update(Param&& p, const Grad& g, Moment&& m, Moment&& v, double lr, double b1, double b2, double eps,
                 double bc1, double bc2) {
  m = b1 * m + (1.0 - b1) * g;
  v = b2 * v + (1.0 - b2) * g.cwiseProduct(g);
  p -= (lr / bc1) * (m.array() / ((v.array() / bc2).sqrt() + eps)).matrix();
}

}  // namespace

void CCWOptimizer::update_table(EmbeddingModel& model, const TableGradient& g, Moments& s, double bc1,
                                double bc2) const {
  for (index_t u : g.touched_users()) {
    auto m = s.m_users.row(u);
    auto v = s.v_users.row(u);
    adam_update(model.user_table().row(u), g.users.row(u), m, v, lr_, beta1_, beta2_, eps_, bc1, bc2);
  }
  for (index_t i : g.touched_items()) {
    auto m = s.m_items.row(i);
    auto v = s.v_items.row(i);
    adam_update(model.item_table().row(i), g.items.row(i), m, v, lr_, beta1_, beta2_, eps_, bc1, bc2);
  }
}

void CCWOptimizer::step(CCWModel& model, const CCWGradient& grad) {
  ++t_;
  const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  update_table(model.global, grad.global, global_, bc1, bc2);
  for (std::size_t c = 0; c < model.locals.size(); ++c) update_table(model.locals[c], grad.locals[c], locals_[c], bc1, bc2);
  if (grad.lic_touched) {
    adam_update(model.lic.w1, grad.lic_w1, m_w1_, v_w1_, lr_, beta1_, beta2_, eps_, bc1, bc2);
    adam_update(model.lic.b1, grad.lic_b1, m_b1_, v_b1_, lr_, beta1_, beta2_, eps_, bc1, bc2);
    adam_update(model.lic.w2, grad.lic_w2, m_w2_, v_w2_, lr_, beta1_, beta2_, eps_, bc1, bc2);
    m_b2_ = beta1_ * m_b2_ + (1.0 - beta1_) * grad.lic_b2;
    v_b2_ = beta2_ * v_b2_ + (1.0 - beta2_) * grad.lic_b2 * grad.lic_b2;
    model.lic.b2 -= (lr_ / bc1) * m_b2_ / (std::sqrt(v_b2_ / bc2) + eps_);
  }
}

namespace {

struct Snapshot {
  std::pair<RowMatrix, RowMatrix> global;
  std::vector<std::pair<RowMatrix, RowMatrix>> locals;
  LicNetwork lic;

  static Snapshot take(const CCWModel& m) {
    Snapshot s{{m.global.user_table(), m.global.item_table()}, {}, m.lic};
    for (const auto& l : m.locals) s.locals.emplace_back(l.user_table(), l.item_table());
    return s;
  }
  void restore(CCWModel& m) const {
    m.global.user_table() = global.first;
    m.global.item_table() = global.second;
    for (std::size_t c = 0; c < locals.size(); ++c) {
      m.locals[c].user_table() = locals[c].first;
      m.locals[c].item_table() = locals[c].second;
    }
    m.lic = lic;
  }
};

bool model_finite(const CCWModel& m) {
  if (!m.global.all_finite() || !m.lic.w1.allFinite() || !m.lic.b1.allFinite() || !m.lic.w2.allFinite() ||
      !std::isfinite(m.lic.b2))
    return false;
  for (const auto& l : m.locals)
    if (!l.all_finite()) return false;
  return true;
}

[[noreturn]] void fail_nonfinite(const CCWModel& model, std::span<const BprTriple> batch, const LossValue& loss,
                                 int epoch, const TrainConfig& cfg) {
  std::ostringstream os;
  os << "non-finite loss at epoch " << epoch << " (ranking " << loss.ranking << ", regularization "
     << loss.regularization << ")";
  std::string where;
  if (!cfg.diagnostic_path.empty()) {
    std::ofstream dump(cfg.diagnostic_path);
    dump << "# " << os.str() << "\nuser,pos,neg,score_pos,score_neg\n" << std::setprecision(17);
    const CCWScorer scorer(model);
    for (const BprTriple& t : batch)
      dump << t.user << ',' << t.pos << ',' << t.neg << ',' << scorer.score(t.user, t.pos) << ','
           << scorer.score(t.user, t.neg) << '\n';
    where = "; batch dumped to " + cfg.diagnostic_path.string();
  } else if (!batch.empty()) {
    where = "; first triple (" + std::to_string(batch[0].user) + "," + std::to_string(batch[0].pos) + "," +
            std::to_string(batch[0].neg) + ")";
  }
  throw NumericError(os.str() + where);
}

}  // namespace

TrainResult train_ccw(CCWModel& model, const InteractionDataset& ds, const TrainConfig& cfg,
                      const InteractionDataset* validation, const std::function<void(const EpochRecord&)>& on_epoch) {
  cfg.validate();
  const InteractionDataset& val = validation ? *validation : ds;
  const bool can_validate = !val.test_edges().empty();
  const TripleSampler sampler(ds);
  Rng rng(derive_seed(cfg.seed, "sampler"));
  const RegularizerOptions reg{cfg.lambda, cfg.full_norm_regularizer, ds.train_edges().size()};
  CCWGradient grad(model);
  CCWOptimizer opt(model, cfg);
  const auto batch = static_cast<std::size_t>(cfg.batch_size);
  const std::size_t batches = (sampler.eligible_edges() + batch - 1) / batch;

  TrainResult result;
  std::optional<Snapshot> best;
  int since_best = 0;
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    double epoch_loss = 0.0;
    for (std::size_t b = 0; b < batches; ++b) {
      const std::vector<BprTriple> triples = sampler.sample(batch, rng);
      grad.clear();
      const LossValue loss = bpr_loss_and_gradient(model, triples, reg, grad);
      if (!std::isfinite(loss.total())) fail_nonfinite(model, triples, loss, epoch, cfg);
      opt.step(model, grad);
      epoch_loss += loss.total();
    }
    if (!model_finite(model)) throw NumericError("non-finite parameters after epoch " + std::to_string(epoch));
    EpochRecord rec;
    rec.epoch = epoch;
    rec.loss = epoch_loss / static_cast<double>(batches);
    const bool due = cfg.eval_every > 0 && (epoch % cfg.eval_every == 0 || epoch == cfg.epochs);
    if (can_validate && due) {
      const EvalReport r = evaluate(model, val, cfg.eval_k);
      rec.val_recall = r.recall;
      rec.val_ndcg = r.ndcg;
      if (!best || r.recall > result.best_recall) {
        best = Snapshot::take(model);
        result.best_recall = r.recall;
        result.best_epoch = epoch;
        since_best = 0;
      } else {
        ++since_best;
      }
    }
    result.history.push_back(rec);
    if (on_epoch) on_epoch(rec);
    if (cfg.early_stop_patience > 0 && since_best >= cfg.early_stop_patience) {
      result.early_stopped = true;
      log::info("early stop at epoch ", epoch, " (best epoch ", result.best_epoch, ")");
      break;
    }
  }
  if (best) {
    best->restore(model);
  } else {
    result.best_epoch = static_cast<int>(result.history.size());
  }
  return result;
}

std::vector<double> train_base_model(EmbeddingModel& model, const InteractionDataset& ds, const TrainConfig& cfg) {
  cfg.validate();
  const TripleSampler sampler(ds);
  Rng rng(derive_seed(cfg.seed, "sampler"));
  const auto batch = static_cast<std::size_t>(cfg.batch_size);
  const std::size_t batches = (sampler.eligible_edges() + batch - 1) / batch;
  const double b1 = cfg.adam_beta1;
  const double b2 = cfg.adam_beta2;
  RowMatrix mu = RowMatrix::Zero(model.num_users(), model.dim()), vu = mu;
  RowMatrix mi = RowMatrix::Zero(model.num_items(), model.dim()), vi = mi;
  TableGradient final_grad = make_grad(model);
  TableGradient table_grad = make_grad(model);
  long t = 0;
  std::vector<double> losses;
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    double epoch_loss = 0.0;
    for (std::size_t b = 0; b < batches; ++b) {
      const auto triples = sampler.sample(batch, rng);
      final_grad.clear();
      table_grad.clear();
      const FinalEmbeddings f = model.forward();
      const double inv_b = 1.0 / static_cast<double>(triples.size());
      double loss = 0.0;
      for (const BprTriple& tr : triples) {
        const auto eu = f.users().row(tr.user);
        const auto ei = f.items().row(tr.pos);
        const auto ej = f.items().row(tr.neg);
        const double x = eu.dot(ei) - eu.dot(ej);
        loss += softplus_neg(x);
        const double delta = -sigmoid(-x) * inv_b;
        final_grad.user_row(tr.user) += delta * (ei - ej);
        final_grad.item_row(tr.pos) += delta * eu;
        final_grad.item_row(tr.neg) -= delta * eu;
      }
      loss *= inv_b;
      model.backward(final_grad, table_grad);
      const double w = cfg.lambda * inv_b;
      for (const BprTriple& tr : triples) {
        loss += w * (model.user_table().row(tr.user).squaredNorm() + model.item_table().row(tr.pos).squaredNorm() +
                     model.item_table().row(tr.neg).squaredNorm());
        if (w > 0.0) {
          table_grad.user_row(tr.user) += 2.0 * w * model.user_table().row(tr.user);
          table_grad.item_row(tr.pos) += 2.0 * w * model.item_table().row(tr.pos);
          table_grad.item_row(tr.neg) += 2.0 * w * model.item_table().row(tr.neg);
        }
      }
      ++t;
      const double bc1 = 1.0 - std::pow(b1, static_cast<double>(t));
      const double bc2 = 1.0 - std::pow(b2, static_cast<double>(t));
      for (index_t u : table_grad.touched_users()) {
        auto m = mu.row(u);
        auto v = vu.row(u);
        adam_update(model.user_table().row(u), table_grad.users.row(u), m, v, cfg.learning_rate, b1, b2, cfg.adam_eps,
                    bc1, bc2);
      }
      for (index_t i : table_grad.touched_items()) {
        auto m = mi.row(i);
        auto v = vi.row(i);
        adam_update(model.item_table().row(i), table_grad.items.row(i), m, v, cfg.learning_rate, b1, b2, cfg.adam_eps,
                    bc1, bc2);
      }
      epoch_loss += loss;
    }
    losses.push_back(epoch_loss / static_cast<double>(batches));
  }
  return losses;
}

void write_history_csv(const std::filesystem::path& path, const std::vector<EpochRecord>& history, int k) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << "epoch,loss,val_recall@" << k << ",val_ndcg@" << k << '\n' << std::setprecision(10);
  for (const auto& r : history) {
    out << r.epoch << ',' << r.loss << ',';
    if (std::isfinite(r.val_recall)) out << r.val_recall;
    out << ',';
    if (std::isfinite(r.val_ndcg)) out << r.val_ndcg;
    out << '\n';
  }
}

}  // namespace ccw
