#pragma once

#include <filesystem>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "ccw/corpus.hpp"
#include "ccw/embedding.hpp"
#include "ccw/rng.hpp"
#include "ccw/wrapper.hpp"

namespace ccw {

struct TrainConfig {
  double learning_rate = 1e-3;
  double lambda = 1e-4;
  int batch_size = 2048;
  int epochs = 400;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  seed_t seed = 0;
  int eval_every = 10;          // epochs; 0 disables periodic validation
  int early_stop_patience = 5;  // evaluations without improvement; 0 disables
  int eval_k = 20;
  bool full_norm_regularizer = false;
  std::filesystem::path diagnostic_path;  // where a non-finite batch is dumped

  // Throws ConfigError on invalid values.
  void validate() const;
};

struct BprTriple {
  index_t user;
  index_t pos;
  index_t neg;

  friend bool operator==(const BprTriple&, const BprTriple&) = default;
};

// Uniform draws over train edges with one rejection-sampled negative per
// positive. Users who interacted with every item are excluded.
class TripleSampler {
 public:
  explicit TripleSampler(const InteractionDataset& ds);

  BprTriple draw(Rng& rng) const;
  std::vector<BprTriple> sample(std::size_t n, Rng& rng) const;

  std::size_t eligible_edges() const { return edges_.size(); }
  const std::vector<index_t>& excluded_users() const { return excluded_; }

 private:
  const InteractionDataset* ds_;
  std::vector<Edge> edges_;
  std::vector<index_t> excluded_;
};

std::vector<BprTriple> sample_triples(const InteractionDataset& ds, std::size_t batch_size, Rng& rng);

struct RegularizerOptions {
  double lambda = 0.0;
  bool full_norm = false;
  // Train edge count; the coefficient-network penalty per batch is scaled by
  // batch / edges so an epoch adds up to lambda * ||theta||^2. 0 disables
  // the scaling.
  std::size_t num_train_edges = 0;
};

struct LossValue {
  double ranking = 0.0;  // mean softplus(-(s_ui - s_uj))
  double regularization = 0.0;
  double total() const { return ranking + regularization; }
};

// Gradient of the batch loss with respect to every parameter of a model,
// in table space.
struct CCWGradient {
  explicit CCWGradient(const CCWModel& model);

  TableGradient global;
  std::vector<TableGradient> locals;
  RowMatrix lic_w1;
  Vector lic_b1;
  Vector lic_w2;
  double lic_b2 = 0.0;
  bool lic_touched = false;

  void clear();
};

// -ln sigmoid(x) without overflow.
double softplus_neg(double x);

LossValue bpr_loss(const CCWModel& model, std::span<const BprTriple> batch, const RegularizerOptions& reg);
LossValue bpr_loss_and_gradient(const CCWModel& model, std::span<const BprTriple> batch,
                                const RegularizerOptions& reg, CCWGradient& grad);

// Adam over every parameter store. Table rows are updated only when they
// received gradient in the step; bias correction uses the global step count.
class CCWOptimizer {
 public:
  CCWOptimizer(const CCWModel& model, const TrainConfig& cfg);
  void step(CCWModel& model, const CCWGradient& grad);
  long steps() const { return t_; }

 private:
  struct Moments {
    RowMatrix m_users, v_users, m_items, v_items;
  };
  void update_table(EmbeddingModel& model, const TableGradient& g, Moments& s, double bc1, double bc2) const;

  double lr_, beta1_, beta2_, eps_;
  long t_ = 0;
  Moments global_;
  std::vector<Moments> locals_;
  RowMatrix m_w1_, v_w1_;
  Vector m_b1_, v_b1_, m_w2_, v_w2_;
  double m_b2_ = 0.0, v_b2_ = 0.0;
};

struct EpochRecord {
  int epoch = 0;
  double loss = 0.0;
  double val_recall = std::numeric_limits<double>::quiet_NaN();
  double val_ndcg = std::numeric_limits<double>::quiet_NaN();
};

struct TrainResult {
  std::vector<EpochRecord> history;
  int best_epoch = 0;
  double best_recall = std::numeric_limits<double>::quiet_NaN();
  bool early_stopped = false;
};

// Mini-batch Adam on the BPR objective for all k + 1 models and the
// coefficient network at once. Validation runs on `validation` (ds's own test
// split when null); the best Recall@k parameters are restored at the end.
TrainResult train_ccw(CCWModel& model, const InteractionDataset& ds, const TrainConfig& cfg,
                      const InteractionDataset* validation = nullptr,
                      const std::function<void(const EpochRecord&)>& on_epoch = {});

// Plain BPR on one model with the same sampler and optimizer rules, without
// validation. Returns per-epoch mean losses.
std::vector<double> train_base_model(EmbeddingModel& model, const InteractionDataset& ds, const TrainConfig& cfg);

// "epoch,loss,val_recall@K,val_ndcg@K"
void write_history_csv(const std::filesystem::path& path, const std::vector<EpochRecord>& history, int k = 20);

}  // namespace ccw
