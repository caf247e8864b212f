#pragma once

#include <span>
#include <string_view>
#include <vector>

#include "ccw/corpus.hpp"
#include "ccw/embedding.hpp"
#include "ccw/spectral.hpp"
#include "ccw/types.hpp"

namespace ccw {

// How in-cluster pairs combine global and local terms. Cross-cluster pairs
// always use the global inner product alone.
enum class ScoreMode : std::uint32_t {
  with_lic = 0,      // g_u.g_i + (LIC_u l_u).(LIC_i l_i)
  equal_weight = 1,  // g_u.g_i + l_u.l_i
  base_only = 2,     // g_u.g_i
};

std::string_view to_string(ScoreMode m);
ScoreMode parse_score_mode(std::string_view name);

// Two-layer perceptron mapping [global | local] to the local importance
// coefficient of a node. Hidden layer is rectified, output is linear.
struct LicNetwork {
  RowMatrix w1;  // input x hidden
  Vector b1;     // hidden
  Vector w2;     // hidden
  double b2 = 0.0;

  int input_dim() const { return static_cast<int>(w1.rows()); }
  int hidden_dim() const { return static_cast<int>(w1.cols()); }
  std::size_t parameter_count() const { return static_cast<std::size_t>(w1.size() + b1.size() + w2.size() + 1); }
  double squared_norm() const { return w1.squaredNorm() + b1.squaredNorm() + w2.squaredNorm() + b2 * b2; }

  // `pre`, when given, receives the hidden pre-activations.
  double evaluate(const Eigen::Ref<const Eigen::RowVectorXd>& global, const Eigen::Ref<const Eigen::RowVectorXd>& local,
                  Eigen::RowVectorXd* pre = nullptr) const;

  // Hidden weights ~ Normal(0, 1/input), zero hidden bias, zero output
  // weights and unit output bias, so every coefficient starts at 1.
  static LicNetwork init(int global_dim, int local_dim, int hidden_dim, seed_t seed);
};

struct CCWModel {
  EmbeddingModel global;
  std::vector<EmbeddingModel> locals;  // one per cluster, over local indices
  CoClustering clustering;             // subgraphs populated
  LicNetwork lic;
  ScoreMode mode = ScoreMode::with_lic;
  std::vector<int> inert_clusters;  // clusters lacking users or items

  int k() const { return clustering.k; }
  index_t num_users() const { return global.num_users(); }
  index_t num_items() const { return global.num_items(); }
  std::size_t num_parameter_stores() const { return 1 + locals.size(); }
};

struct AssembleOptions {
  int dim = 64;
  int local_dim = 0;   // 0 means equal to dim
  int layers = 3;      // propagated variant only
  int lic_hidden = 0;  // 0 means equal to dim
  ScoreMode mode = ScoreMode::with_lic;
};

// One global model over all train edges, one local model per cluster over
// that cluster's in-cluster edges, and the coefficient network.
CCWModel assemble_ccw(const InteractionDataset& ds, const CoClustering& cc, BaseVariant variant,
                      const AssembleOptions& options, seed_t seed);

// Frozen view of a model for scoring: final embeddings and per-node
// coefficients computed once.
class CCWScorer {
 public:
  explicit CCWScorer(const CCWModel& model);

  double lic(NodeRef node) const;
  double score(index_t u, index_t i) const;

  const RowMatrix& global_users() const { return global_.users(); }
  const RowMatrix& global_items() const { return global_.items(); }
  Eigen::RowVectorXd local_embedding(NodeRef node) const;

  // Scores for every item of each listed user; train items of the user in
  // `mask` (when non-null) are set to -infinity. Refuses blocks larger than
  // `cell_budget` cells.
  RowMatrix rating_block(std::span<const index_t> users, const InteractionDataset* mask,
                         std::size_t cell_budget) const;

 private:
  const CCWModel& model_;
  FinalEmbeddings global_;
  std::vector<FinalEmbeddings> locals_;
  // Local embeddings pre-scaled by the node coefficient (or 1).
  std::vector<RowMatrix> scaled_users_;
  std::vector<RowMatrix> scaled_items_;
  Vector lic_users_;
  Vector lic_items_;
};

inline constexpr std::size_t kDefaultCellBudget = std::size_t{1} << 26;

double lic(const CCWModel& model, NodeRef node);
double rank_score(const CCWModel& model, index_t u, index_t i);
RowMatrix rating_matrix(const CCWModel& model, std::span<const index_t> users, const InteractionDataset* mask,
                        std::size_t cell_budget = kDefaultCellBudget);

}  // namespace ccw
