#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>

#include "ccw/evalkit.hpp"
#include "ccw/spectral.hpp"
#include "ccw/synth.hpp"
#include "ccw/train.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace ccw;

namespace {

struct Problem {
  PlantedDataset planted;
  CoClustering cc;
};

Problem small_problem(seed_t seed) {
  PlantedConfig pc;
  pc.blocks = 2;
  pc.users_per_block = 6;
  pc.items_per_block = 7;
  pc.avg_degree = 4;
  pc.noise = 0.2;
  pc.seed = seed;
  Problem p{make_planted(pc), {}};
  const auto a = incidence_matrix(p.planted.data);
  p.cc = build_subgraphs(a, spectral_cocluster(a, 2, 1));
  return p;
}

CoClustering clusters_for(const InteractionDataset& ds, std::vector<index_t> users, std::vector<index_t> items,
                          int k) {
  CoClustering cc;
  cc.k = k;
  cc.user_assignment = std::move(users);
  cc.item_assignment = std::move(items);
  return build_subgraphs(incidence_matrix(ds), cc);
}

TrainConfig quiet_config() {
  TrainConfig cfg;
  cfg.learning_rate = 0.01;
  cfg.lambda = 1e-4;
  cfg.batch_size = 16;
  cfg.epochs = 20;
  cfg.eval_every = 0;
  cfg.early_stop_patience = 0;
  cfg.seed = 11;
  return cfg;
}

}  // namespace

TEST(Softplus, Values) {
  EXPECT_NEAR(softplus_neg(0.0), std::log(2.0), 1e-15);
  EXPECT_NEAR(softplus_neg(20.0), 2.0611536e-9, 1e-15);
  EXPECT_NEAR(softplus_neg(-800.0), 800.0, 1e-12);
  EXPECT_TRUE(std::isfinite(softplus_neg(1e6)));
}

TEST(BprLoss, EqualScoresGiveLn2) {
  const auto ds = fixture::toy_blocks();
  const auto cc = clusters_for(ds, {0, 0, 0, 0, 1, 1, 1, 1}, {0, 0, 0, 0, 1, 1, 1, 1}, 2);
  CCWModel m = fixture::random_model(ds, cc, ScoreMode::with_lic, 3, BaseVariant::plain_mf, 1);
  m.global.item_table().setConstant(0.4);
  for (auto& l : m.locals) l.item_table().setConstant(0.1);
  // Positives and negatives in the same cluster so the local term cancels too.
  const std::vector<BprTriple> batch{{0, 1, 2}, {5, 4, 7}};
  EXPECT_NEAR(bpr_loss(m, batch, RegularizerOptions{}).total(), std::log(2.0), 1e-15);
}

TEST(BprLoss, ZeroParametersGiveLn2WithPenalty) {
  const auto ds = fixture::toy_blocks();
  const auto cc = clusters_for(ds, {0, 0, 0, 0, 1, 1, 1, 1}, {0, 0, 0, 0, 1, 1, 1, 1}, 2);
  CCWModel m = assemble_ccw(ds, cc, BaseVariant::plain_mf, AssembleOptions{}, 0);
  m.global.user_table().setZero();
  m.global.item_table().setZero();
  for (auto& l : m.locals) {
    l.user_table().setZero();
    l.item_table().setZero();
  }
  m.lic.w1.setZero();
  m.lic.b2 = 0.0;
  const std::vector<BprTriple> batch{{0, 1, 6}, {5, 4, 7}};
  const LossValue v = bpr_loss(m, batch, RegularizerOptions{0.5, false, ds.train_edges().size()});
  EXPECT_NEAR(v.total(), std::log(2.0), 1e-15);
  EXPECT_EQ(v.regularization, 0.0);
}

TEST(BprLoss, PenaltyGrowsWithLambda) {
  const auto p = small_problem(2);
  const CCWModel m = fixture::random_model(p.planted.data, p.cc, ScoreMode::with_lic, 3, BaseVariant::plain_mf, 3);
  Rng rng(5);
  const auto batch = sample_triples(p.planted.data, 8, rng);
  const double a = bpr_loss(m, batch, RegularizerOptions{1e-3, false, 40}).total();
  const double b = bpr_loss(m, batch, RegularizerOptions{1e-2, false, 40}).total();
  EXPECT_GT(b, a);
  EXPECT_EQ(bpr_loss(m, batch, RegularizerOptions{}).regularization, 0.0);
}

struct GradCase {
  BaseVariant variant;
  ScoreMode mode;
  bool full_norm;
};

void PrintTo(const GradCase& c, std::ostream* os) {
  *os << to_string(c.variant) << '/' << to_string(c.mode) << (c.full_norm ? "/full" : "");
}

class GradientCheck : public ::testing::TestWithParam<GradCase> {};

TEST_P(GradientCheck, PropertyMatchesCentralDifferences) {
  const GradCase gc = GetParam();
  const auto p = small_problem(4);
  CCWModel m = fixture::random_model(p.planted.data, p.cc, gc.mode, 4, gc.variant, 9);
  Rng rng(13);
  const auto batch = sample_triples(p.planted.data, 12, rng);
  const RegularizerOptions reg{0.05, gc.full_norm, p.planted.data.train_edges().size()};
  CCWGradient grad(m);
  bpr_loss_and_gradient(m, batch, reg, grad);
  const auto loss = [&] { return bpr_loss(m, batch, reg).total(); };

  int checked = 0;
  auto check = [&](double& param, double analytic, const std::string& what) {
    const double numeric = oracle::central_difference(loss, param, 1e-5);
    const double scale = std::max({std::abs(numeric), std::abs(analytic), 1e-3});
    EXPECT_LE(std::abs(numeric - analytic) / scale, 1e-4) << what << " numeric " << numeric << " analytic " << analytic;
    ++checked;
  };
  auto check_table = [&](RowMatrix& table, const RowMatrix& g, const std::string& what) {
    for (Eigen::Index r = 0; r < table.rows(); ++r)
      for (Eigen::Index c = 0; c < table.cols(); c += 2)
        check(table(r, c), g(r, c), what + "(" + std::to_string(r) + "," + std::to_string(c) + ")");
  };
  check_table(m.global.user_table(), grad.global.users, "global.user");
  check_table(m.global.item_table(), grad.global.items, "global.item");
  for (std::size_t c = 0; c < m.locals.size(); ++c) {
    check_table(m.locals[c].user_table(), grad.locals[c].users, "local" + std::to_string(c) + ".user");
    check_table(m.locals[c].item_table(), grad.locals[c].items, "local" + std::to_string(c) + ".item");
  }
  check_table(m.lic.w1, grad.lic_w1, "lic.w1");
  for (Eigen::Index h = 0; h < m.lic.b1.size(); ++h) check(m.lic.b1(h), grad.lic_b1(h), "lic.b1");
  for (Eigen::Index h = 0; h < m.lic.w2.size(); ++h) check(m.lic.w2(h), grad.lic_w2(h), "lic.w2");
  check(m.lic.b2, grad.lic_b2, "lic.b2");
  EXPECT_GT(checked, 100);
}

INSTANTIATE_TEST_SUITE_P(
    AllPaths, GradientCheck,
    ::testing::Values(GradCase{BaseVariant::plain_mf, ScoreMode::with_lic, false},
                      GradCase{BaseVariant::plain_mf, ScoreMode::equal_weight, false},
                      GradCase{BaseVariant::plain_mf, ScoreMode::base_only, false},
                      GradCase{BaseVariant::graph_propagated, ScoreMode::with_lic, false},
                      GradCase{BaseVariant::graph_propagated, ScoreMode::equal_weight, false},
                      GradCase{BaseVariant::graph_propagated, ScoreMode::base_only, false},
                      GradCase{BaseVariant::plain_mf, ScoreMode::with_lic, true},
                      GradCase{BaseVariant::graph_propagated, ScoreMode::with_lic, true}),
    [](const auto& info) {
      std::string name = std::string(to_string(info.param.variant)) + "_" + std::string(to_string(info.param.mode)) +
                         (info.param.full_norm ? "_full" : "");
      for (char& ch : name)
        if (ch == '-') ch = '_';
      return name;
    });

TEST(Sampler, NegativesAvoidPositives) {
  const auto ds = InteractionDataset::from_edges(1, 3, {{0, 0}}, {});
  const TripleSampler s(ds);
  Rng rng(1);
  for (int t = 0; t < 1000; ++t) {
    const BprTriple tr = s.draw(rng);
    EXPECT_EQ(tr.user, 0);
    EXPECT_EQ(tr.pos, 0);
    EXPECT_TRUE(tr.neg == 1 || tr.neg == 2);
  }
}

TEST(Sampler, PropertyUniformOverEdgesAndNegatives) {
  // Two users; user 0 has items {0, 1}, user 1 has item {2}; 10 items total.
  const auto ds = InteractionDataset::from_edges(2, 10, {{0, 0}, {0, 1}, {1, 2}}, {});
  const TripleSampler s(ds);
  Rng rng(77);
  std::vector<double> edge_count(3, 0.0);
  std::vector<double> neg_count(10, 0.0);
  const int draws = 100000;
  int user0 = 0;
  for (const BprTriple& tr : s.sample(draws, rng)) {
    edge_count[static_cast<std::size_t>(tr.pos)] += 1.0;
    if (tr.user == 0) {
      ++user0;
      neg_count[static_cast<std::size_t>(tr.neg)] += 1.0;
    }
    EXPECT_FALSE(ds.is_train_pair(tr.user, tr.neg));
  }
  EXPECT_GT(oracle::chi_square_p_value(edge_count, std::vector<double>(3, draws / 3.0)), 0.01);
  std::vector<double> obs(neg_count.begin() + 2, neg_count.end());
  EXPECT_GT(oracle::chi_square_p_value(obs, std::vector<double>(8, user0 / 8.0)), 0.01);
}

TEST(Sampler, ExcludesSaturatedUsers) {
  const auto ds = InteractionDataset::from_edges(2, 2, {{0, 0}, {0, 1}, {1, 0}}, {});
  const TripleSampler s(ds);
  EXPECT_EQ(s.excluded_users(), std::vector<index_t>{0});
  EXPECT_EQ(s.eligible_edges(), 1u);
  Rng rng(2);
  for (int t = 0; t < 100; ++t) EXPECT_EQ(s.draw(rng), (BprTriple{1, 0, 1}));
  const auto full = InteractionDataset::from_edges(1, 1, {{0, 0}}, {});
  EXPECT_THROW(TripleSampler{full}, DataError);
}

TEST(TrainConfig, RejectsInvalidValues) {
  TrainConfig cfg;
  EXPECT_NO_THROW(cfg.validate());
  cfg.learning_rate = 0.0;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = TrainConfig{};
  cfg.batch_size = 0;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = TrainConfig{};
  cfg.lambda = -1.0;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = TrainConfig{};
  cfg.adam_beta1 = 1.0;
  EXPECT_THROW(cfg.validate(), ConfigError);
}

TEST(Train, ToyBlocksLossDropsBelowLn2) {
  const auto ds = fixture::toy_blocks();
  const auto cc = clusters_for(ds, {0, 0, 0, 0, 1, 1, 1, 1}, {0, 0, 0, 0, 1, 1, 1, 1}, 2);
  AssembleOptions opts;
  opts.dim = 8;
  CCWModel m = assemble_ccw(ds, cc, BaseVariant::plain_mf, opts, 3);
  TrainConfig cfg = quiet_config();
  cfg.epochs = 200;
  const TrainResult r = train_ccw(m, ds, cfg);
  ASSERT_EQ(r.history.size(), 200u);
  EXPECT_LT(r.history.back().loss, std::log(2.0));
  EXPECT_LT(r.history.back().loss, r.history.front().loss);
}

TEST(Train, PropertyLossWindowsDoNotRise) {
  PlantedConfig pc;
  pc.blocks = 3;
  pc.users_per_block = 40;
  pc.items_per_block = 30;
  pc.avg_degree = 8;
  pc.noise = 0.05;
  pc.seed = 8;
  const auto p = make_planted(pc);
  const auto a = incidence_matrix(p.data);
  const auto cc = build_subgraphs(a, spectral_cocluster(a, 3, 0));
  for (ScoreMode mode : {ScoreMode::with_lic, ScoreMode::equal_weight, ScoreMode::base_only}) {
    AssembleOptions opts;
    opts.dim = 16;
    opts.mode = mode;
    CCWModel m = assemble_ccw(p.data, cc, BaseVariant::graph_propagated, opts, 4);
    TrainConfig cfg = quiet_config();
    cfg.learning_rate = TrainConfig{}.learning_rate;
    cfg.batch_size = 64;
    cfg.epochs = 100;
    const TrainResult r = train_ccw(m, p.data, cfg);
    for (std::size_t w = 20; w + 20 <= r.history.size(); w += 20) {
      double prev = 0.0;
      double cur = 0.0;
      for (std::size_t e = 0; e < 20; ++e) {
        prev += r.history[w - 20 + e].loss;
        cur += r.history[w + e].loss;
      }
      EXPECT_LE(cur, 1.05 * prev) << to_string(mode) << " window at epoch " << w;
    }
  }
}

TEST(Train, BaseOnlyMatchesStandaloneBaseModel) {
  const auto p = small_problem(6);
  for (BaseVariant v : {BaseVariant::plain_mf, BaseVariant::graph_propagated}) {
    AssembleOptions opts;
    opts.dim = 6;
    opts.mode = ScoreMode::base_only;
    CCWModel m = assemble_ccw(p.planted.data, p.cc, v, opts, 21);
    EmbeddingModel base = m.global;
    TrainConfig cfg = quiet_config();
    cfg.epochs = 15;
    const TrainResult r = train_ccw(m, p.planted.data, cfg);
    const std::vector<double> losses = train_base_model(base, p.planted.data, cfg);
    ASSERT_EQ(losses.size(), r.history.size());
    for (std::size_t e = 0; e < losses.size(); ++e) EXPECT_NEAR(losses[e], r.history[e].loss, 1e-12);
    EXPECT_TRUE(m.global.user_table().isApprox(base.user_table(), 1e-12));
    EXPECT_TRUE(m.global.item_table().isApprox(base.item_table(), 1e-12));
  }
}

TEST(Train, PropertyOtherClustersUntouched) {
  const auto p = small_problem(7);
  CCWModel m = fixture::random_model(p.planted.data, p.cc, ScoreMode::with_lic, 4, BaseVariant::graph_propagated, 2);
  // Triples whose user is in cluster 0 only.
  Rng rng(3);
  std::vector<BprTriple> batch;
  for (const BprTriple& t : sample_triples(p.planted.data, 200, rng))
    if (p.cc.cluster_of_user(t.user) == 0) batch.push_back(t);
  ASSERT_FALSE(batch.empty());
  const CCWModel before = m;
  CCWGradient grad(m);
  bpr_loss_and_gradient(m, batch, RegularizerOptions{1e-3, false, p.planted.data.train_edges().size()}, grad);
  EXPECT_TRUE(grad.locals[1].touched_users().empty());
  EXPECT_TRUE(grad.locals[1].touched_items().empty());
  TrainConfig cfg = quiet_config();
  CCWOptimizer opt(m, cfg);
  opt.step(m, grad);
  EXPECT_EQ(m.locals[1].user_table(), before.locals[1].user_table());
  EXPECT_EQ(m.locals[1].item_table(), before.locals[1].item_table());
  EXPECT_NE(m.global.user_table(), before.global.user_table());
}

TEST(Train, NonFiniteLossAbortsWithDump) {
  const auto p = small_problem(9);
  CCWModel m = assemble_ccw(p.planted.data, p.cc, BaseVariant::plain_mf, AssembleOptions{}, 1);
  m.global.user_table().setConstant(std::numeric_limits<double>::quiet_NaN());
  const auto dir = fixture::temp_dir("nonfinite");
  TrainConfig cfg = quiet_config();
  cfg.diagnostic_path = dir / "batch.csv";
  EXPECT_THROW(train_ccw(m, p.planted.data, cfg), NumericError);
  EXPECT_TRUE(std::filesystem::exists(cfg.diagnostic_path));
  EXPECT_GT(std::filesystem::file_size(cfg.diagnostic_path), 0u);
}

TEST(Train, Deterministic) {
  const auto p = small_problem(10);
  AssembleOptions opts;
  opts.dim = 8;
  CCWModel a = assemble_ccw(p.planted.data, p.cc, BaseVariant::graph_propagated, opts, 5);
  CCWModel b = assemble_ccw(p.planted.data, p.cc, BaseVariant::graph_propagated, opts, 5);
  const TrainConfig cfg = quiet_config();
  const TrainResult ra = train_ccw(a, p.planted.data, cfg);
  const TrainResult rb = train_ccw(b, p.planted.data, cfg);
  ASSERT_EQ(ra.history.size(), rb.history.size());
  for (std::size_t e = 0; e < ra.history.size(); ++e) EXPECT_EQ(ra.history[e].loss, rb.history[e].loss);
  EXPECT_EQ(a.global.user_table(), b.global.user_table());
  EXPECT_EQ(a.lic.w1, b.lic.w1);
}

TEST(Train, EarlyStopRestoresBestEpoch) {
  PlantedConfig pc;
  pc.blocks = 2;
  pc.users_per_block = 30;
  pc.items_per_block = 30;
  pc.avg_degree = 8;
  pc.test_fraction = 0.2;
  pc.seed = 3;
  const auto p = make_planted(pc);
  const auto a = incidence_matrix(p.data);
  const auto cc = build_subgraphs(a, spectral_cocluster(a, 2, 0));
  AssembleOptions opts;
  opts.dim = 8;
  CCWModel m = assemble_ccw(p.data, cc, BaseVariant::plain_mf, opts, 2);
  TrainConfig cfg = quiet_config();
  cfg.epochs = 60;
  cfg.eval_every = 2;
  cfg.early_stop_patience = 3;
  const TrainResult r = train_ccw(m, p.data, cfg);
  ASSERT_GT(r.best_epoch, 0);
  double best = -1.0;
  for (const auto& e : r.history)
    if (!std::isnan(e.val_recall)) best = std::max(best, e.val_recall);
  EXPECT_DOUBLE_EQ(best, r.best_recall);
  EXPECT_NEAR(evaluate(m, p.data, cfg.eval_k).recall, r.best_recall, 1e-12);
}

TEST(HistoryCsv, Header) {
  const auto dir = fixture::temp_dir("history");
  write_history_csv(dir / "h.csv", {EpochRecord{1, 0.5, 0.1, 0.2}, EpochRecord{2, 0.4}}, 20);
  const std::string text = fixture::read_file(dir / "h.csv");
  EXPECT_EQ(text.substr(0, text.find('\n')), "epoch,loss,val_recall@20,val_ndcg@20");
}
