#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ccw/evalkit.hpp"
#include "ccw/spectral.hpp"
#include "ccw/synth.hpp"
#include "ccw/wrapper.hpp"
#include "fixtures.hpp"

using namespace ccw;

namespace {

CoClustering fixed_clusters(const InteractionDataset& ds, std::vector<index_t> users, std::vector<index_t> items, int k) {
  CoClustering cc;
  cc.k = k;
  cc.user_assignment = std::move(users);
  cc.item_assignment = std::move(items);
  return build_subgraphs(incidence_matrix(ds), cc);
}

// 3 users x 3 items; users 0,1 and items 0,1 in cluster 0, user 2 and item 2 in cluster 1.
struct Toy {
  InteractionDataset ds = InteractionDataset::from_edges(3, 3, {{0, 0}, {0, 1}, {1, 1}, {2, 2}, {1, 2}}, {});
  CoClustering cc = fixed_clusters(ds, {0, 0, 1}, {0, 0, 1}, 2);
};

}  // namespace

TEST(Lic, ZeroNetworkGivesZero) {
  LicNetwork net = LicNetwork::init(2, 2, 3, 0);
  net.w1.setZero();
  net.b1.setZero();
  net.w2.setZero();
  net.b2 = 0.0;
  EXPECT_EQ(net.evaluate(Eigen::RowVector2d(1, 2), Eigen::RowVector2d(-3, 4)), 0.0);
}

TEST(Lic, InitialNetworkGivesOne) {
  const LicNetwork net = LicNetwork::init(3, 3, 3, 5);
  EXPECT_EQ(net.input_dim(), 6);
  EXPECT_EQ(net.hidden_dim(), 3);
  EXPECT_EQ(net.evaluate(Eigen::RowVector3d(1, 2, 3), Eigen::RowVector3d(-1, 0, 9)), 1.0);
  EXPECT_TRUE(net.w2.isZero());
  EXPECT_TRUE(net.b1.isZero());
  EXPECT_FALSE(net.w1.isZero());
}

TEST(Lic, InitialHiddenWeightScale) {
  const LicNetwork net = LicNetwork::init(64, 64, 64, 1);
  const double sd = std::sqrt(net.w1.squaredNorm() / static_cast<double>(net.w1.size()));
  EXPECT_NEAR(sd, 1.0 / std::sqrt(128.0), 0.1 / std::sqrt(128.0));
}

TEST(Lic, HandEvaluatedForwardPass) {
  LicNetwork net = LicNetwork::init(1, 1, 1, 0);
  net.w1 << 1.0, 1.0;
  net.b1 << 0.0;
  net.w2 << 1.0;
  net.b2 = 0.0;
  Eigen::RowVectorXd g(1), l(1);
  g << 0.5;
  l << 0.25;
  EXPECT_DOUBLE_EQ(net.evaluate(g, l), 0.75);
}

TEST(RankScore, HandEvaluatedInClusterScore) {
  const auto ds = InteractionDataset::from_edges(1, 1, {{0, 0}}, {});
  const auto cc = fixed_clusters(ds, {0}, {0}, 1);
  AssembleOptions opts;
  opts.dim = 1;
  CCWModel m = assemble_ccw(ds, cc, BaseVariant::plain_mf, opts, 0);
  m.global.user_table()(0, 0) = 1.0;
  m.global.item_table()(0, 0) = 2.0;
  m.locals[0].user_table()(0, 0) = 3.0;
  m.locals[0].item_table()(0, 0) = 4.0;
  // Coefficient = -0.25 * global + 0.75: 0.5 for the user, 0.25 for the item.
  m.lic.w1 << 1.0, 0.0;
  m.lic.b1 << 0.0;
  m.lic.w2 << -0.25;
  m.lic.b2 = 0.75;
  EXPECT_DOUBLE_EQ(lic(m, NodeRef::user(0)), 0.5);
  EXPECT_DOUBLE_EQ(lic(m, NodeRef::item(0)), 0.25);
  EXPECT_DOUBLE_EQ(rank_score(m, 0, 0), 2.0 + 1.5 * 1.0);
  m.mode = ScoreMode::equal_weight;
  EXPECT_DOUBLE_EQ(rank_score(m, 0, 0), 2.0 + 12.0);
  m.mode = ScoreMode::base_only;
  EXPECT_DOUBLE_EQ(rank_score(m, 0, 0), 2.0);
}

TEST(RankScore, CrossClusterPairsUseGlobalTermInEveryMode) {
  Toy t;
  for (ScoreMode mode : {ScoreMode::with_lic, ScoreMode::equal_weight, ScoreMode::base_only}) {
    const CCWModel m = fixture::random_model(t.ds, t.cc, mode, 3, BaseVariant::plain_mf, 1);
    const double global = m.global.score(1, 2);
    EXPECT_EQ(rank_score(m, 1, 2), global) << to_string(mode);
    EXPECT_EQ(rank_score(m, 2, 0), m.global.score(2, 0)) << to_string(mode);
  }
}

TEST(RankScore, PropertyModeReductionWithUnitCoefficients) {
  for (BaseVariant v : {BaseVariant::plain_mf, BaseVariant::graph_propagated}) {
    Toy t;
    CCWModel m = fixture::random_model(t.ds, t.cc, ScoreMode::with_lic, 4, v, 2);
    m.lic.w2.setZero();
    m.lic.b2 = 1.0;
    CCWModel e = m;
    e.mode = ScoreMode::equal_weight;
    for (index_t u = 0; u < 3; ++u)
      for (index_t i = 0; i < 3; ++i) EXPECT_NEAR(rank_score(m, u, i), rank_score(e, u, i), 1e-12);
  }
}

TEST(RankScore, PropertyCrossClusterIndependence) {
  PlantedConfig pc;
  pc.blocks = 3;
  pc.users_per_block = 6;
  pc.items_per_block = 5;
  pc.avg_degree = 3;
  pc.noise = 0.1;
  pc.seed = 3;
  const auto p = make_planted(pc);
  const auto cc = build_subgraphs(incidence_matrix(p.data), spectral_cocluster(incidence_matrix(p.data), 3, 1));
  for (ScoreMode mode : {ScoreMode::with_lic, ScoreMode::equal_weight}) {
    const CCWModel m = fixture::random_model(p.data, cc, mode, 3, BaseVariant::graph_propagated, 4);
    for (int a = 0; a < 3; ++a) {
      CCWModel q = m;
      q.locals[static_cast<std::size_t>(a)].user_table().array() += 0.37;
      q.locals[static_cast<std::size_t>(a)].item_table().array() -= 0.21;
      for (index_t u = 0; u < p.data.num_users(); ++u) {
        for (index_t i = 0; i < p.data.num_items(); ++i) {
          const bool touches_a = cc.same_cluster(u, i) && cc.cluster_of_user(u) == a;
          if (!touches_a) {
            EXPECT_EQ(rank_score(q, u, i), rank_score(m, u, i));
          }
        }
      }
    }
  }
}

TEST(RatingMatrix, RowsMatchRankScore) {
  Toy t;
  const CCWModel m = fixture::random_model(t.ds, t.cc, ScoreMode::with_lic, 3, BaseVariant::graph_propagated, 5);
  const std::vector<index_t> users{0, 1, 2};
  const RowMatrix y = rating_matrix(m, users, nullptr);
  for (index_t u = 0; u < 3; ++u)
    for (index_t i = 0; i < 3; ++i) EXPECT_NEAR(y(u, i), rank_score(m, u, i), 1e-12);
  // The single cross-cluster cell (1, 2) carries the global score alone.
  EXPECT_NEAR(y(1, 2), m.global.score(1, 2), 1e-12);
  EXPECT_GT(std::abs(y(0, 0) - m.global.score(0, 0)), 1e-6);
}

TEST(RatingMatrix, MasksTrainItemsAndHonorsBudget) {
  Toy t;
  const CCWModel m = fixture::random_model(t.ds, t.cc, ScoreMode::with_lic, 3, BaseVariant::plain_mf, 6);
  const std::vector<index_t> users{0, 2};
  const RowMatrix y = rating_matrix(m, users, &t.ds);
  EXPECT_TRUE(std::isinf(y(0, 0)) && y(0, 0) < 0);
  EXPECT_TRUE(std::isinf(y(0, 1)));
  EXPECT_TRUE(std::isfinite(y(0, 2)));
  EXPECT_TRUE(std::isinf(y(1, 2)));
  EXPECT_THROW(rating_matrix(m, users, nullptr, 5), std::length_error);
}

TEST(RatingMatrix, BaseOnlyEqualsGlobalBlock) {
  Toy t;
  const CCWModel m = fixture::random_model(t.ds, t.cc, ScoreMode::base_only, 3, BaseVariant::graph_propagated, 7);
  const std::vector<index_t> users{0, 1, 2};
  const RowMatrix y = rating_matrix(m, users, nullptr);
  const auto f = m.global.forward();
  const RowMatrix g = f.users() * f.items().transpose();
  EXPECT_TRUE(y.isApprox(g, 1e-12));
}

TEST(RatingMatrix, PropertyArgmaxConsistency) {
  PlantedConfig pc;
  pc.blocks = 2;
  pc.users_per_block = 10;
  pc.items_per_block = 30;
  pc.avg_degree = 5;
  pc.noise = 0.1;
  pc.seed = 12;
  const auto p = make_planted(pc);
  const auto cc = build_subgraphs(incidence_matrix(p.data), spectral_cocluster(incidence_matrix(p.data), 2, 0));
  CCWModel m = fixture::random_model(p.data, cc, ScoreMode::with_lic, 2, BaseVariant::plain_mf, 8);
  // Quantize tables so ties exist and the tie rule is exercised.
  auto quantize = [](RowMatrix& t) { t = (t.array() * 2.0).round() / 2.0; };
  quantize(m.global.user_table());
  quantize(m.global.item_table());
  for (auto& l : m.locals) {
    quantize(l.user_table());
    quantize(l.item_table());
  }
  std::vector<index_t> users(static_cast<std::size_t>(p.data.num_users()));
  std::iota(users.begin(), users.end(), 0);
  const RowMatrix y = rating_matrix(m, users, nullptr);
  for (index_t u = 0; u < p.data.num_users(); ++u) {
    std::vector<double> row(y.row(u).data(), y.row(u).data() + y.cols());
    const auto top = top_k(row, 10);
    std::vector<index_t> order(static_cast<std::size_t>(p.data.num_items()));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](index_t a, index_t b) { return rank_score(m, u, a) > rank_score(m, u, b); });
    order.resize(10);
    EXPECT_EQ(top, order) << "user " << u;
  }
}

TEST(Assemble, StoresPartitionAndEdgeCounts) {
  PlantedConfig pc;
  pc.blocks = 3;
  pc.users_per_block = 12;
  pc.items_per_block = 9;
  pc.avg_degree = 4;
  pc.noise = 0.1;
  pc.seed = 2;
  const auto p = make_planted(pc);
  const auto cc = build_subgraphs(incidence_matrix(p.data), spectral_cocluster(incidence_matrix(p.data), 3, 1));
  const CCWModel m = assemble_ccw(p.data, cc, BaseVariant::graph_propagated, AssembleOptions{}, 3);
  EXPECT_EQ(m.num_parameter_stores(), 4u);
  EXPECT_EQ(m.global.num_edges(), p.data.train_edges().size());
  index_t nodes = 0;
  for (int c = 0; c < 3; ++c) {
    const auto& l = m.locals[static_cast<std::size_t>(c)];
    nodes += l.num_users() + l.num_items();
    EXPECT_EQ(l.num_edges(), cc.subgraphs[static_cast<std::size_t>(c)].edges.size());
  }
  EXPECT_EQ(nodes, p.data.num_users() + p.data.num_items());
  EXPECT_EQ(m.lic.input_dim(), 2 * 64);
  // Disjoint stores: no two tables share memory.
  EXPECT_NE(m.global.user_table().data(), m.locals[0].user_table().data());
}

TEST(Assemble, ClusterWithoutItemsIsFlaggedInert) {
  const auto ds = InteractionDataset::from_edges(3, 2, {{0, 0}, {1, 1}, {2, 1}}, {});
  const auto cc = fixed_clusters(ds, {0, 1, 2}, {0, 1}, 3);
  const CCWModel m = assemble_ccw(ds, cc, BaseVariant::plain_mf, AssembleOptions{}, 0);
  EXPECT_EQ(m.inert_clusters, std::vector<int>{2});
  EXPECT_EQ(m.locals[2].num_items(), 0);
}

TEST(ScoreModeNames, RoundTrip) {
  for (ScoreMode m : {ScoreMode::with_lic, ScoreMode::equal_weight, ScoreMode::base_only})
    EXPECT_EQ(parse_score_mode(to_string(m)), m);
  EXPECT_THROW(parse_score_mode("weighted"), ConfigError);
}
