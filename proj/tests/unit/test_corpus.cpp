#include <gtest/gtest.h>

#include "ccw/corpus.hpp"
#include "fixtures.hpp"

using namespace ccw;

namespace {

InteractionDataset load_text(const std::string& train, const std::string& test, LoadReport* report = nullptr) {
  const auto dir = fixture::temp_dir("corpus");
  fixture::write_file(dir / "train.txt", train);
  fixture::write_file(dir / "test.txt", test);
  return load_dataset(dir / "train.txt", dir / "test.txt", report);
}

}  // namespace

TEST(Corpus, MinimalTwoLineFile) {
  const auto ds = load_text("0: 0 1\n1: 1\n", "");
  EXPECT_EQ(ds.num_users(), 2);
  EXPECT_EQ(ds.num_items(), 2);
  EXPECT_EQ(ds.train_edges().size(), 3u);
  EXPECT_TRUE(ds.test_edges().empty());
}

TEST(Corpus, RawIdsAreRemappedContiguously) {
  const auto ds = load_text("10 500 7\n3 7\n", "10 42\n");
  ASSERT_EQ(ds.num_users(), 2);
  ASSERT_EQ(ds.num_items(), 3);
  EXPECT_EQ(ds.user_raw_id(0), 3);
  EXPECT_EQ(ds.user_raw_id(1), 10);
  EXPECT_EQ(ds.item_raw_id(0), 7);
  EXPECT_EQ(ds.item_raw_id(1), 42);
  EXPECT_EQ(ds.item_raw_id(2), 500);
  EXPECT_TRUE(ds.is_train_pair(1, 2));
  ASSERT_EQ(ds.test_items(1).size(), 1u);
  EXPECT_EQ(ds.test_items(1)[0], 1);
}

TEST(Corpus, MalformedLineReportsLineNumber) {
  try {
    load_text("0 1 2\n1 x 3\n", "");
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find(":2"), std::string::npos) << e.what();
  }
}

TEST(Corpus, TestOnlyUserIsRejectedByName) {
  try {
    load_text("0 1\n", "77 1\n");
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("77"), std::string::npos) << e.what();
  }
}

TEST(Corpus, DuplicatesAreDroppedAndCounted) {
  LoadReport report;
  const auto ds = load_text("0 1 1 2\n0 2\n", "0 3 3\n", &report);
  EXPECT_EQ(ds.train_edges().size(), 2u);
  EXPECT_EQ(ds.test_edges().size(), 1u);
  EXPECT_EQ(report.train_duplicates_dropped, 2u);
  EXPECT_EQ(report.test_duplicates_dropped, 1u);
}

TEST(Corpus, EmptyLinesRejectedForTrainSkippedForTest) {
  EXPECT_THROW(load_text("0 1\n5\n", ""), DataError);
  LoadReport report;
  const auto ds = load_text("0 1\n1 2\n", "0\n1 1\n", &report);
  EXPECT_EQ(report.empty_test_lines, 1u);
  EXPECT_EQ(ds.test_edges().size(), 1u);
}

TEST(Corpus, TrainTestOverlapIsRemovedFromTest) {
  LoadReport report;
  const auto ds = load_text("0 1 2\n", "0 2 3\n", &report);
  EXPECT_EQ(report.test_overlap_dropped, 1u);
  for (const Edge& e : ds.test_edges()) EXPECT_FALSE(ds.is_train_pair(e.user, e.item));
}

TEST(Corpus, FromEdgesRejectsOutOfRange) {
  EXPECT_THROW(InteractionDataset::from_edges(2, 2, {{0, 2}}, {}), DataError);
  EXPECT_THROW(InteractionDataset::from_edges(2, 2, {{-1, 0}}, {}), DataError);
}

TEST(Incidence, EmptyEdgeListIsAllZero) {
  const auto ds = InteractionDataset::from_edges(3, 2, {}, {});
  const auto a = incidence_matrix(ds);
  EXPECT_EQ(a.nnz(), 0u);
  EXPECT_DOUBLE_EQ(a.density(), 0.0);
  for (index_t u = 0; u < 3; ++u) EXPECT_TRUE(a.row(u).empty());
}

TEST(Incidence, DiagonalPattern) {
  const auto a = incidence_matrix(InteractionDataset::from_edges(2, 2, {{0, 0}, {1, 1}}, {}));
  EXPECT_TRUE(a.contains(0, 0));
  EXPECT_TRUE(a.contains(1, 1));
  EXPECT_FALSE(a.contains(0, 1));
  EXPECT_FALSE(a.contains(1, 0));
  EXPECT_DOUBLE_EQ(a.density(), 0.5);
}

TEST(Incidence, PropertyRowsMatchTrainAdjacency) {
  const auto ds = load_text("0 3 1\n1 0\n2 1 2 3\n", "0 0\n");
  const auto a = incidence_matrix(ds);
  EXPECT_EQ(a.nnz(), ds.train_edges().size());
  EXPECT_DOUBLE_EQ(a.density(), ds.train_density());
  for (index_t u = 0; u < ds.num_users(); ++u) {
    const auto row = a.row(u);
    const auto adj = ds.train_items(u);
    EXPECT_TRUE(std::equal(row.begin(), row.end(), adj.begin(), adj.end()));
  }
  // Column access is the transpose.
  for (index_t i = 0; i < ds.num_items(); ++i)
    for (index_t u : a.col(i)) EXPECT_TRUE(ds.is_train_pair(u, i));
}

TEST(Incidence, DensitiesTrainAndCombined) {
  const auto ds = InteractionDataset::from_edges(2, 4, {{0, 0}, {1, 1}}, {{0, 2}, {1, 3}});
  EXPECT_DOUBLE_EQ(ds.train_density(), 2.0 / 8.0);
  EXPECT_DOUBLE_EQ(ds.combined_density(), 4.0 / 8.0);
}

TEST(Corpus, PropertyRoundTripPreservesIndexSpaces) {
  const auto ds = load_text("9 4 8 15\n2 16 23\n5 42 4\n", "9 23\n5 8\n");
  const auto dir = fixture::temp_dir("roundtrip");
  write_dataset(ds, dir / "a.txt", dir / "b.txt");
  const auto back = load_dataset(dir / "a.txt", dir / "b.txt");
  EXPECT_EQ(back.num_users(), ds.num_users());
  EXPECT_EQ(back.num_items(), ds.num_items());
  EXPECT_EQ(back.train_edges(), ds.train_edges());
  EXPECT_EQ(back.test_edges(), ds.test_edges());
  for (index_t u = 0; u < ds.num_users(); ++u) EXPECT_EQ(back.user_raw_id(u), ds.user_raw_id(u));
  for (index_t i = 0; i < ds.num_items(); ++i) EXPECT_EQ(back.item_raw_id(i), ds.item_raw_id(i));
}

TEST(Corpus, HoldoutKeepsOneTrainItemPerUser) {
  std::vector<Edge> train;
  for (index_t u = 0; u < 20; ++u)
    for (index_t i = 0; i <= u % 5; ++i) train.push_back({u, (u + i) % 10});
  const auto ds = InteractionDataset::from_edges(20, 10, train, {});
  const auto h = split_holdout(ds, 0.5, 3);
  EXPECT_EQ(h.train_edges().size() + h.test_edges().size(), ds.train_edges().size());
  for (index_t u = 0; u < 20; ++u) EXPECT_GE(h.train_items(u).size(), 1u);
  EXPECT_EQ(split_holdout(ds, 0.5, 3).test_edges(), h.test_edges());
}
