#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "ccw/corpus.hpp"
#include "ccw/embedding.hpp"
#include "ccw/spectral.hpp"
#include "ccw/train.hpp"
#include "ccw/wrapper.hpp"

namespace ccw {

// |ranked ∩ test| / |test|. `test_items` must be sorted.
double recall_at_k(std::span<const index_t> ranked, std::span<const index_t> test_items, int k);

// Binary-relevance NDCG with log2(p + 2) discounts at 0-based positions and
// an ideal DCG over min(k, |test|) hits. `test_items` must be sorted.
double ndcg_at_k(std::span<const index_t> ranked, std::span<const index_t> test_items, int k);

// Indices of the k highest finite scores, descending; ties go to the lower index.
std::vector<index_t> top_k(std::span<const double> scores, int k);

struct EvalReport {
  double recall = 0.0;
  double ndcg = 0.0;
  int k = 20;
  std::size_t num_users = 0;

  // Run metadata.
  std::string dataset;
  std::string mode;
  std::string variant;
  int clusters = 0;
  seed_t seed = 0;
  std::string config_hash;
};

// Mean Recall@k / NDCG@k over users with test items; ds's train items are masked.
EvalReport evaluate(const CCWModel& model, const InteractionDataset& ds, int k = 20, std::size_t user_batch = 256);

void write_report_json(const std::filesystem::path& path, const EvalReport& report);
void write_report_csv(const std::filesystem::path& path, const EvalReport& report);
EvalReport read_report_json(const std::filesystem::path& path);

struct BenchmarkConfig {
  BaseVariant variant = BaseVariant::plain_mf;
  std::vector<ScoreMode> modes{ScoreMode::base_only, ScoreMode::equal_weight, ScoreMode::with_lic};
  int clusters = 8;
  std::vector<seed_t> seeds{0};
  AssembleOptions model;
  TrainConfig train;
  SpectralOptions spectral;
  int k = 20;
  std::string dataset = "dataset";
};

struct BenchmarkRow {
  ScoreMode mode;
  std::vector<double> recall;  // per seed
  std::vector<double> ndcg;
  double mean_recall = 0.0;
  double mean_ndcg = 0.0;
  double std_recall = 0.0;
  double std_ndcg = 0.0;
};

struct BenchmarkTable {
  std::string dataset;
  BaseVariant variant;
  int clusters = 0;
  std::vector<seed_t> seeds;
  std::vector<BenchmarkRow> rows;

  const BenchmarkRow* find(ScoreMode mode) const;
};

// Co-clusters once per seed, then trains and evaluates every mode on the
// same clustering and initial seeds.
BenchmarkTable benchmark(const InteractionDataset& ds, const BenchmarkConfig& config);

// "variant,mode,seeds,mean_recall,std_recall,mean_ndcg,std_ndcg"
void write_benchmark_csv(const std::filesystem::path& path, const BenchmarkTable& table);
void write_benchmark_json(const std::filesystem::path& path, const BenchmarkTable& table);
// Grouped bars: one group per (variant, metric), one bar per mode.
std::string benchmark_svg(const std::vector<BenchmarkTable>& tables);

}  // namespace ccw
