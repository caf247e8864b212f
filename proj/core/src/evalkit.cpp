#include "ccw/evalkit.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numeric>

#include <json.hpp>

#include "ccw/log.hpp"
#include "ccw/plot.hpp"
#include "ccw/rng.hpp"

namespace ccw {

namespace {

bool is_hit(std::span<const index_t> sorted_test, index_t item) {
  return std::binary_search(sorted_test.begin(), sorted_test.end(), item);
}

}  // namespace

double recall_at_k(std::span<const index_t> ranked, std::span<const index_t> test_items, int k) {
  if (test_items.empty()) throw std::invalid_argument("recall_at_k: empty test set");
  const auto n = std::min<std::size_t>(ranked.size(), static_cast<std::size_t>(k));
  std::size_t hits = 0;
  for (std::size_t p = 0; p < n; ++p) hits += is_hit(test_items, ranked[p]) ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(test_items.size());
}

double ndcg_at_k(std::span<const index_t> ranked, std::span<const index_t> test_items, int k) {
  if (test_items.empty()) throw std::invalid_argument("ndcg_at_k: empty test set");
  const auto n = std::min<std::size_t>(ranked.size(), static_cast<std::size_t>(k));
  double dcg = 0.0;
  for (std::size_t p = 0; p < n; ++p)
    if (is_hit(test_items, ranked[p])) dcg += 1.0 / std::log2(static_cast<double>(p) + 2.0);
  double idcg = 0.0;
  const auto ideal = std::min<std::size_t>(static_cast<std::size_t>(k), test_items.size());
  for (std::size_t p = 0; p < ideal; ++p) idcg += 1.0 / std::log2(static_cast<double>(p) + 2.0);
  return dcg / idcg;
}

std::vector<index_t> top_k(std::span<const double> scores, int k) {
  std::vector<index_t> idx;
  idx.reserve(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i)
    if (scores[i] != -std::numeric_limits<double>::infinity() && !std::isnan(scores[i]))
      idx.push_back(static_cast<index_t>(i));
  const auto n = std::min<std::size_t>(idx.size(), static_cast<std::size_t>(std::max(k, 0)));
  auto better = [&](index_t a, index_t b) {
    const double sa = scores[static_cast<std::size_t>(a)];
    const double sb = scores[static_cast<std::size_t>(b)];
    return sa > sb || (sa == sb && a < b);
  };
  std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n), idx.end(), better);
  idx.resize(n);
  return idx;
}

EvalReport evaluate(const CCWModel& model, const InteractionDataset& ds, int k, std::size_t user_batch) {
  if (k < 1) throw std::invalid_argument("evaluate: k must be >= 1");
  const CCWScorer scorer(model);
  const std::vector<index_t> users = ds.test_users();
  EvalReport r;
  r.k = k;
  r.mode = std::string(to_string(model.mode));
  r.variant = std::string(to_string(model.global.variant()));
  r.clusters = model.k();
  r.num_users = users.size();
  if (users.empty()) return r;
  user_batch = std::max<std::size_t>(1, std::min(user_batch, kDefaultCellBudget / std::max<index_t>(1, ds.num_items())));
  double recall = 0.0;
  double ndcg = 0.0;
  for (std::size_t start = 0; start < users.size(); start += user_batch) {
    const std::size_t end = std::min(users.size(), start + user_batch);
    std::span<const index_t> batch(users.data() + start, end - start);
    const RowMatrix block = scorer.rating_block(batch, &ds, kDefaultCellBudget);
    for (std::size_t r2 = 0; r2 < batch.size(); ++r2) {
      std::span<const double> row(block.row(static_cast<Eigen::Index>(r2)).data(), static_cast<std::size_t>(block.cols()));
      const auto ranked = top_k(row, k);
      const auto test = ds.test_items(batch[r2]);
      recall += recall_at_k(ranked, test, k);
      ndcg += ndcg_at_k(ranked, test, k);
    }
  }
  r.recall = recall / static_cast<double>(users.size());
  r.ndcg = ndcg / static_cast<double>(users.size());
  return r;
}

namespace {

nlohmann::json to_json(const EvalReport& r) {
  return {{"recall", r.recall},   {"ndcg", r.ndcg},       {"k", r.k},
          {"num_users", r.num_users}, {"dataset", r.dataset}, {"mode", r.mode},
          {"variant", r.variant}, {"clusters", r.clusters}, {"seed", r.seed},
          {"config_hash", r.config_hash}};
}

}  // namespace

void write_report_json(const std::filesystem::path& path, const EvalReport& report) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << to_json(report).dump(2) << '\n';
}

void write_report_csv(const std::filesystem::path& path, const EvalReport& r) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << "dataset,variant,mode,clusters,seed,k,num_users,recall,ndcg\n" << std::setprecision(10);
  out << r.dataset << ',' << r.variant << ',' << r.mode << ',' << r.clusters << ',' << r.seed << ',' << r.k << ','
      << r.num_users << ',' << r.recall << ',' << r.ndcg << '\n';
}

EvalReport read_report_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(path.string() + ": " + e.what());
  }
  EvalReport r;
  r.recall = j.at("recall").get<double>();
  r.ndcg = j.at("ndcg").get<double>();
  r.k = j.at("k").get<int>();
  r.num_users = j.at("num_users").get<std::size_t>();
  r.dataset = j.value("dataset", "");
  r.mode = j.value("mode", "");
  r.variant = j.value("variant", "");
  r.clusters = j.value("clusters", 0);
  r.seed = j.value("seed", seed_t{0});
  r.config_hash = j.value("config_hash", "");
  return r;
}

const BenchmarkRow* BenchmarkTable::find(ScoreMode mode) const {
  for (const auto& r : rows)
    if (r.mode == mode) return &r;
  return nullptr;
}

namespace {

std::pair<double, double> mean_std(const std::vector<double>& v) {
  if (v.empty()) return {0.0, 0.0};
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  double var = 0.0;
  for (double x : v) var += (x - mean) * (x - mean);
  return {mean, v.size() > 1 ? std::sqrt(var / static_cast<double>(v.size() - 1)) : 0.0};
}

}  // namespace

BenchmarkTable benchmark(const InteractionDataset& ds, const BenchmarkConfig& config) {
  if (config.modes.empty() || config.seeds.empty()) throw ConfigError("benchmark: need at least one mode and seed");
  BenchmarkTable table;
  table.dataset = config.dataset;
  table.variant = config.variant;
  table.clusters = config.clusters;
  table.seeds = config.seeds;
  for (ScoreMode m : config.modes) table.rows.push_back(BenchmarkRow{m, {}, {}});

  const SparseIncidenceMatrix a = incidence_matrix(ds);
  for (seed_t seed : config.seeds) {
    const CoClustering cc =
        build_subgraphs(a, spectral_cocluster(a, config.clusters, derive_seed(seed, "cluster"), config.spectral));
    for (auto& row : table.rows) {
      AssembleOptions opts = config.model;
      opts.mode = row.mode;
      CCWModel model = assemble_ccw(ds, cc, config.variant, opts, derive_seed(seed, "model"));
      TrainConfig tc = config.train;
      tc.seed = derive_seed(seed, "train");
      train_ccw(model, ds, tc);
      const EvalReport rep = evaluate(model, ds, config.k);
      row.recall.push_back(rep.recall);
      row.ndcg.push_back(rep.ndcg);
      log::info("benchmark ", config.dataset, " ", to_string(config.variant), " ", to_string(row.mode), " seed ", seed,
                ": recall@", config.k, "=", rep.recall, " ndcg@", config.k, "=", rep.ndcg);
    }
  }
  for (auto& row : table.rows) {
    std::tie(row.mean_recall, row.std_recall) = mean_std(row.recall);
    std::tie(row.mean_ndcg, row.std_ndcg) = mean_std(row.ndcg);
  }
  return table;
}

void write_benchmark_csv(const std::filesystem::path& path, const BenchmarkTable& table) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << "variant,mode,seeds,mean_recall,std_recall,mean_ndcg,std_ndcg\n" << std::setprecision(10);
  for (const auto& r : table.rows) {
    out << to_string(table.variant) << ',' << to_string(r.mode) << ',' << r.recall.size() << ',' << r.mean_recall
        << ',' << r.std_recall << ',' << r.mean_ndcg << ',' << r.std_ndcg << '\n';
  }
}

void write_benchmark_json(const std::filesystem::path& path, const BenchmarkTable& table) {
  nlohmann::json j;
  j["dataset"] = table.dataset;
  j["variant"] = std::string(to_string(table.variant));
  j["clusters"] = table.clusters;
  j["seeds"] = table.seeds;
  for (const auto& r : table.rows) {
    j["rows"].push_back({{"mode", std::string(to_string(r.mode))},
                         {"recall", r.recall},
                         {"ndcg", r.ndcg},
                         {"mean_recall", r.mean_recall},
                         {"mean_ndcg", r.mean_ndcg},
                         {"std_recall", r.std_recall},
                         {"std_ndcg", r.std_ndcg}});
  }
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

std::string benchmark_svg(const std::vector<BenchmarkTable>& tables) {
  std::vector<std::string> groups;
  std::vector<std::string> names;
  std::vector<std::vector<double>> bars;
  if (!tables.empty())
    for (const auto& r : tables.front().rows) names.emplace_back(to_string(r.mode));
  for (const auto& t : tables) {
    std::vector<double> rec;
    std::vector<double> ndcg;
    for (const auto& r : t.rows) {
      rec.push_back(r.mean_recall);
      ndcg.push_back(r.mean_ndcg);
    }
    groups.push_back(std::string(to_string(t.variant)) + " Recall");
    bars.push_back(std::move(rec));
    groups.push_back(std::string(to_string(t.variant)) + " NDCG");
    bars.push_back(std::move(ndcg));
  }
  const std::string title = tables.empty() ? "benchmark" : tables.front().dataset;
  return plot::bar_chart_svg(title, groups, names, bars);
}

}  // namespace ccw
