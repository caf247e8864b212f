#include "ccw/corpus.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>
#include <string>
#include <unordered_map>

#include "ccw/log.hpp"
#include "ccw/rng.hpp"

namespace ccw {

SparseIncidenceMatrix::SparseIncidenceMatrix(index_t num_rows, index_t num_cols,
                                             std::span<const Edge> edges)
    : rows_(num_rows), cols_(num_cols) {
  if (num_rows < 0 || num_cols < 0) throw std::invalid_argument("incidence matrix: negative shape");
  std::vector<Edge> sorted(edges.begin(), edges.end());
  for (const Edge& e : sorted) {
    if (e.user < 0 || e.user >= rows_ || e.item < 0 || e.item >= cols_)
      throw std::invalid_argument("incidence matrix: edge index out of range");
  }
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());

  row_ptr_.assign(static_cast<std::size_t>(rows_) + 1, 0);
  col_ptr_.assign(static_cast<std::size_t>(cols_) + 1, 0);
  col_index_.resize(sorted.size());
  row_index_.resize(sorted.size());
  for (const Edge& e : sorted) {
    ++row_ptr_[static_cast<std::size_t>(e.user) + 1];
    ++col_ptr_[static_cast<std::size_t>(e.item) + 1];
  }
  std::partial_sum(row_ptr_.begin(), row_ptr_.end(), row_ptr_.begin());
  std::partial_sum(col_ptr_.begin(), col_ptr_.end(), col_ptr_.begin());
  for (std::size_t k = 0; k < sorted.size(); ++k) col_index_[k] = sorted[k].item;
  // Users are visited in ascending order, so each column fills sorted.
  std::vector<std::size_t> fill(col_ptr_.begin(), col_ptr_.end() - 1);
  for (const Edge& e : sorted) row_index_[fill[static_cast<std::size_t>(e.item)]++] = e.user;
}

double SparseIncidenceMatrix::density() const {
  if (rows_ == 0 || cols_ == 0) return 0.0;
  return static_cast<double>(nnz()) / (static_cast<double>(rows_) * static_cast<double>(cols_));
}

bool SparseIncidenceMatrix::contains(index_t u, index_t i) const {
  auto r = row(u);
  return std::binary_search(r.begin(), r.end(), i);
}

std::vector<Edge> SparseIncidenceMatrix::edges() const {
  std::vector<Edge> out;
  out.reserve(nnz());
  for (index_t u = 0; u < rows_; ++u)
    for (index_t i : row(u)) out.push_back({u, i});
  return out;
}

void SparseIncidenceMatrix::multiply(std::span<const double> x, std::span<double> y) const {
  for (index_t u = 0; u < rows_; ++u) {
    double acc = 0.0;
    for (index_t i : row(u)) acc += x[static_cast<std::size_t>(i)];
    y[static_cast<std::size_t>(u)] = acc;
  }
}

void SparseIncidenceMatrix::multiply_transpose(std::span<const double> x, std::span<double> y) const {
  for (index_t i = 0; i < cols_; ++i) {
    double acc = 0.0;
    for (index_t u : col(i)) acc += x[static_cast<std::size_t>(u)];
    y[static_cast<std::size_t>(i)] = acc;
  }
}

namespace {

std::size_t dedup(std::vector<Edge>& edges) {
  std::sort(edges.begin(), edges.end());
  const std::size_t before = edges.size();
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  return before - edges.size();
}

std::vector<std::vector<index_t>> adjacency(index_t num_users, const std::vector<Edge>& sorted_edges) {
  std::vector<std::vector<index_t>> adj(static_cast<std::size_t>(num_users));
  for (const Edge& e : sorted_edges) adj[static_cast<std::size_t>(e.user)].push_back(e.item);
  return adj;
}

}  // namespace

InteractionDataset InteractionDataset::from_edges(index_t num_users, index_t num_items,
                                                  std::vector<Edge> train, std::vector<Edge> test,
                                                  std::vector<std::int64_t> user_raw_ids,
                                                  std::vector<std::int64_t> item_raw_ids,
                                                  LoadReport* report) {
  if (num_users < 0 || num_items < 0) throw std::invalid_argument("dataset: negative shape");
  auto check_range = [&](const std::vector<Edge>& edges, const char* split) {
    for (const Edge& e : edges) {
      if (e.user < 0 || e.user >= num_users || e.item < 0 || e.item >= num_items) {
        throw DataError(std::string("dataset: ") + split + " edge (" + std::to_string(e.user) + "," +
                        std::to_string(e.item) + ") out of range");
      }
    }
  };
  check_range(train, "train");
  check_range(test, "test");

  InteractionDataset ds;
  ds.num_users_ = num_users;
  ds.num_items_ = num_items;

  const std::size_t train_dups = dedup(train);
  const std::size_t test_dups = dedup(test);

  ds.train_adj_ = adjacency(num_users, train);
  std::size_t overlap = 0;
  std::erase_if(test, [&](const Edge& e) {
    const auto& row = ds.train_adj_[static_cast<std::size_t>(e.user)];
    const bool dup = std::binary_search(row.begin(), row.end(), e.item);
    overlap += dup ? 1 : 0;
    return dup;
  });
  for (const Edge& e : test) {
    if (ds.train_adj_[static_cast<std::size_t>(e.user)].empty()) {
      const auto raw = user_raw_ids.empty() ? std::int64_t{e.user} : user_raw_ids[static_cast<std::size_t>(e.user)];
      throw DataError("dataset: user " + std::to_string(raw) + " has test interactions but no training history");
    }
  }
  ds.test_adj_ = adjacency(num_users, test);
  ds.train_ = std::move(train);
  ds.test_ = std::move(test);

  if (user_raw_ids.empty()) {
    user_raw_ids.resize(static_cast<std::size_t>(num_users));
    std::iota(user_raw_ids.begin(), user_raw_ids.end(), std::int64_t{0});
  }
  if (item_raw_ids.empty()) {
    item_raw_ids.resize(static_cast<std::size_t>(num_items));
    std::iota(item_raw_ids.begin(), item_raw_ids.end(), std::int64_t{0});
  }
  if (user_raw_ids.size() != static_cast<std::size_t>(num_users) ||
      item_raw_ids.size() != static_cast<std::size_t>(num_items))
    throw std::invalid_argument("dataset: raw id map size mismatch");
  ds.user_raw_ = std::move(user_raw_ids);
  ds.item_raw_ = std::move(item_raw_ids);

  if (train_dups > 0) log::warn("dropped ", train_dups, " duplicate train edges");
  if (test_dups > 0) log::warn("dropped ", test_dups, " duplicate test edges");
  if (overlap > 0) log::warn("dropped ", overlap, " test edges already present in train");
  if (report) {
    report->train_duplicates_dropped += train_dups;
    report->test_duplicates_dropped += test_dups;
    report->test_overlap_dropped += overlap;
  }
  return ds;
}

bool InteractionDataset::is_train_pair(index_t u, index_t i) const {
  auto items = train_items(u);
  return std::binary_search(items.begin(), items.end(), i);
}

std::vector<index_t> InteractionDataset::test_users() const {
  std::vector<index_t> users;
  for (index_t u = 0; u < num_users_; ++u)
    if (!test_adj_[static_cast<std::size_t>(u)].empty()) users.push_back(u);
  return users;
}

double InteractionDataset::train_density() const {
  if (num_users_ == 0 || num_items_ == 0) return 0.0;
  return static_cast<double>(train_.size()) / (static_cast<double>(num_users_) * num_items_);
}

double InteractionDataset::combined_density() const {
  if (num_users_ == 0 || num_items_ == 0) return 0.0;
  return static_cast<double>(train_.size() + test_.size()) / (static_cast<double>(num_users_) * num_items_);
}

namespace {

struct RawLine {
  std::int64_t user;
  std::vector<std::int64_t> items;
  std::size_t line_no;
};

std::int64_t parse_id(std::string_view tok, const std::filesystem::path& path, std::size_t line_no) {
  std::int64_t v = 0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc{} || ptr != tok.data() + tok.size()) {
    throw DataError(path.string() + ":" + std::to_string(line_no) + ": malformed id '" + std::string(tok) + "'");
  }
  return v;
}

std::vector<RawLine> read_lines(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  std::vector<RawLine> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream ss(line);
    std::string tok;
    if (!(ss >> tok)) continue;  // blank line
    if (tok.size() > 1 && tok.back() == ':') tok.pop_back();
    RawLine rl{parse_id(tok, path, line_no), {}, line_no};
    while (ss >> tok) rl.items.push_back(parse_id(tok, path, line_no));
    out.push_back(std::move(rl));
  }
  return out;
}

template <typename Container>
std::unordered_map<std::int64_t, index_t> rank_map(const Container& sorted_unique) {
  std::unordered_map<std::int64_t, index_t> m;
  m.reserve(sorted_unique.size());
  index_t k = 0;
  for (auto v : sorted_unique) m.emplace(v, k++);
  return m;
}

}  // namespace

InteractionDataset load_dataset(const std::filesystem::path& train_path,
                                const std::filesystem::path& test_path, LoadReport* report) {
  const auto train_lines = read_lines(train_path);
  const auto test_lines = read_lines(test_path);

  std::vector<std::int64_t> users;
  std::vector<std::int64_t> items;
  for (const auto& rl : train_lines) {
    if (rl.items.empty()) {
      throw DataError(train_path.string() + ":" + std::to_string(rl.line_no) + ": user " +
                      std::to_string(rl.user) + " has no training interactions");
    }
    users.push_back(rl.user);
    items.insert(items.end(), rl.items.begin(), rl.items.end());
  }
  LoadReport local;
  for (const auto& rl : test_lines) {
    if (rl.items.empty()) {
      ++local.empty_test_lines;
      continue;
    }
    items.insert(items.end(), rl.items.begin(), rl.items.end());
  }
  std::sort(users.begin(), users.end());
  users.erase(std::unique(users.begin(), users.end()), users.end());
  std::sort(items.begin(), items.end());
  items.erase(std::unique(items.begin(), items.end()), items.end());
  const auto user_index = rank_map(users);
  const auto item_index = rank_map(items);

  std::vector<Edge> train;
  for (const auto& rl : train_lines) {
    const index_t u = user_index.at(rl.user);
    for (auto it : rl.items) train.push_back({u, item_index.at(it)});
  }
  std::vector<Edge> test;
  for (const auto& rl : test_lines) {
    if (rl.items.empty()) continue;
    auto uit = user_index.find(rl.user);
    if (uit == user_index.end()) {
      throw DataError(test_path.string() + ":" + std::to_string(rl.line_no) + ": user " +
                      std::to_string(rl.user) + " appears in test but not in train");
    }
    for (auto it : rl.items) test.push_back({uit->second, item_index.at(it)});
  }
  if (local.empty_test_lines > 0) log::info("skipped ", local.empty_test_lines, " test lines without items");

  const auto num_users = static_cast<index_t>(users.size());
  const auto num_items = static_cast<index_t>(items.size());
  auto ds = InteractionDataset::from_edges(num_users, num_items, std::move(train), std::move(test), std::move(users),
                                           std::move(items), &local);
  if (report) *report = local;
  return ds;
}

void write_dataset(const InteractionDataset& ds, const std::filesystem::path& train_path,
                   const std::filesystem::path& test_path) {
  auto dump = [&](const std::filesystem::path& path, auto&& items_of) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path.string());
    for (index_t u = 0; u < ds.num_users(); ++u) {
      auto items = items_of(u);
      if (items.empty()) continue;
      out << ds.user_raw_id(u);
      for (index_t i : items) out << ' ' << ds.item_raw_id(i);
      out << '\n';
    }
  };
  dump(train_path, [&](index_t u) { return ds.train_items(u); });
  dump(test_path, [&](index_t u) { return ds.test_items(u); });
}

SparseIncidenceMatrix incidence_matrix(const InteractionDataset& ds) {
  return SparseIncidenceMatrix(ds.num_users(), ds.num_items(), ds.train_edges());
}

InteractionDataset split_holdout(const InteractionDataset& ds, double fraction, seed_t seed) {
  if (!(fraction > 0.0 && fraction < 1.0)) throw std::invalid_argument("holdout fraction must be in (0,1)");
  Rng rng(seed);
  std::vector<Edge> fit;
  std::vector<Edge> held;
  for (index_t u = 0; u < ds.num_users(); ++u) {
    std::vector<index_t> items(ds.train_items(u).begin(), ds.train_items(u).end());
    if (items.empty()) continue;
    std::shuffle(items.begin(), items.end(), rng);
    auto n_hold = static_cast<std::size_t>(fraction * static_cast<double>(items.size()));
    n_hold = std::min(n_hold, items.size() - 1);
    for (std::size_t k = 0; k < items.size(); ++k) (k < n_hold ? held : fit).push_back({u, items[k]});
  }
  std::vector<std::int64_t> user_raw(static_cast<std::size_t>(ds.num_users()));
  std::vector<std::int64_t> item_raw(static_cast<std::size_t>(ds.num_items()));
  for (index_t u = 0; u < ds.num_users(); ++u) user_raw[static_cast<std::size_t>(u)] = ds.user_raw_id(u);
  for (index_t i = 0; i < ds.num_items(); ++i) item_raw[static_cast<std::size_t>(i)] = ds.item_raw_id(i);
  return InteractionDataset::from_edges(ds.num_users(), ds.num_items(), std::move(fit), std::move(held),
                                        std::move(user_raw), std::move(item_raw));
}

}  // namespace ccw
