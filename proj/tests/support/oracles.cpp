#include "oracles.hpp"

#include <algorithm>
#include <boost/math/distributions/chi_squared.hpp>
#include <cmath>
#include <limits>
#include <numeric>

#include "ccw/rng.hpp"

namespace ccw::oracle {

double normalized_cut(const SparseIncidenceMatrix& a, std::span<const index_t> users, std::span<const index_t> items) {
  double cut = 0.0;
  double vol[2] = {0.0, 0.0};
  for (index_t u = 0; u < a.rows(); ++u) {
    for (index_t i : a.row(u)) {
      const index_t su = users[static_cast<std::size_t>(u)];
      const index_t si = items[static_cast<std::size_t>(i)];
      if (su != si) cut += 1.0;
      vol[su] += 1.0;
      vol[si] += 1.0;
    }
  }
  if (vol[0] == 0.0 || vol[1] == 0.0) return std::numeric_limits<double>::infinity();
  return cut * (1.0 / vol[0] + 1.0 / vol[1]);
}

BipartitionOptimum best_bipartition(const SparseIncidenceMatrix& a) {
  const int nu = a.rows();
  const int ni = a.cols();
  const int n = nu + ni;
  BipartitionOptimum best;
  best.ncut = std::numeric_limits<double>::infinity();
  // Bit 0 (user 0) is fixed to side 0, which removes mirror duplicates.
  for (std::uint32_t mask = 0; mask < (1u << (n - 1)); ++mask) {
    const std::uint32_t full = mask << 1;
    std::vector<index_t> users(static_cast<std::size_t>(nu));
    std::vector<index_t> items(static_cast<std::size_t>(ni));
    int side_users[2] = {0, 0};
    int side_items[2] = {0, 0};
    for (int u = 0; u < nu; ++u) {
      users[static_cast<std::size_t>(u)] = static_cast<index_t>((full >> u) & 1u);
      ++side_users[users[static_cast<std::size_t>(u)]];
    }
    for (int i = 0; i < ni; ++i) {
      items[static_cast<std::size_t>(i)] = static_cast<index_t>((full >> (nu + i)) & 1u);
      ++side_items[items[static_cast<std::size_t>(i)]];
    }
    if (!side_users[0] || !side_users[1] || !side_items[0] || !side_items[1]) continue;
    const double value = normalized_cut(a, users, items);
    if (value < best.ncut - 1e-12) {
      best.ncut = value;
      best.partitions.clear();
    }
    if (std::abs(value - best.ncut) <= 1e-12) best.partitions.emplace_back(users, items);
  }
  return best;
}

double central_difference(const std::function<double()>& f, double& x, double h) {
  const double x0 = x;
  x = x0 + h;
  const double fp = f();
  x = x0 - h;
  const double fm = f();
  x = x0;
  return (fp - fm) / (2.0 * h);
}

BruteForceMetrics brute_force_evaluate(const InteractionDataset& ds, const std::function<double(index_t, index_t)>& score,
                                       int k) {
  BruteForceMetrics m;
  for (index_t u = 0; u < ds.num_users(); ++u) {
    const auto test = ds.test_items(u);
    if (test.empty()) continue;
    std::vector<std::pair<double, index_t>> cand;
    for (index_t i = 0; i < ds.num_items(); ++i) {
      if (ds.is_train_pair(u, i)) continue;
      cand.emplace_back(score(u, i), i);
    }
    std::sort(cand.begin(), cand.end(), [](const auto& x, const auto& y) {
      if (x.first != y.first) return x.first > y.first;
      return x.second < y.second;
    });
    const std::size_t top = std::min<std::size_t>(static_cast<std::size_t>(k), cand.size());
    double hits = 0.0;
    double dcg = 0.0;
    for (std::size_t p = 0; p < top; ++p) {
      if (std::find(test.begin(), test.end(), cand[p].second) != test.end()) {
        hits += 1.0;
        dcg += 1.0 / std::log2(static_cast<double>(p) + 2.0);
      }
    }
    double idcg = 0.0;
    for (std::size_t p = 0; p < std::min<std::size_t>(static_cast<std::size_t>(k), test.size()); ++p)
      idcg += 1.0 / std::log2(static_cast<double>(p) + 2.0);
    m.recall += hits / static_cast<double>(test.size());
    m.ndcg += dcg / idcg;
    ++m.users;
  }
  if (m.users > 0) {
    m.recall /= static_cast<double>(m.users);
    m.ndcg /= static_cast<double>(m.users);
  }
  return m;
}

DenseVariance dense_variance(const RowMatrix& points, std::span<const index_t> labels) {
  const auto n = static_cast<std::size_t>(points.rows());
  const auto d = static_cast<std::size_t>(points.cols());
  const index_t k = *std::max_element(labels.begin(), labels.end()) + 1;
  std::vector<double> mean(d, 0.0);
  std::vector<std::vector<double>> cmean(static_cast<std::size_t>(k), std::vector<double>(d, 0.0));
  std::vector<double> count(static_cast<std::size_t>(k), 0.0);
  for (std::size_t r = 0; r < n; ++r) {
    const auto c = static_cast<std::size_t>(labels[r]);
    count[c] += 1.0;
    for (std::size_t j = 0; j < d; ++j) {
      mean[j] += points(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(j));
      cmean[c][j] += points(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(j));
    }
  }
  for (auto& v : mean) v /= static_cast<double>(n);
  for (std::size_t c = 0; c < cmean.size(); ++c)
    if (count[c] > 0)
      for (auto& v : cmean[c]) v /= count[c];
  DenseVariance out;
  for (std::size_t r = 0; r < n; ++r) {
    const auto c = static_cast<std::size_t>(labels[r]);
    for (std::size_t j = 0; j < d; ++j) {
      const double x = points(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(j));
      out.total += (x - mean[j]) * (x - mean[j]);
      out.within += (x - cmean[c][j]) * (x - cmean[c][j]);
    }
  }
  for (std::size_t c = 0; c < cmean.size(); ++c)
    for (std::size_t j = 0; j < d; ++j) out.between += count[c] * (cmean[c][j] - mean[j]) * (cmean[c][j] - mean[j]);
  out.total /= static_cast<double>(n);
  out.within /= static_cast<double>(n);
  out.between /= static_cast<double>(n);
  return out;
}

RowMatrix dense_rows(const SparseIncidenceMatrix& a) {
  RowMatrix x = RowMatrix::Zero(a.rows(), a.cols());
  for (index_t u = 0; u < a.rows(); ++u)
    for (index_t i : a.row(u)) x(u, i) = 1.0;
  return x;
}

double shuffled_vr_mean(const RowMatrix& points, std::span<const index_t> labels, int shuffles, seed_t seed) {
  Rng rng(seed);
  std::vector<index_t> perm(labels.begin(), labels.end());
  double sum = 0.0;
  for (int s = 0; s < shuffles; ++s) {
    std::shuffle(perm.begin(), perm.end(), rng);
    const DenseVariance v = dense_variance(points, perm);
    sum += v.between / v.within;
  }
  return sum / shuffles;
}

double chi_square_p_value(std::span<const double> observed, std::span<const double> expected) {
  double stat = 0.0;
  for (std::size_t b = 0; b < observed.size(); ++b)
    stat += (observed[b] - expected[b]) * (observed[b] - expected[b]) / expected[b];
  const boost::math::chi_squared dist(static_cast<double>(observed.size() - 1));
  return boost::math::cdf(boost::math::complement(dist, stat));
}

double pairwise_ari(std::span<const index_t> a, std::span<const index_t> b) {
  const std::size_t n = a.size();
  double both = 0.0;
  double in_a = 0.0;
  double in_b = 0.0;
  for (std::size_t x = 0; x < n; ++x) {
    for (std::size_t y = x + 1; y < n; ++y) {
      const bool sa = a[x] == a[y];
      const bool sb = b[x] == b[y];
      both += (sa && sb) ? 1.0 : 0.0;
      in_a += sa ? 1.0 : 0.0;
      in_b += sb ? 1.0 : 0.0;
    }
  }
  const double pairs = static_cast<double>(n) * static_cast<double>(n - 1) / 2.0;
  const double expected = in_a * in_b / pairs;
  const double max_index = 0.5 * (in_a + in_b);
  if (max_index == expected) return 1.0;
  return (both - expected) / (max_index - expected);
}

}  // namespace ccw::oracle
