#include "ccw/clusterqual.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>

#include "ccw/log.hpp"

namespace ccw {

double variance(const RowMatrix& points) {
  if (points.rows() == 0) throw std::invalid_argument("variance: empty point set");
  const Eigen::RowVectorXd centroid = points.colwise().mean();
  return (points.rowwise() - centroid).rowwise().squaredNorm().mean();
}

double VarianceDecomposition::ratio() const {
  if (nonempty_clusters <= 1 || between == 0.0) return 0.0;
  if (within <= 0.0) {
    log::warn("variance ratio: zero within-cluster variance, reporting +inf");
    return std::numeric_limits<double>::infinity();
  }
  return between / within;
}

namespace {

int label_count(std::span<const index_t> labels) {
  index_t top = -1;
  for (index_t l : labels) {
    if (l < 0) throw std::invalid_argument("variance: negative cluster label");
    top = std::max(top, l);
  }
  return top + 1;
}

}  // namespace

VarianceDecomposition variance_decomposition(const RowMatrix& points, std::span<const index_t> labels) {
  const Eigen::Index n = points.rows();
  if (n == 0) throw std::invalid_argument("variance_decomposition: empty point set");
  if (static_cast<Eigen::Index>(labels.size()) != n)
    throw std::invalid_argument("variance_decomposition: label count mismatch");
  const int k = label_count(labels);

  RowMatrix centroids = RowMatrix::Zero(k, points.cols());
  std::vector<Eigen::Index> counts(static_cast<std::size_t>(k), 0);
  for (Eigen::Index i = 0; i < n; ++i) {
    centroids.row(labels[static_cast<std::size_t>(i)]) += points.row(i);
    ++counts[static_cast<std::size_t>(labels[static_cast<std::size_t>(i)])];
  }
  const Eigen::RowVectorXd overall = points.colwise().mean();

  VarianceDecomposition d;
  for (int c = 0; c < k; ++c) {
    if (counts[static_cast<std::size_t>(c)] == 0) continue;
    ++d.nonempty_clusters;
    centroids.row(c) /= static_cast<double>(counts[static_cast<std::size_t>(c)]);
    const double p = static_cast<double>(counts[static_cast<std::size_t>(c)]) / static_cast<double>(n);
    d.between += p * (centroids.row(c) - overall).squaredNorm();
  }
  for (Eigen::Index i = 0; i < n; ++i)
    d.within += (points.row(i) - centroids.row(labels[static_cast<std::size_t>(i)])).squaredNorm();
  d.within /= static_cast<double>(n);
  d.total = (points.rowwise() - overall).rowwise().squaredNorm().mean();
  return d;
}

double variance_ratio(const RowMatrix& points, std::span<const index_t> labels) {
  return variance_decomposition(points, labels).ratio();
}

VarianceDecomposition user_variance_decomposition(const SparseIncidenceMatrix& a,
                                                  std::span<const index_t> user_labels) {
  const index_t n = a.rows();
  if (n == 0) throw std::invalid_argument("user_variance_decomposition: no users");
  if (static_cast<index_t>(user_labels.size()) != n)
    throw std::invalid_argument("user_variance_decomposition: label count mismatch");
  const int k = label_count(user_labels);

  RowMatrix sums = RowMatrix::Zero(k, a.cols());
  std::vector<double> sq(static_cast<std::size_t>(k), 0.0);
  std::vector<double> counts(static_cast<std::size_t>(k), 0.0);
  for (index_t u = 0; u < n; ++u) {
    const index_t c = user_labels[static_cast<std::size_t>(u)];
    for (index_t i : a.row(u)) sums(c, i) += 1.0;
    sq[static_cast<std::size_t>(c)] += a.row_degree(u);
    counts[static_cast<std::size_t>(c)] += 1.0;
  }
  const Eigen::RowVectorXd overall = sums.colwise().sum() / static_cast<double>(n);
  double total_sq = 0.0;
  VarianceDecomposition d;
  for (int c = 0; c < k; ++c) {
    const double nc = counts[static_cast<std::size_t>(c)];
    total_sq += sq[static_cast<std::size_t>(c)];
    if (nc == 0.0) continue;
    ++d.nonempty_clusters;
    const Eigen::RowVectorXd centroid = sums.row(c) / nc;
    const double p = nc / static_cast<double>(n);
    d.within += p * std::max(0.0, sq[static_cast<std::size_t>(c)] / nc - centroid.squaredNorm());
    d.between += p * (centroid - overall).squaredNorm();
  }
  d.total = std::max(0.0, total_sq / static_cast<double>(n) - overall.squaredNorm());
  return d;
}

VarianceRatioCurve vr_curve(const SparseIncidenceMatrix& a, int kmin, int kmax, std::span<const seed_t> seeds,
                            const SpectralOptions& options) {
  if (kmin < 2 || kmax < kmin || kmax > std::min(a.rows(), a.cols()))
    throw std::invalid_argument("vr_curve: k range must lie within [2, min(num_users, num_items)]");
  if (seeds.empty()) throw std::invalid_argument("vr_curve: no seeds");
  VarianceRatioCurve curve;
  curve.seeds.assign(seeds.begin(), seeds.end());
  for (int k = kmin; k <= kmax; ++k) {
    std::vector<double> vals;
    for (seed_t s : seeds) {
      const CoClustering cc = spectral_cocluster(a, k, s, options);
      vals.push_back(user_variance_decomposition(a, cc.user_assignment).ratio());
    }
    double mean = 0.0;
    for (double v : vals) mean += v;
    mean /= static_cast<double>(vals.size());
    double var = 0.0;
    for (double v : vals) var += (v - mean) * (v - mean);
    const double sd = vals.size() > 1 ? std::sqrt(var / static_cast<double>(vals.size() - 1)) : 0.0;
    curve.ks.push_back(k);
    curve.mean.push_back(mean);
    curve.stddev.push_back(sd);
    curve.values.push_back(std::move(vals));
    log::debug("vr_curve k=", k, " mean=", mean, " sd=", sd);
  }
  return curve;
}

VarianceRatioCurve vr_curve(const InteractionDataset& ds, int kmin, int kmax, std::span<const seed_t> seeds,
                            const SpectralOptions& options) {
  return vr_curve(incidence_matrix(ds), kmin, kmax, seeds, options);
}

KSelection select_k(const VarianceRatioCurve& curve, double epsilon) {
  if (curve.ks.size() < 3) throw std::invalid_argument("select_k: curve must cover at least three k values");
  for (std::size_t j = 0; j + 1 < curve.ks.size(); ++j) {
    const double cur = curve.mean[j];
    const double next = curve.mean[j + 1];
    double gain;
    if (cur > 0.0 && std::isfinite(cur)) {
      gain = (next - cur) / cur;
    } else {
      gain = next > cur ? std::numeric_limits<double>::infinity() : 0.0;
    }
    if (gain < epsilon) return {curve.ks[j], true};
  }
  log::warn("select_k: no plateau below relative gain ", epsilon, ", using k=", curve.ks.back());
  return {curve.ks.back(), false};
}

double adjusted_rand_index(std::span<const index_t> a, std::span<const index_t> b) {
  if (a.size() != b.size()) throw std::invalid_argument("adjusted_rand_index: size mismatch");
  const auto n = static_cast<double>(a.size());
  if (a.size() < 2) return 1.0;
  std::map<std::pair<index_t, index_t>, double> joint;
  std::map<index_t, double> ra;
  std::map<index_t, double> rb;
  for (std::size_t i = 0; i < a.size(); ++i) {
    joint[{a[i], b[i]}] += 1.0;
    ra[a[i]] += 1.0;
    rb[b[i]] += 1.0;
  }
  auto c2 = [](double x) { return x * (x - 1.0) / 2.0; };
  double index = 0.0;
  for (const auto& [_, v] : joint) index += c2(v);
  double sa = 0.0;
  double sb = 0.0;
  for (const auto& [_, v] : ra) sa += c2(v);
  for (const auto& [_, v] : rb) sb += c2(v);
  const double expected = sa * sb / c2(n);
  const double max_index = 0.5 * (sa + sb);
  if (max_index == expected) return 1.0;
  return (index - expected) / (max_index - expected);
}

void write_curve_csv(const std::filesystem::path& path, const VarianceRatioCurve& curve) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << "k,mean_vr,std_vr\n" << std::setprecision(10);
  for (std::size_t j = 0; j < curve.ks.size(); ++j)
    out << curve.ks[j] << ',' << curve.mean[j] << ',' << curve.stddev[j] << '\n';
}

}  // namespace ccw
