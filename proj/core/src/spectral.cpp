#include "ccw/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "ccw/kmeans.hpp"
#include "ccw/log.hpp"
#include "ccw/rng.hpp"
#include "ccw/sparse_svd.hpp"

namespace ccw {

int log2_vector_count(int k) {
  int l = 0;
  while ((1 << l) < k) ++l;
  return l;
}

CoClustering spectral_cocluster(const SparseIncidenceMatrix& a, int k, seed_t seed,
                                const SpectralOptions& options) {
  if (k < 2) throw std::invalid_argument("spectral_cocluster: k must be >= 2");
  if (k > std::min(a.rows(), a.cols()))
    throw std::invalid_argument("spectral_cocluster: k exceeds min(num_users, num_items)");

  std::vector<index_t> rows;
  std::vector<index_t> cols;
  CoClustering cc;
  cc.k = k;
  cc.seed = seed;
  for (index_t u = 0; u < a.rows(); ++u) (a.row_degree(u) > 0 ? rows : cc.isolated_users).push_back(u);
  for (index_t i = 0; i < a.cols(); ++i) (a.col_degree(i) > 0 ? cols : cc.isolated_items).push_back(i);
  if (!cc.isolated_users.empty() || !cc.isolated_items.empty()) {
    log::info("spectral: ", cc.isolated_users.size(), " isolated users and ", cc.isolated_items.size(),
              " isolated items excluded from the embedding");
  }
  const auto m = static_cast<Eigen::Index>(rows.size());
  const auto n = static_cast<Eigen::Index>(cols.size());
  if (m + n < k) throw std::invalid_argument("spectral_cocluster: fewer connected nodes than clusters");

  Eigen::VectorXd row_scale(m);
  Eigen::VectorXd col_scale(n);
  for (Eigen::Index r = 0; r < m; ++r) row_scale(r) = 1.0 / std::sqrt(a.row_degree(rows[static_cast<std::size_t>(r)]));
  for (Eigen::Index c = 0; c < n; ++c) col_scale(c) = 1.0 / std::sqrt(a.col_degree(cols[static_cast<std::size_t>(c)]));

  int ell = options.num_vectors > 0 ? options.num_vectors : k - 1;
  const int max_pairs = static_cast<int>(std::min(m, n));
  if (ell + 1 > max_pairs) {
    log::warn("spectral: only ", max_pairs, " singular pairs available, using ", max_pairs - 1);
    ell = max_pairs - 1;
  }

  RowMatrix points(m + n, std::max(ell, 1));
  if (ell >= 1) {
    ScaledIncidenceOperator op(a, rows, cols, row_scale, col_scale);
    TruncatedSvdOptions svd_opts;
    svd_opts.rank = ell + 1;
    svd_opts.oversample = options.svd_oversample;
    svd_opts.tolerance = options.svd_tolerance;
    svd_opts.max_iterations = options.svd_max_iterations;
    svd_opts.seed = derive_seed(seed, "svd");
    const TruncatedSvd svd = truncated_svd(op, svd_opts);
    cc.svd_converged = svd.converged;
    cc.singular_values.assign(svd.singular_values.data(), svd.singular_values.data() + svd.singular_values.size());
    points.topRows(m) = row_scale.asDiagonal() * svd.left.rightCols(ell);
    points.bottomRows(n) = col_scale.asDiagonal() * svd.right.rightCols(ell);
    if (options.weight_by_singular_values)
      points *= svd.singular_values.tail(ell).asDiagonal();
  } else {
    points.setZero();
  }

  KMeansOptions km;
  km.k = k;
  km.restarts = options.kmeans_restarts;
  km.max_iterations = options.kmeans_max_iterations;
  km.seed = derive_seed(seed, "kmeans");
  const KMeansResult clusters = kmeans(points, km);

  cc.user_assignment.assign(static_cast<std::size_t>(a.rows()), -1);
  cc.item_assignment.assign(static_cast<std::size_t>(a.cols()), -1);
  std::vector<std::size_t> sizes(static_cast<std::size_t>(k), 0);
  for (Eigen::Index r = 0; r < m; ++r) {
    const index_t c = clusters.labels[static_cast<std::size_t>(r)];
    cc.user_assignment[static_cast<std::size_t>(rows[static_cast<std::size_t>(r)])] = c;
    ++sizes[static_cast<std::size_t>(c)];
  }
  for (Eigen::Index c2 = 0; c2 < n; ++c2) {
    const index_t c = clusters.labels[static_cast<std::size_t>(m + c2)];
    cc.item_assignment[static_cast<std::size_t>(cols[static_cast<std::size_t>(c2)])] = c;
    ++sizes[static_cast<std::size_t>(c)];
  }
  const auto largest = static_cast<index_t>(std::max_element(sizes.begin(), sizes.end()) - sizes.begin());
  for (index_t u : cc.isolated_users) cc.user_assignment[static_cast<std::size_t>(u)] = largest;
  for (index_t i : cc.isolated_items) cc.item_assignment[static_cast<std::size_t>(i)] = largest;
  return cc;
}

CoClustering build_subgraphs(const SparseIncidenceMatrix& a, CoClustering cc) {
  if (cc.num_users() != a.rows() || cc.num_items() != a.cols())
    throw std::invalid_argument("build_subgraphs: assignment does not match matrix shape");
  const auto k = static_cast<std::size_t>(cc.k);
  cc.subgraphs.assign(k, Subgraph{});
  cc.user_local.assign(cc.user_assignment.size(), -1);
  cc.item_local.assign(cc.item_assignment.size(), -1);
  for (index_t u = 0; u < a.rows(); ++u) {
    const index_t c = cc.cluster_of_user(u);
    if (c < 0 || c >= cc.k) throw std::invalid_argument("build_subgraphs: user without a valid cluster");
    auto& g = cc.subgraphs[static_cast<std::size_t>(c)];
    cc.user_local[static_cast<std::size_t>(u)] = static_cast<index_t>(g.users.size());
    g.users.push_back(u);
  }
  for (index_t i = 0; i < a.cols(); ++i) {
    const index_t c = cc.cluster_of_item(i);
    if (c < 0 || c >= cc.k) throw std::invalid_argument("build_subgraphs: item without a valid cluster");
    auto& g = cc.subgraphs[static_cast<std::size_t>(c)];
    cc.item_local[static_cast<std::size_t>(i)] = static_cast<index_t>(g.items.size());
    g.items.push_back(i);
  }
  for (index_t u = 0; u < a.rows(); ++u) {
    const index_t c = cc.cluster_of_user(u);
    auto& g = cc.subgraphs[static_cast<std::size_t>(c)];
    for (index_t i : a.row(u)) {
      if (cc.cluster_of_item(i) != c) continue;
      g.edges.push_back({u, i});
      g.local_edges.push_back({cc.user_local[static_cast<std::size_t>(u)], cc.item_local[static_cast<std::size_t>(i)]});
    }
  }
  return cc;
}

std::size_t cut_size(const SparseIncidenceMatrix& a, const CoClustering& cc) {
  std::size_t cut = 0;
  for (index_t u = 0; u < a.rows(); ++u)
    for (index_t i : a.row(u)) cut += cc.same_cluster(u, i) ? 0 : 1;
  return cut;
}

double block_density_stat(const SparseIncidenceMatrix& a, const CoClustering& cc) {
  if (a.nnz() == 0) return 0.0;
  return 1.0 - static_cast<double>(cut_size(a, cc)) / static_cast<double>(a.nnz());
}

std::string serialize_clustering(const CoClustering& cc) {
  std::ostringstream os;
  os << "# ccw-clustering k=" << cc.k << " seed=" << cc.seed << " users=" << cc.num_users()
     << " items=" << cc.num_items() << '\n';
  for (index_t u = 0; u < cc.num_users(); ++u) os << "user " << u << ' ' << cc.cluster_of_user(u) << '\n';
  for (index_t i = 0; i < cc.num_items(); ++i) os << "item " << i << ' ' << cc.cluster_of_item(i) << '\n';
  return os.str();
}

CoClustering parse_clustering(const std::string& text) {
  std::istringstream in(text);
  std::string header;
  if (!std::getline(in, header) || header.rfind("# ccw-clustering", 0) != 0)
    throw DataError("clustering file: missing header");
  CoClustering cc;
  long long users = -1;
  long long items = -1;
  unsigned long long seed = 0;
  if (std::sscanf(header.c_str(), "# ccw-clustering k=%d seed=%llu users=%lld items=%lld", &cc.k, &seed, &users,
                  &items) != 4 || cc.k < 1 || users < 0 || items < 0)
    throw DataError("clustering file: malformed header '" + header + "'");
  cc.seed = seed;
  cc.user_assignment.assign(static_cast<std::size_t>(users), -1);
  cc.item_assignment.assign(static_cast<std::size_t>(items), -1);
  std::string kind;
  long long idx = 0;
  long long cluster = 0;
  std::size_t line_no = 1;
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream ls(line);
    if (!(ls >> kind >> idx >> cluster) || cluster < 0 || cluster >= cc.k)
      throw DataError("clustering file: line " + std::to_string(line_no) + " malformed");
    auto& target = kind == "user" ? cc.user_assignment : cc.item_assignment;
    if ((kind != "user" && kind != "item") || idx < 0 || idx >= static_cast<long long>(target.size()))
      throw DataError("clustering file: line " + std::to_string(line_no) + " has a bad node");
    target[static_cast<std::size_t>(idx)] = static_cast<index_t>(cluster);
  }
  auto missing = [](const std::vector<index_t>& v) { return std::find(v.begin(), v.end(), -1) != v.end(); };
  if (missing(cc.user_assignment) || missing(cc.item_assignment))
    throw DataError("clustering file: not every node is assigned");
  return cc;
}

void write_clustering(const std::filesystem::path& path, const CoClustering& cc) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << serialize_clustering(cc);
}

CoClustering read_clustering(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_clustering(ss.str());
}

}  // namespace ccw
