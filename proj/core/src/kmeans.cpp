#include "ccw/kmeans.hpp"

#include <limits>

#include "ccw/rng.hpp"

namespace ccw {

std::vector<index_t> farthest_point_seeds(const RowMatrix& points, int k, index_t first) {
  const Eigen::Index n = points.rows();
  std::vector<index_t> seeds{first};
  Eigen::VectorXd min_dist = (points.rowwise() - points.row(first)).rowwise().squaredNorm();
  while (static_cast<int>(seeds.size()) < k) {
    Eigen::Index arg = 0;
    double best = -1.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (min_dist(i) > best) {
        best = min_dist(i);
        arg = i;
      }
    }
    seeds.push_back(static_cast<index_t>(arg));
    min_dist = min_dist.cwiseMin((points.rowwise() - points.row(arg)).rowwise().squaredNorm());
  }
  return seeds;
}

namespace {

struct Run {
  std::vector<index_t> labels;
  RowMatrix centroids;
  double inertia;
  int iterations;
};

// Nearest centroid per point (lowest cluster index on ties); returns inertia.
double assign(const RowMatrix& points, const RowMatrix& centroids, std::vector<index_t>& labels,
              Eigen::VectorXd& dist) {
  const Eigen::Index n = points.rows();
  const Eigen::Index k = centroids.rows();
  double inertia = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    double best = std::numeric_limits<double>::infinity();
    index_t arg = 0;
    for (Eigen::Index c = 0; c < k; ++c) {
      const double d = (points.row(i) - centroids.row(c)).squaredNorm();
      if (d < best) {
        best = d;
        arg = static_cast<index_t>(c);
      }
    }
    labels[static_cast<std::size_t>(i)] = arg;
    dist(i) = best;
    inertia += best;
  }
  return inertia;
}

Run lloyd(const RowMatrix& points, int k, index_t first, int max_iterations) {
  const Eigen::Index n = points.rows();
  const Eigen::Index dim = points.cols();
  const auto seeds = farthest_point_seeds(points, k, first);
  RowMatrix centroids(k, dim);
  for (int c = 0; c < k; ++c) centroids.row(c) = points.row(seeds[static_cast<std::size_t>(c)]);

  std::vector<index_t> labels(static_cast<std::size_t>(n), -1);
  std::vector<index_t> previous;
  Eigen::VectorXd dist(n);
  std::vector<Eigen::Index> counts(static_cast<std::size_t>(k));
  int it = 0;
  double inertia = 0.0;
  for (; it < max_iterations; ++it) {
    previous = labels;
    assign(points, centroids, labels, dist);

    std::fill(counts.begin(), counts.end(), 0);
    for (index_t l : labels) ++counts[static_cast<std::size_t>(l)];
    for (int c = 0; c < k; ++c) {
      if (counts[static_cast<std::size_t>(c)] > 0) continue;
      Eigen::Index far = 0;
      double far_d = -1.0;
      for (Eigen::Index i = 0; i < n; ++i) {
        if (counts[static_cast<std::size_t>(labels[static_cast<std::size_t>(i)])] > 1 && dist(i) > far_d) {
          far_d = dist(i);
          far = i;
        }
      }
      --counts[static_cast<std::size_t>(labels[static_cast<std::size_t>(far)])];
      labels[static_cast<std::size_t>(far)] = static_cast<index_t>(c);
      counts[static_cast<std::size_t>(c)] = 1;
      dist(far) = 0.0;
    }

    centroids.setZero();
    for (Eigen::Index i = 0; i < n; ++i) centroids.row(labels[static_cast<std::size_t>(i)]) += points.row(i);
    for (int c = 0; c < k; ++c) centroids.row(c) /= static_cast<double>(counts[static_cast<std::size_t>(c)]);

    if (labels == previous) break;
  }
  inertia = 0.0;
  for (Eigen::Index i = 0; i < n; ++i)
    inertia += (points.row(i) - centroids.row(labels[static_cast<std::size_t>(i)])).squaredNorm();
  return {std::move(labels), std::move(centroids), inertia, it + 1};
}

}  // namespace

KMeansResult kmeans(const RowMatrix& points, const KMeansOptions& options) {
  if (options.k < 1) throw std::invalid_argument("kmeans: k must be >= 1");
  if (points.rows() < options.k) throw std::invalid_argument("kmeans: fewer points than clusters");
  if (options.restarts < 1) throw std::invalid_argument("kmeans: restarts must be >= 1");

  KMeansResult best;
  best.inertia = std::numeric_limits<double>::infinity();
  for (int r = 0; r < options.restarts; ++r) {
    Rng rng(derive_seed(options.seed, static_cast<std::uint64_t>(r)));
    std::uniform_int_distribution<Eigen::Index> pick(0, points.rows() - 1);
    Run run = lloyd(points, options.k, static_cast<index_t>(pick(rng)), options.max_iterations);
    if (run.inertia < best.inertia) {
      best.labels = std::move(run.labels);
      best.centroids = std::move(run.centroids);
      best.inertia = run.inertia;
      best.best_restart = r;
      best.iterations = run.iterations;
    }
  }
  return best;
}

}  // namespace ccw
