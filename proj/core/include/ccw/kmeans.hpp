#pragma once

#include <vector>

#include "ccw/types.hpp"

namespace ccw {

struct KMeansOptions {
  int k = 2;
  int restarts = 10;
  int max_iterations = 300;
  seed_t seed = 0;
};

struct KMeansResult {
  std::vector<index_t> labels;
  RowMatrix centroids;
  double inertia = 0.0;  // within-cluster sum of squares
  int best_restart = 0;
  int iterations = 0;
};

// Lloyd iterations from greedy farthest-point seeding; the first center of
// each restart is drawn uniformly. The lowest-inertia restart wins, earlier
// restarts on ties. Empty clusters are re-seeded with the point farthest from
// its current centroid. Rows of `points` are the observations.
KMeansResult kmeans(const RowMatrix& points, const KMeansOptions& options);

// Farthest-point seeding alone; exposed for tests.
std::vector<index_t> farthest_point_seeds(const RowMatrix& points, int k, index_t first);

}  // namespace ccw
