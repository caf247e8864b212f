#pragma once

#include <filesystem>
#include <span>
#include <vector>

#include "ccw/corpus.hpp"
#include "ccw/spectral.hpp"
#include "ccw/types.hpp"

namespace ccw {

// Mean squared distance to the centroid. Rows are points.
double variance(const RowMatrix& points);

// Within (W), between (B) and total variance of a labelled point set.
// W + B == total for any labelling.
struct VarianceDecomposition {
  double within = 0.0;
  double between = 0.0;
  double total = 0.0;
  int nonempty_clusters = 0;

  // B / W; +infinity when W == 0 and B > 0, and 0 for a single cluster.
  double ratio() const;
};

VarianceDecomposition variance_decomposition(const RowMatrix& points, std::span<const index_t> labels);
double variance_ratio(const RowMatrix& points, std::span<const index_t> labels);

// Variance ratio of users whose feature vectors are the binary rows of A.
// Rows stay sparse; per-cluster variance uses s^2 = mean ||x||^2 - ||centroid||^2.
VarianceDecomposition user_variance_decomposition(const SparseIncidenceMatrix& a,
                                                  std::span<const index_t> user_labels);

struct VarianceRatioCurve {
  std::vector<int> ks;
  std::vector<double> mean;
  std::vector<double> stddev;  // sample standard deviation over seeds
  std::vector<seed_t> seeds;
  std::vector<std::vector<double>> values;  // [k index][seed index]
};

// For each k in [kmin, kmax], the user-side variance ratio of a spectral
// co-clustering averaged over the seeds.
VarianceRatioCurve vr_curve(const SparseIncidenceMatrix& a, int kmin, int kmax, std::span<const seed_t> seeds,
                            const SpectralOptions& options = {});
VarianceRatioCurve vr_curve(const InteractionDataset& ds, int kmin, int kmax, std::span<const seed_t> seeds,
                            const SpectralOptions& options = {});

struct KSelection {
  int k = 0;
  bool plateau_found = false;
};

// Smallest k whose relative gain to k+1 is below epsilon; the largest k when
// no such step exists.
KSelection select_k(const VarianceRatioCurve& curve, double epsilon = 0.02);

double adjusted_rand_index(std::span<const index_t> a, std::span<const index_t> b);

// "k,mean_vr,std_vr"
void write_curve_csv(const std::filesystem::path& path, const VarianceRatioCurve& curve);

}  // namespace ccw
