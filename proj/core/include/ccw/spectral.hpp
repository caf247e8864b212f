#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "ccw/corpus.hpp"
#include "ccw/types.hpp"

namespace ccw {

// In-cluster part of the interaction graph for one cluster. Node lists are
// ascending global indices; a node's position in its list is its local index.
struct Subgraph {
  std::vector<index_t> users;
  std::vector<index_t> items;
  std::vector<Edge> edges;        // global indices
  std::vector<Edge> local_edges;  // local indices
};

struct CoClustering {
  int k = 0;
  seed_t seed = 0;
  std::vector<index_t> user_assignment;
  std::vector<index_t> item_assignment;

  // Filled by build_subgraphs.
  std::vector<Subgraph> subgraphs;
  std::vector<index_t> user_local;
  std::vector<index_t> item_local;

  // Zero-degree nodes, placed into the largest cluster.
  std::vector<index_t> isolated_users;
  std::vector<index_t> isolated_items;

  // Spectral diagnostics.
  std::vector<double> singular_values;
  bool svd_converged = true;

  index_t num_users() const { return static_cast<index_t>(user_assignment.size()); }
  index_t num_items() const { return static_cast<index_t>(item_assignment.size()); }
  index_t cluster_of_user(index_t u) const { return user_assignment[static_cast<std::size_t>(u)]; }
  index_t cluster_of_item(index_t i) const { return item_assignment[static_cast<std::size_t>(i)]; }
  bool same_cluster(index_t u, index_t i) const { return cluster_of_user(u) == cluster_of_item(i); }
  bool has_subgraphs() const { return static_cast<int>(subgraphs.size()) == k; }
};

struct SpectralOptions {
  int num_vectors = 0;  // nontrivial singular pairs kept; 0 selects k - 1
  int kmeans_restarts = 10;
  int kmeans_max_iterations = 300;
  double svd_tolerance = 1e-8;
  int svd_max_iterations = 300;
  int svd_oversample = 10;
  // Scale embedding coordinate j by sigma_j so weak (noise) directions count
  // less in k-means when k exceeds the number of real blocks.
  bool weight_by_singular_values = true;
};

// ceil(log2 k): the compact embedding size of the classic bipartition
// recursion. Noticeably less reliable than k - 1 once k > 3.
int log2_vector_count(int k);

// k-way spectral co-clustering of the rows and columns of A. The degree
// normalized matrix D1^-1/2 A D2^-1/2 is factored, the leading (trivial)
// singular pair is dropped, and users and items embedded as D1^-1/2 U and
// D2^-1/2 V are clustered together by k-means.
CoClustering spectral_cocluster(const SparseIncidenceMatrix& a, int k, seed_t seed,
                                const SpectralOptions& options = {});

// Populates subgraphs and local index maps for an assignment.
CoClustering build_subgraphs(const SparseIncidenceMatrix& a, CoClustering cc);

// Fraction of edges whose two endpoints share a cluster.
double block_density_stat(const SparseIncidenceMatrix& a, const CoClustering& cc);

// Number of edges joining different clusters.
std::size_t cut_size(const SparseIncidenceMatrix& a, const CoClustering& cc);

// Text form: "# ccw-clustering k=<k> seed=<seed> users=<n> items=<m>" then one
// "<user|item> <index> <cluster>" line per node.
std::string serialize_clustering(const CoClustering& cc);
CoClustering parse_clustering(const std::string& text);
void write_clustering(const std::filesystem::path& path, const CoClustering& cc);
CoClustering read_clustering(const std::filesystem::path& path);

}  // namespace ccw
