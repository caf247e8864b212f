#pragma once

#include <vector>

#include "ccw/corpus.hpp"
#include "ccw/types.hpp"

namespace ccw {

struct PlantedConfig {
  int blocks = 3;
  index_t users_per_block = 100;
  index_t items_per_block = 100;
  double avg_degree = 20.0;    // mean train+test interactions per user
  double noise = 0.0;          // fraction of edges leaving the user's block
  double test_fraction = 0.0;  // per-user share of edges moved to test
  double item_skew = 0.0;      // Zipf exponent for item popularity within a block
  seed_t seed = 0;
};

// Block-diagonal ("planted co-cluster") interaction data. Block labels are
// randomly permuted over indices, so index order carries no signal.
struct PlantedDataset {
  InteractionDataset data;
  std::vector<index_t> user_block;
  std::vector<index_t> item_block;
};

PlantedDataset make_planted(const PlantedConfig& config);

}  // namespace ccw
