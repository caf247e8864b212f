#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "ccw/corpus.hpp"
#include "ccw/embedding.hpp"
#include "ccw/wrapper.hpp"

namespace ccw {

// Binary layouts (little-endian, IEEE-754 doubles, row-major tables):
//
// model dump
//   char[8]  "CCWEMB01"
//   u32      format version (1)
//   u32      variant (0 = mf, 1 = propagated)
//   u32      layers
//   u32      dim
//   u64      num_users
//   u64      num_items
//   u64      seed
//   f64[num_users * dim]  user table
//   f64[num_items * dim]  item table
//
// composite checkpoint
//   char[8]  "CCWCKPT1"
//   u32      format version (1)
//   u32      score mode (0 = with-lic, 1 = equal-weight, 2 = base-only)
//   u32      k
//   char[64] SHA-256 (hex) of the serialized clustering
//   model dump (global), then k model dumps (local, cluster order)
//   u32      lic input width, u32 lic hidden width
//   f64[input * hidden] w1, f64[hidden] b1, f64[hidden] w2, f64 b2

void save_model(std::ostream& out, const EmbeddingModel& model);
EmbeddingModel load_model(std::istream& in);

std::string clustering_hash(const CoClustering& cc);

void save_checkpoint(const std::filesystem::path& path, const CCWModel& model);

// Rebuilds a model from a checkpoint for the given train data and clustering.
// Throws DataError when the clustering hash differs from the stored one.
CCWModel load_checkpoint(const std::filesystem::path& path, const InteractionDataset& ds, const CoClustering& cc);

// Stored clustering hash, read without loading tables.
std::string checkpoint_clustering_hash(const std::filesystem::path& path);

}  // namespace ccw
