#pragma once

#include <filesystem>
#include <string>

#include "ccw/corpus.hpp"
#include "ccw/wrapper.hpp"

namespace ccw::fixture {

// Users {0,1} x items {0,1} and users {2,3} x items {2,3}, no test split.
InteractionDataset block4();

// Two dense 4x4 blocks with one test item per user, for training smoke tests.
InteractionDataset toy_blocks();

// Small assembled model with randomized tables and coefficient network so
// every gradient path is active.
CCWModel random_model(const InteractionDataset& ds, const CoClustering& cc, ScoreMode mode, int dim,
                      BaseVariant variant, seed_t seed);

// Fresh empty directory under the system temp path.
std::filesystem::path temp_dir(const std::string& tag);

void write_file(const std::filesystem::path& path, const std::string& text);
std::string read_file(const std::filesystem::path& path);

}  // namespace ccw::fixture
