#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "ccw/cli/run_config.hpp"
#include "ccw/evalkit.hpp"

namespace ccw::cli {

enum ExitCode : int { kOk = 0, kFailure = 1, kConfigError = 2, kDataError = 3, kNumericError = 4 };

// Parses argv, dispatches a subcommand and maps exceptions to exit codes.
int run(int argc, const char* const* argv);

// Creates `dir`, or accepts it when empty (or when overwrite is set).
void prepare_output_dir(const std::filesystem::path& dir, bool overwrite);

struct PipelineResult {
  int k = 0;
  EvalReport report;
  std::vector<std::filesystem::path> files;  // relative to the output directory
};

// ingest -> select-k (auto) -> cocluster -> train -> evaluate, with a manifest.
PipelineResult run_pipeline(const KeyValues& kv);

}  // namespace ccw::cli
