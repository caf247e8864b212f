#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "ccw/embedding.hpp"
#include "ccw/train.hpp"
#include "ccw/wrapper.hpp"

namespace ccw::cli {

// "section.key" -> value. Sorted, so the canonical text (and hash) is stable.
using KeyValues = std::map<std::string, std::string>;

struct ConfigKey {
  std::string key;   // section.key
  std::string flag;  // long flag without dashes
  std::string help;
  std::string fallback;
};

// Every key a config file may contain.
const std::vector<ConfigKey>& config_keys();

// INI-style file: [section] headers, key = value lines, ';' or '#' comments.
// Unknown keys raise ConfigError.
KeyValues read_config_file(const std::filesystem::path& path);

// Defaults, then `file`, then `overrides`.
KeyValues merge_config(const KeyValues& file, const KeyValues& overrides);

std::string canonical_text(const KeyValues& kv);
std::string config_hash(const KeyValues& kv);

struct RunConfig {
  std::filesystem::path train_path;
  std::filesystem::path test_path;
  std::string dataset_name;

  bool auto_k = false;
  int k = 8;
  int kmin = 2;
  int kmax = 12;
  double epsilon = 0.02;
  int vr_seeds = 10;

  BaseVariant variant = BaseVariant::plain_mf;
  AssembleOptions model;
  TrainConfig train;
  std::string validation = "test";  // or "holdout"
  double holdout_fraction = 0.1;

  std::vector<ScoreMode> bench_modes;
  int bench_seeds = 5;

  std::filesystem::path output;
  bool overwrite = false;
  seed_t seed = 0;

  // Throws ConfigError.
  void validate() const;
};

// Throws ConfigError on malformed values.
RunConfig to_run_config(const KeyValues& kv);

}  // namespace ccw::cli
