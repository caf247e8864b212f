#include "ccw/cli/run_config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <charconv>
#include <cctype>
#include <fstream>
#include <sstream>

#include "ccw/hash.hpp"

namespace ccw::cli {

namespace pt = boost::property_tree;

const std::vector<ConfigKey>& config_keys() {
  static const std::vector<ConfigKey> keys{
      {"data.train", "train", "train split (adjacency lines)", ""},
      {"data.test", "test", "test split (adjacency lines)", ""},
      {"data.name", "dataset-name", "label written into reports", "dataset"},
      {"cluster.k", "num-clusters", "cluster count, or auto", "8"},
      {"cluster.kmin", "kmin", "smallest k scanned by auto", "2"},
      {"cluster.kmax", "kmax", "largest k scanned by auto", "12"},
      {"cluster.epsilon", "epsilon", "relative VR gain threshold", "0.02"},
      {"cluster.seeds", "seeds", "clustering seeds per k in the VR scan", "10"},
      {"model.variant", "variant", "mf or propagated", "mf"},
      {"model.dim", "dim", "embedding size", "64"},
      {"model.local_dim", "local-dim", "local embedding size (0 = dim)", "0"},
      {"model.layers", "layers", "propagation layers", "3"},
      {"model.lic_hidden", "lic-hidden", "LIC hidden width (0 = dim)", "0"},
      {"model.mode", "mode", "with-lic, equal-weight or base-only", "with-lic"},
      {"train.learning_rate", "lr", "Adam step size", "0.001"},
      {"train.lambda", "lambda", "L2 coefficient", "0.0001"},
      {"train.batch_size", "batch-size", "triples per step", "2048"},
      {"train.epochs", "epochs", "maximum epochs", "400"},
      {"train.beta1", "beta1", "Adam first moment decay", "0.9"},
      {"train.beta2", "beta2", "Adam second moment decay", "0.999"},
      {"train.eval_every", "eval-every", "epochs between validations (0 = off)", "10"},
      {"train.patience", "patience", "validations without improvement before stopping (0 = off)", "5"},
      {"train.eval_k", "eval-k", "cutoff for Recall/NDCG", "20"},
      {"train.full_norm", "full-norm", "penalize whole tables instead of batch rows", "false"},
      {"train.validation", "validation", "test or holdout", "test"},
      {"train.holdout_fraction", "holdout-fraction", "share of train items held out", "0.1"},
      {"benchmark.modes", "modes", "comma separated score modes", "base-only,equal-weight,with-lic"},
      {"benchmark.seeds", "bench-seeds", "seeds per mode", "5"},
      {"run.output", "out", "output directory", ""},
      {"run.seed", "seed", "master seed", "0"},
      {"run.overwrite", "overwrite", "allow a non-empty output directory", "false"},
  };
  return keys;
}

namespace {

bool known(const std::string& key) {
  for (const auto& k : config_keys())
    if (k.key == key) return true;
  return false;
}

template <typename T>
T parse_number(const KeyValues& kv, const std::string& key) {
  const std::string& s = kv.at(key);
  T value{};
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc{} || ptr != s.data() + s.size())
    throw ConfigError("config " + key + ": not a number: '" + s + "'");
  return value;
}

bool parse_bool(const KeyValues& kv, const std::string& key) {
  const std::string& s = kv.at(key);
  if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
  if (s == "false" || s == "0" || s == "no" || s == "off") return false;
  throw ConfigError("config " + key + ": not a boolean: '" + s + "'");
}

}  // namespace

namespace {

// "value   ; note" -> "value". The marker must follow whitespace.
std::string strip_inline_comment(const std::string& v) {
  std::size_t cut = v.size();
  for (std::size_t p = 1; p < v.size(); ++p) {
    if ((v[p] == ';' || v[p] == '#') && std::isspace(static_cast<unsigned char>(v[p - 1]))) {
      cut = p;
      break;
    }
  }
  std::size_t end = cut;
  while (end > 0 && std::isspace(static_cast<unsigned char>(v[end - 1]))) --end;
  return v.substr(0, end);
}

}  // namespace

KeyValues read_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  pt::ptree tree;
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError("config " + path.string() + ": " + e.message() + " (line " + std::to_string(e.line()) + ")");
  }
  KeyValues kv;
  for (const auto& [section, body] : tree) {
    if (body.empty() && !body.data().empty()) throw ConfigError("config " + path.string() + ": key '" + section + "' outside a section");
    for (const auto& [name, value] : body) {
      const std::string key = section + "." + name;
      if (!known(key)) throw ConfigError("config " + path.string() + ": unknown key " + key);
      kv[key] = strip_inline_comment(value.data());
    }
  }
  return kv;
}

KeyValues merge_config(const KeyValues& file, const KeyValues& overrides) {
  KeyValues kv;
  for (const auto& k : config_keys()) kv[k.key] = k.fallback;
  for (const auto& [key, value] : file) kv[key] = value;
  for (const auto& [key, value] : overrides) {
    if (!known(key)) throw ConfigError("unknown config key " + key);
    kv[key] = value;
  }
  return kv;
}

std::string canonical_text(const KeyValues& kv) {
  std::ostringstream os;
  for (const auto& [key, value] : kv) {
    // Output location and overwrite do not change results.
    if (key == "run.output" || key == "run.overwrite") continue;
    os << key << '=' << value << '\n';
  }
  return os.str();
}

std::string config_hash(const KeyValues& kv) { return sha256_hex(canonical_text(kv)); }

RunConfig to_run_config(const KeyValues& kv) {
  RunConfig c;
  c.train_path = kv.at("data.train");
  c.test_path = kv.at("data.test");
  c.dataset_name = kv.at("data.name");
  if (kv.at("cluster.k") == "auto") {
    c.auto_k = true;
  } else {
    c.k = parse_number<int>(kv, "cluster.k");
  }
  c.kmin = parse_number<int>(kv, "cluster.kmin");
  c.kmax = parse_number<int>(kv, "cluster.kmax");
  c.epsilon = parse_number<double>(kv, "cluster.epsilon");
  c.vr_seeds = parse_number<int>(kv, "cluster.seeds");

  c.variant = parse_base_variant(kv.at("model.variant"));
  c.model.dim = parse_number<int>(kv, "model.dim");
  c.model.local_dim = parse_number<int>(kv, "model.local_dim");
  c.model.layers = parse_number<int>(kv, "model.layers");
  c.model.lic_hidden = parse_number<int>(kv, "model.lic_hidden");
  c.model.mode = parse_score_mode(kv.at("model.mode"));

  c.train.learning_rate = parse_number<double>(kv, "train.learning_rate");
  c.train.lambda = parse_number<double>(kv, "train.lambda");
  c.train.batch_size = parse_number<int>(kv, "train.batch_size");
  c.train.epochs = parse_number<int>(kv, "train.epochs");
  c.train.adam_beta1 = parse_number<double>(kv, "train.beta1");
  c.train.adam_beta2 = parse_number<double>(kv, "train.beta2");
  c.train.eval_every = parse_number<int>(kv, "train.eval_every");
  c.train.early_stop_patience = parse_number<int>(kv, "train.patience");
  c.train.eval_k = parse_number<int>(kv, "train.eval_k");
  c.train.full_norm_regularizer = parse_bool(kv, "train.full_norm");
  c.validation = kv.at("train.validation");
  c.holdout_fraction = parse_number<double>(kv, "train.holdout_fraction");

  std::stringstream modes(kv.at("benchmark.modes"));
  for (std::string m; std::getline(modes, m, ',');)
    if (!m.empty()) c.bench_modes.push_back(parse_score_mode(m));
  c.bench_seeds = parse_number<int>(kv, "benchmark.seeds");

  c.output = kv.at("run.output");
  c.overwrite = parse_bool(kv, "run.overwrite");
  c.seed = parse_number<seed_t>(kv, "run.seed");
  return c;
}

void RunConfig::validate() const {
  if (auto_k) {
    if (kmin < 2 || kmax < kmin + 2) throw ConfigError("k=auto needs 2 <= kmin and kmax >= kmin + 2");
    if (vr_seeds < 1) throw ConfigError("cluster.seeds must be >= 1");
    if (!(epsilon >= 0.0)) throw ConfigError("cluster.epsilon must be >= 0");
  } else if (k < 2) {
    throw ConfigError("cluster.k must be >= 2 (or auto)");
  }
  if (model.dim < 1 || model.local_dim < 0 || model.lic_hidden < 0 || model.layers < 0)
    throw ConfigError("model sizes must be positive");
  if (validation != "test" && validation != "holdout") throw ConfigError("train.validation must be test or holdout");
  if (!(holdout_fraction > 0.0 && holdout_fraction < 1.0)) throw ConfigError("train.holdout_fraction must be in (0,1)");
  if (bench_seeds < 1) throw ConfigError("benchmark.seeds must be >= 1");
  train.validate();
}

}  // namespace ccw::cli
