#include "ccw/cli/commands.hpp"

#include <CLI11.hpp>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <json.hpp>
#include <sstream>

#include "ccw/checkpoint.hpp"
#include "ccw/clusterqual.hpp"
#include "ccw/corpus.hpp"
#include "ccw/hash.hpp"
#include "ccw/log.hpp"
#include "ccw/plot.hpp"
#include "ccw/rng.hpp"
#include "ccw/spectral.hpp"
#include "ccw/synth.hpp"
#include "ccw/train.hpp"
#include "ccw/wrapper.hpp"

namespace ccw::cli {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

void prepare_output_dir(const fs::path& dir, bool overwrite) {
  if (dir.empty()) throw ConfigError("an output directory is required (--out or run.output)");
  if (fs::exists(dir)) {
    if (!fs::is_directory(dir)) throw ConfigError("output path " + dir.string() + " is not a directory");
    if (!fs::is_empty(dir) && !overwrite)
      throw ConfigError("output directory " + dir.string() + " is not empty (pass --overwrite)");
    return;
  }
  fs::create_directories(dir);
}

namespace {

// Rethrows with the stage name prefixed, keeping the exception category.
template <typename F>
auto stage(const char* name, F&& body) -> decltype(body()) {
  const std::string prefix = std::string("stage ") + name + ": ";
  try {
    return body();
  } catch (const ConfigError& e) {
    throw ConfigError(prefix + e.what());
  } catch (const DataError& e) {
    throw DataError(prefix + e.what());
  } catch (const NumericError& e) {
    throw NumericError(prefix + e.what());
  } catch (const std::exception& e) {
    throw std::runtime_error(prefix + e.what());
  }
}

struct StageSeeds {
  seed_t master;
  seed_t select_k;
  seed_t cocluster;
  seed_t model;
  seed_t train;
  seed_t holdout;
  seed_t benchmark;

  explicit StageSeeds(seed_t m)
      : master(m),
        select_k(derive_seed(m, "select-k")),
        cocluster(derive_seed(m, "cocluster")),
        model(derive_seed(m, "model")),
        train(derive_seed(m, "train")),
        holdout(derive_seed(m, "holdout")),
        benchmark(derive_seed(m, "benchmark")) {}

  json to_json() const {
    return {{"scheme", "splitmix64(master, fnv1a(stage name))"},
            {"master", master},
            {"select-k", select_k},
            {"cocluster", cocluster},
            {"model", model},
            {"train", train},
            {"holdout", holdout}};
  }
};

// Files written by a command, relative to its output directory.
class Artifacts {
 public:
  explicit Artifacts(fs::path root) : root_(std::move(root)) {}
  fs::path path(const std::string& name) {
    files_.emplace_back(name);
    return root_ / name;
  }
  const fs::path& root() const { return root_; }
  const std::vector<fs::path>& files() const { return files_; }

 private:
  fs::path root_;
  std::vector<fs::path> files_;
};

InteractionDataset load_data(const RunConfig& rc) {
  if (rc.train_path.empty() || rc.test_path.empty()) throw ConfigError("data.train and data.test are required");
  LoadReport report;
  InteractionDataset ds = load_dataset(rc.train_path, rc.test_path, &report);
  log::info("loaded ", rc.train_path.string(), ": ", ds.num_users(), " users, ", ds.num_items(), " items, ",
            ds.train_edges().size(), " train / ", ds.test_edges().size(), " test edges");
  return ds;
}

json stats_json(const InteractionDataset& ds) {
  return {{"users", ds.num_users()},
          {"items", ds.num_items()},
          {"train_edges", ds.train_edges().size()},
          {"test_edges", ds.test_edges().size()},
          {"test_users", ds.test_users().size()},
          {"train_density", ds.train_density()},
          {"combined_density", ds.combined_density()}};
}

void write_json(const fs::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

std::vector<seed_t> vr_seed_list(const RunConfig& rc, const StageSeeds& seeds) {
  std::vector<seed_t> out;
  for (int s = 0; s < rc.vr_seeds; ++s) out.push_back(derive_seed(seeds.select_k, static_cast<std::uint64_t>(s)));
  return out;
}

int stage_select_k(const RunConfig& rc, const InteractionDataset& ds, const StageSeeds& seeds, Artifacts& art) {
  const auto list = vr_seed_list(rc, seeds);
  const VarianceRatioCurve curve = vr_curve(ds, rc.kmin, rc.kmax, list);
  write_curve_csv(art.path("vr_curve.csv"), curve);
  plot::Series s{"mean VR", {}, curve.mean, curve.stddev};
  for (int k : curve.ks) s.x.push_back(k);
  plot::write_text(art.path("vr_curve.svg"), plot::line_chart_svg("Variance ratio by cluster count", "k",
                                                                  "variance ratio", {s}));
  const KSelection sel = select_k(curve, rc.epsilon);
  log::info("select-k: k=", sel.k, sel.plateau_found ? "" : " (no plateau)");
  return sel.k;
}

CoClustering stage_cocluster(const InteractionDataset& ds, int k, const StageSeeds& seeds, Artifacts& art) {
  const SparseIncidenceMatrix a = incidence_matrix(ds);
  CoClustering cc = build_subgraphs(a, spectral_cocluster(a, k, seeds.cocluster));
  if (!cc.svd_converged) log::warn("cocluster: singular vectors did not reach tolerance");
  log::info("cocluster: k=", k, ", in-block edge fraction ", block_density_stat(a, cc));
  write_clustering(art.path("clusters.txt"), cc);
  return cc;
}

struct TrainedModel {
  CCWModel model;
  TrainResult result;
};

TrainedModel stage_train(const RunConfig& rc, const InteractionDataset& ds, const CoClustering& cc,
                         const StageSeeds& seeds, Artifacts& art) {
  AssembleOptions opts = rc.model;
  TrainedModel out{assemble_ccw(ds, cc, rc.variant, opts, seeds.model), {}};
  TrainConfig tc = rc.train;
  tc.seed = seeds.train;
  tc.diagnostic_path = art.root() / "nonfinite_batch.csv";
  out.result = train_ccw(out.model, ds, tc, nullptr, [](const EpochRecord& r) {
    if (std::isfinite(r.val_recall))
      log::info("epoch ", r.epoch, " loss ", r.loss, " recall ", r.val_recall, " ndcg ", r.val_ndcg);
    else
      log::debug("epoch ", r.epoch, " loss ", r.loss);
  });
  write_history_csv(art.path("epoch_log.csv"), out.result.history, tc.eval_k);
  save_checkpoint(art.path("checkpoint.ccw"), out.model);
  return out;
}

EvalReport stage_evaluate(const RunConfig& rc, const CCWModel& model, const InteractionDataset& ds,
                          const std::string& cfg_hash, Artifacts& art) {
  EvalReport r = evaluate(model, ds, rc.train.eval_k);
  r.dataset = rc.dataset_name;
  r.mode = std::string(to_string(model.mode));
  r.variant = std::string(to_string(rc.variant));
  r.clusters = model.k();
  r.seed = rc.seed;
  r.config_hash = cfg_hash;
  write_report_json(art.path("report.json"), r);
  write_report_csv(art.path("report.csv"), r);
  log::info("evaluate: Recall@", r.k, " ", r.recall, ", NDCG@", r.k, " ", r.ndcg, " over ", r.num_users, " users");
  return r;
}

// Training data for clustering and fitting: the train split itself, or what
// remains of it after holding out a validation slice.
InteractionDataset fit_data(const RunConfig& rc, const InteractionDataset& ds, const StageSeeds& seeds) {
  if (rc.validation == "holdout") return split_holdout(ds, rc.holdout_fraction, seeds.holdout);
  return ds;
}

void write_manifest(const fs::path& root, const KeyValues& kv, const StageSeeds& seeds, const std::string& hash,
                    const PipelineResult& result, bool auto_k) {
  json files = json::array();
  for (const auto& f : result.files) {
    const fs::path p = root / f;
    files.push_back({{"path", f.generic_string()}, {"bytes", fs::file_size(p)}, {"sha256", sha256_file(p)}});
  }
  json config = json::object();
  for (const auto& [key, value] : kv) config[key] = value;
  write_json(root / "manifest.json", {{"config_hash", hash},
                                      {"config", config},
                                      {"seeds", seeds.to_json()},
                                      {"k", result.k},
                                      {"k_source", auto_k ? "auto" : "fixed"},
                                      {"metrics",
                                       {{"recall", result.report.recall},
                                        {"ndcg", result.report.ndcg},
                                        {"k", result.report.k},
                                        {"users", result.report.num_users}}},
                                      {"files", files}});
}

RunConfig checked(const KeyValues& kv) {
  RunConfig rc = to_run_config(kv);
  rc.validate();
  return rc;
}

}  // namespace

PipelineResult run_pipeline(const KeyValues& kv) {
  const RunConfig rc = checked(kv);
  const std::string hash = config_hash(kv);
  const StageSeeds seeds(rc.seed);
  prepare_output_dir(rc.output, rc.overwrite);
  Artifacts art(rc.output);
  plot::write_text(art.path("config.ini.txt"), canonical_text(kv));

  PipelineResult result;
  const InteractionDataset ds = stage("ingest", [&] {
    InteractionDataset d = load_data(rc);
    write_json(art.path("data_stats.json"), stats_json(d));
    return d;
  });
  const InteractionDataset fit = stage("ingest", [&] { return fit_data(rc, ds, seeds); });
  result.k = rc.auto_k ? stage("select-k", [&] { return stage_select_k(rc, fit, seeds, art); }) : rc.k;
  const CoClustering cc = stage("cocluster", [&] { return stage_cocluster(fit, result.k, seeds, art); });
  const TrainedModel trained = stage("train", [&] { return stage_train(rc, fit, cc, seeds, art); });
  result.report = stage("evaluate", [&] { return stage_evaluate(rc, trained.model, ds, hash, art); });
  result.files = art.files();
  write_manifest(rc.output, kv, seeds, hash, result, rc.auto_k);
  return result;
}

namespace {

// Registers --config plus one flag per config key; values land in `overrides`.
void add_config_flags(CLI::App* app, KeyValues& overrides, std::string& config_path) {
  app->add_option("--config", config_path, "INI config file; flags override its values");
  for (const auto& key : config_keys()) {
    const std::string name = key.flag == "num-clusters" ? "-k,--num-clusters" : "--" + key.flag;
    if (key.fallback == "false") {
      app->add_flag_callback(name, [&overrides, k = key.key] { overrides[k] = "true"; }, key.help);
    } else {
      app->add_option_function<std::string>(
          name, [&overrides, k = key.key](const std::string& v) { overrides[k] = v; }, key.help);
    }
  }
}

KeyValues resolve(const std::string& config_path, const KeyValues& overrides) {
  const KeyValues file = config_path.empty() ? KeyValues{} : read_config_file(config_path);
  return merge_config(file, overrides);
}

int cmd_ingest(const KeyValues& kv) {
  const RunConfig rc = to_run_config(kv);
  const InteractionDataset ds = load_data(rc);
  const json stats = stats_json(ds);
  if (!rc.output.empty()) {
    prepare_output_dir(rc.output, rc.overwrite);
    write_json(rc.output / "data_stats.json", stats);
  }
  std::cout << stats.dump(2) << '\n';
  return kOk;
}

int cmd_select_k(const KeyValues& kv) {
  RunConfig rc = to_run_config(kv);
  rc.auto_k = true;
  rc.validate();
  prepare_output_dir(rc.output, rc.overwrite);
  Artifacts art(rc.output);
  const InteractionDataset ds = load_data(rc);
  const int k = stage_select_k(rc, ds, StageSeeds(rc.seed), art);
  write_json(art.path("selection.json"), {{"k", k}, {"kmin", rc.kmin}, {"kmax", rc.kmax}, {"epsilon", rc.epsilon}});
  std::cout << "k=" << k << '\n';
  return kOk;
}

int cmd_cocluster(const KeyValues& kv) {
  const RunConfig rc = checked(kv);
  prepare_output_dir(rc.output, rc.overwrite);
  Artifacts art(rc.output);
  const StageSeeds seeds(rc.seed);
  const InteractionDataset ds = load_data(rc);
  const int k = rc.auto_k ? stage_select_k(rc, ds, seeds, art) : rc.k;
  stage_cocluster(ds, k, seeds, art);
  std::cout << "k=" << k << '\n';
  return kOk;
}

int cmd_train(const KeyValues& kv, const fs::path& clusters_file) {
  const RunConfig rc = checked(kv);
  prepare_output_dir(rc.output, rc.overwrite);
  Artifacts art(rc.output);
  const StageSeeds seeds(rc.seed);
  const InteractionDataset ds = load_data(rc);
  const InteractionDataset fit = fit_data(rc, ds, seeds);
  CoClustering cc;
  if (!clusters_file.empty()) {
    cc = build_subgraphs(incidence_matrix(fit), read_clustering(clusters_file));
  } else {
    const int k = rc.auto_k ? stage_select_k(rc, fit, seeds, art) : rc.k;
    cc = stage_cocluster(fit, k, seeds, art);
  }
  const TrainedModel t = stage_train(rc, fit, cc, seeds, art);
  std::cout << "best_epoch=" << t.result.best_epoch << " best_recall=" << t.result.best_recall << '\n';
  return kOk;
}

int cmd_evaluate(const KeyValues& kv, const fs::path& clusters_file, const fs::path& checkpoint) {
  const RunConfig rc = to_run_config(kv);
  if (clusters_file.empty() || checkpoint.empty()) throw ConfigError("evaluate needs --clusters-file and --checkpoint");
  const CoClustering file_cc = read_clustering(clusters_file);
  const std::string stored = checkpoint_clustering_hash(checkpoint);
  const std::string given = clustering_hash(file_cc);
  if (stored != given)
    throw DataError("checkpoint " + checkpoint.string() + " was trained on a different clustering (" + stored.substr(0, 12) +
                    " vs " + given.substr(0, 12) + " in " + clusters_file.string() + ")");
  prepare_output_dir(rc.output, rc.overwrite);
  Artifacts art(rc.output);
  const StageSeeds seeds(rc.seed);
  const InteractionDataset ds = load_data(rc);
  const InteractionDataset fit = fit_data(rc, ds, seeds);
  const CoClustering cc = build_subgraphs(incidence_matrix(fit), file_cc);
  const CCWModel model = load_checkpoint(checkpoint, fit, cc);
  const EvalReport r = stage_evaluate(rc, model, ds, config_hash(kv), art);
  std::cout << std::setprecision(6) << "recall@" << r.k << "=" << r.recall << " ndcg@" << r.k << "=" << r.ndcg << '\n';
  return kOk;
}

int cmd_report(const std::vector<fs::path>& inputs, const fs::path& out, bool overwrite) {
  if (inputs.empty()) throw ConfigError("report needs at least one report.json");
  prepare_output_dir(out, overwrite);
  std::vector<EvalReport> reports;
  for (const auto& p : inputs) reports.push_back(read_report_json(p));
  std::ofstream csv(out / "summary.csv");
  csv << "dataset,variant,mode,clusters,seed,k,users,recall,ndcg,config_hash\n" << std::setprecision(10);
  std::vector<std::string> groups;
  std::vector<std::string> modes;
  for (const auto& r : reports) {
    csv << r.dataset << ',' << r.variant << ',' << r.mode << ',' << r.clusters << ',' << r.seed << ',' << r.k << ','
        << r.num_users << ',' << r.recall << ',' << r.ndcg << ',' << r.config_hash << '\n';
    for (const std::string& g : {r.variant + " Recall@" + std::to_string(r.k), r.variant + " NDCG@" + std::to_string(r.k)})
      if (std::find(groups.begin(), groups.end(), g) == groups.end()) groups.push_back(g);
    if (std::find(modes.begin(), modes.end(), r.mode) == modes.end()) modes.push_back(r.mode);
  }
  // Mean per (group, mode).
  std::vector<std::vector<double>> bars(groups.size(), std::vector<double>(modes.size(), 0.0));
  std::vector<std::vector<int>> counts(groups.size(), std::vector<int>(modes.size(), 0));
  for (const auto& r : reports) {
    const auto m = static_cast<std::size_t>(std::find(modes.begin(), modes.end(), r.mode) - modes.begin());
    const auto gr = static_cast<std::size_t>(
        std::find(groups.begin(), groups.end(), r.variant + " Recall@" + std::to_string(r.k)) - groups.begin());
    const auto gn = static_cast<std::size_t>(
        std::find(groups.begin(), groups.end(), r.variant + " NDCG@" + std::to_string(r.k)) - groups.begin());
    bars[gr][m] += r.recall;
    bars[gn][m] += r.ndcg;
    ++counts[gr][m];
    ++counts[gn][m];
  }
  for (std::size_t g = 0; g < groups.size(); ++g)
    for (std::size_t m = 0; m < modes.size(); ++m)
      if (counts[g][m] > 0) bars[g][m] /= counts[g][m];
  plot::write_text(out / "summary.svg", plot::bar_chart_svg("Ranking quality by mode", groups, modes, bars));
  std::cout << "wrote " << (out / "summary.csv").string() << '\n';
  return kOk;
}

int cmd_synth(const PlantedConfig& pc, const fs::path& out, bool overwrite) {
  prepare_output_dir(out, overwrite);
  const PlantedDataset p = make_planted(pc);
  write_dataset(p.data, out / "train.txt", out / "test.txt");
  std::ofstream truth(out / "truth.txt");
  truth << "# planted blocks=" << pc.blocks << " seed=" << pc.seed << '\n';
  for (std::size_t u = 0; u < p.user_block.size(); ++u) truth << "user " << u << ' ' << p.user_block[u] << '\n';
  for (std::size_t i = 0; i < p.item_block.size(); ++i) truth << "item " << i << ' ' << p.item_block[i] << '\n';
  std::cout << "wrote " << p.data.num_users() << " users, " << p.data.num_items() << " items to " << out.string()
            << '\n';
  return kOk;
}

int cmd_benchmark(const KeyValues& kv) {
  const RunConfig rc = checked(kv);
  prepare_output_dir(rc.output, rc.overwrite);
  const StageSeeds seeds(rc.seed);
  const InteractionDataset ds = load_data(rc);
  Artifacts art(rc.output);
  BenchmarkConfig bc;
  bc.variant = rc.variant;
  bc.modes = rc.bench_modes;
  bc.clusters = rc.auto_k ? stage_select_k(rc, ds, seeds, art) : rc.k;
  bc.seeds.clear();
  for (int s = 0; s < rc.bench_seeds; ++s) bc.seeds.push_back(derive_seed(seeds.benchmark, static_cast<std::uint64_t>(s)));
  bc.model = rc.model;
  bc.train = rc.train;
  bc.k = rc.train.eval_k;
  bc.dataset = rc.dataset_name;
  const BenchmarkTable table = benchmark(ds, bc);
  write_benchmark_csv(rc.output / "benchmark.csv", table);
  write_benchmark_json(rc.output / "benchmark.json", table);
  plot::write_text(rc.output / "benchmark.svg", benchmark_svg({table}));
  for (const auto& row : table.rows)
    std::cout << to_string(row.mode) << ": recall " << row.mean_recall << " ndcg " << row.mean_ndcg << '\n';
  return kOk;
}

}  // namespace

int run(int argc, const char* const* argv) {
  CLI::App app{"Co-clustering wrapper for collaborative filtering"};
  app.require_subcommand(1);
  std::string verbosity = "info";
  app.add_option("--log-level", verbosity, "debug, info, warn")->check(CLI::IsMember({"debug", "info", "warn"}));

  struct Sub {
    CLI::App* app;
    KeyValues overrides;
    std::string config;
  };
  std::vector<std::unique_ptr<Sub>> subs;
  auto add = [&](const char* name, const char* help) {
    auto s = std::make_unique<Sub>();
    s->app = app.add_subcommand(name, help);
    add_config_flags(s->app, s->overrides, s->config);
    subs.push_back(std::move(s));
    return subs.back().get();
  };

  Sub* ingest = add("ingest", "validate a dataset and print its statistics");
  Sub* cocluster = add("cocluster", "spectral co-clustering; writes clusters.txt");
  Sub* selectk = add("select-k", "variance-ratio curve and plateau choice of k");
  Sub* train = add("train", "train a wrapped model; writes epoch_log.csv and checkpoint.ccw");
  Sub* evaluate_cmd = add("evaluate", "Recall/NDCG of a checkpoint");
  Sub* bench = add("benchmark", "compare score modes over several seeds");
  Sub* pipeline = add("pipeline", "run every stage and write a manifest");

  std::string clusters_file;
  std::string checkpoint;
  train->app->add_option("--clusters-file", clusters_file, "reuse an existing clusters.txt");
  evaluate_cmd->app->add_option("--clusters-file", clusters_file, "clusters.txt the checkpoint was trained with")
      ->required();
  evaluate_cmd->app->add_option("--checkpoint", checkpoint, "checkpoint.ccw")->required();

  CLI::App* report = app.add_subcommand("report", "summarize report.json files as CSV and SVG");
  std::vector<std::string> report_inputs;
  std::string report_out;
  bool report_overwrite = false;
  report->add_option("reports", report_inputs, "report.json files")->required();
  report->add_option("--out", report_out, "output directory")->required();
  report->add_flag("--overwrite", report_overwrite);

  CLI::App* synth = app.add_subcommand("synth", "write a planted-block synthetic dataset");
  PlantedConfig pc;
  std::string synth_out;
  bool synth_overwrite = false;
  synth->add_option("--blocks", pc.blocks, "planted block count")->check(CLI::PositiveNumber);
  synth->add_option("--users-per-block", pc.users_per_block)->check(CLI::PositiveNumber);
  synth->add_option("--items-per-block", pc.items_per_block)->check(CLI::PositiveNumber);
  synth->add_option("--degree", pc.avg_degree, "mean interactions per user")->check(CLI::PositiveNumber);
  synth->add_option("--noise", pc.noise, "fraction of cross-block edges")->check(CLI::Range(0.0, 1.0));
  synth->add_option("--test-fraction", pc.test_fraction)->check(CLI::Range(0.0, 0.95));
  synth->add_option("--skew", pc.item_skew, "Zipf exponent of item popularity")->check(CLI::NonNegativeNumber);
  synth->add_option("--seed", pc.seed);
  synth->add_option("--out", synth_out, "output directory")->required();
  synth->add_flag("--overwrite", synth_overwrite);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }
  log::set_level(verbosity == "debug" ? log::Level::debug : verbosity == "warn" ? log::Level::warn : log::Level::info);

  try {
    if (report->parsed()) {
      std::vector<fs::path> in(report_inputs.begin(), report_inputs.end());
      return cmd_report(in, report_out, report_overwrite);
    }
    if (synth->parsed()) return cmd_synth(pc, synth_out, synth_overwrite);
    for (const auto& s : subs) {
      if (!s->app->parsed()) continue;
      const KeyValues kv = resolve(s->config, s->overrides);
      if (s.get() == ingest) return cmd_ingest(kv);
      if (s.get() == cocluster) return cmd_cocluster(kv);
      if (s.get() == selectk) return cmd_select_k(kv);
      if (s.get() == train) return cmd_train(kv, clusters_file);
      if (s.get() == evaluate_cmd) return cmd_evaluate(kv, clusters_file, checkpoint);
      if (s.get() == bench) return cmd_benchmark(kv);
      if (s.get() == pipeline) {
        const PipelineResult r = run_pipeline(kv);
        std::cout << "k=" << r.k << " recall@" << r.report.k << "=" << r.report.recall << " ndcg@" << r.report.k << "="
                  << r.report.ndcg << '\n';
        return kOk;
      }
    }
  } catch (const ConfigError& e) {
    std::cerr << "ccw: config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const DataError& e) {
    std::cerr << "ccw: data error: " << e.what() << '\n';
    return kDataError;
  } catch (const NumericError& e) {
    std::cerr << "ccw: numeric failure: " << e.what() << '\n';
    return kNumericError;
  } catch (const std::exception& e) {
    std::cerr << "ccw: " << e.what() << '\n';
    return kFailure;
  }
  return kFailure;
}

}  // namespace ccw::cli
