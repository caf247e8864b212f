#include <benchmark/benchmark.h>

#include <map>
#include <numeric>

#include "ccw/clusterqual.hpp"
#include "ccw/kmeans.hpp"
#include "ccw/log.hpp"
#include "ccw/spectral.hpp"
#include "ccw/synth.hpp"
#include "ccw/train.hpp"
#include "ccw/wrapper.hpp"

using namespace ccw;

namespace {

const PlantedDataset& planted(index_t per_block) {
  static std::map<index_t, PlantedDataset> cache;
  auto it = cache.find(per_block);
  if (it == cache.end()) {
    PlantedConfig pc;
    pc.blocks = 5;
    pc.users_per_block = per_block;
    pc.items_per_block = per_block;
    pc.avg_degree = 20;
    pc.noise = 0.05;
    pc.test_fraction = 0.2;
    pc.seed = 1;
    it = cache.emplace(per_block, make_planted(pc)).first;
  }
  return it->second;
}

void BM_SpectralCocluster(benchmark::State& state) {
  log::set_level(log::Level::warn);
  const auto a = incidence_matrix(planted(static_cast<index_t>(state.range(0))).data);
  for (auto _ : state) benchmark::DoNotOptimize(spectral_cocluster(a, 5, 0));
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(a.nnz()));
}
BENCHMARK(BM_SpectralCocluster)->Arg(100)->Arg(400)->Unit(benchmark::kMillisecond);

void BM_KMeans(benchmark::State& state) {
  RowMatrix points = RowMatrix::Random(state.range(0), 8);
  KMeansOptions opts;
  opts.k = 8;
  for (auto _ : state) benchmark::DoNotOptimize(kmeans(points, opts));
}
BENCHMARK(BM_KMeans)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);

void BM_UserVarianceRatio(benchmark::State& state) {
  const auto a = incidence_matrix(planted(400).data);
  const CoClustering cc = spectral_cocluster(a, 5, 0);
  for (auto _ : state) benchmark::DoNotOptimize(user_variance_decomposition(a, cc.user_assignment));
}
BENCHMARK(BM_UserVarianceRatio)->Unit(benchmark::kMicrosecond);

CCWModel model_for(const PlantedDataset& p, BaseVariant v) {
  const auto a = incidence_matrix(p.data);
  return assemble_ccw(p.data, build_subgraphs(a, spectral_cocluster(a, 5, 0)), v, AssembleOptions{}, 0);
}

void BM_RatingMatrix(benchmark::State& state) {
  const auto& p = planted(400);
  const CCWModel m = model_for(p, BaseVariant::plain_mf);
  std::vector<index_t> users(256);
  std::iota(users.begin(), users.end(), 0);
  for (auto _ : state) benchmark::DoNotOptimize(rating_matrix(m, users, &p.data));
  state.SetItemsProcessed(state.iterations() * 256 * p.data.num_items());
}
BENCHMARK(BM_RatingMatrix)->Unit(benchmark::kMillisecond);

void BM_TrainStep(benchmark::State& state) {
  const auto& p = planted(400);
  CCWModel m = model_for(p, static_cast<BaseVariant>(state.range(0)));
  TrainConfig cfg;
  CCWOptimizer opt(m, cfg);
  CCWGradient grad(m);
  Rng rng(3);
  const RegularizerOptions reg{cfg.lambda, false, p.data.train_edges().size()};
  for (auto _ : state) {
    const auto batch = sample_triples(p.data, static_cast<std::size_t>(cfg.batch_size), rng);
    grad.clear();
    benchmark::DoNotOptimize(bpr_loss_and_gradient(m, batch, reg, grad));
    opt.step(m, grad);
  }
}
BENCHMARK(BM_TrainStep)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
