#include "ccw/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <unordered_set>

#include "ccw/rng.hpp"

namespace ccw {

PlantedDataset make_planted(const PlantedConfig& cfg) {
  if (cfg.blocks < 1 || cfg.users_per_block < 1 || cfg.items_per_block < 1)
    throw std::invalid_argument("planted: block count and sizes must be positive");
  if (cfg.noise < 0.0 || cfg.noise > 1.0) throw std::invalid_argument("planted: noise must be in [0,1]");
  if (cfg.test_fraction < 0.0 || cfg.test_fraction >= 1.0)
    throw std::invalid_argument("planted: test_fraction must be in [0,1)");
  if (cfg.blocks == 1 && cfg.noise > 0.0) throw std::invalid_argument("planted: noise needs at least two blocks");
  const index_t num_users = cfg.blocks * cfg.users_per_block;
  const index_t num_items = cfg.blocks * cfg.items_per_block;
  const auto max_degree = static_cast<double>(num_items);
  if (cfg.avg_degree < 1.0 || 1.5 * cfg.avg_degree > 0.5 * max_degree)
    throw std::invalid_argument("planted: avg_degree out of range for the item count");

  Rng rng(cfg.seed);
  PlantedDataset out;
  auto labels = [&](index_t per_block, index_t total) {
    std::vector<index_t> lab(static_cast<std::size_t>(total));
    for (index_t x = 0; x < total; ++x) lab[static_cast<std::size_t>(x)] = x / per_block;
    std::shuffle(lab.begin(), lab.end(), rng);
    return lab;
  };
  out.user_block = labels(cfg.users_per_block, num_users);
  out.item_block = labels(cfg.items_per_block, num_items);

  std::vector<std::vector<index_t>> block_items(static_cast<std::size_t>(cfg.blocks));
  for (index_t i = 0; i < num_items; ++i) block_items[static_cast<std::size_t>(out.item_block[static_cast<std::size_t>(i)])].push_back(i);
  std::vector<double> weights(static_cast<std::size_t>(cfg.items_per_block));
  for (std::size_t r = 0; r < weights.size(); ++r) weights[r] = std::pow(static_cast<double>(r + 1), -cfg.item_skew);
  std::discrete_distribution<std::size_t> within(weights.begin(), weights.end());

  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<int> other_block(0, std::max(cfg.blocks - 2, 0));
  const auto lo = static_cast<int>(std::max(1.0, std::floor(0.5 * cfg.avg_degree)));
  const auto hi = static_cast<int>(std::ceil(1.5 * cfg.avg_degree));
  std::uniform_int_distribution<int> degree(lo, hi);

  std::vector<Edge> train;
  std::vector<Edge> test;
  for (index_t u = 0; u < num_users; ++u) {
    const index_t home = out.user_block[static_cast<std::size_t>(u)];
    const int deg = std::min<int>(degree(rng), cfg.items_per_block);
    std::unordered_set<index_t> chosen;
    std::vector<index_t> items;
    int attempts = 0;
    while (static_cast<int>(items.size()) < deg && attempts < 100 * deg) {
      ++attempts;
      index_t b = home;
      if (unit(rng) < cfg.noise) {
        b = other_block(rng);
        if (b >= home) ++b;
      }
      const index_t item = block_items[static_cast<std::size_t>(b)][within(rng)];
      if (chosen.insert(item).second) items.push_back(item);
    }
    std::shuffle(items.begin(), items.end(), rng);
    auto n_test = static_cast<std::size_t>(std::floor(cfg.test_fraction * static_cast<double>(items.size())));
    n_test = std::min(n_test, items.size() - 1);
    for (std::size_t k = 0; k < items.size(); ++k) (k < n_test ? test : train).push_back({u, items[k]});
  }
  out.data = InteractionDataset::from_edges(num_users, num_items, std::move(train), std::move(test));
  return out;
}

}  // namespace ccw
