#include "fixtures.hpp"

#include <fstream>
#include <random>
#include <sstream>
#include <unistd.h>

#include "ccw/rng.hpp"

namespace ccw::fixture {

InteractionDataset block4() {
  return InteractionDataset::from_edges(4, 4, {{0, 0}, {0, 1}, {1, 0}, {1, 1}, {2, 2}, {2, 3}, {3, 2}, {3, 3}}, {});
}

InteractionDataset toy_blocks() {
  std::vector<Edge> train;
  std::vector<Edge> test;
  for (index_t b = 0; b < 2; ++b) {
    for (index_t u = 0; u < 4; ++u) {
      const index_t user = 4 * b + u;
      for (index_t i = 0; i < 4; ++i) {
        const index_t item = 4 * b + i;
        (i == u ? test : train).push_back({user, item});
      }
    }
  }
  return InteractionDataset::from_edges(8, 8, train, test);
}

CCWModel random_model(const InteractionDataset& ds, const CoClustering& cc, ScoreMode mode, int dim,
                      BaseVariant variant, seed_t seed) {
  AssembleOptions opts;
  opts.dim = dim;
  opts.layers = 2;
  opts.mode = mode;
  CCWModel m = assemble_ccw(ds, cc, variant, opts, seed);
  Rng rng(derive_seed(seed, "fixture"));
  std::normal_distribution<double> n01(0.0, 0.5);
  auto fill = [&](auto& mat) {
    for (Eigen::Index r = 0; r < mat.rows(); ++r)
      for (Eigen::Index c = 0; c < mat.cols(); ++c) mat(r, c) = n01(rng);
  };
  fill(m.global.user_table());
  fill(m.global.item_table());
  for (auto& l : m.locals) {
    fill(l.user_table());
    fill(l.item_table());
  }
  fill(m.lic.w1);
  for (Eigen::Index h = 0; h < m.lic.b1.size(); ++h) m.lic.b1(h) = 0.3 + n01(rng);
  for (Eigen::Index h = 0; h < m.lic.w2.size(); ++h) m.lic.w2(h) = n01(rng);
  m.lic.b2 = 0.8;
  return m;
}

std::filesystem::path temp_dir(const std::string& tag) {
  static int counter = 0;
  const auto dir = std::filesystem::temp_directory_path() /
                   ("ccw_test_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path);
  out << text;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

}  // namespace ccw::fixture
