#include "ccw/checkpoint.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>

#include "ccw/hash.hpp"

namespace ccw {

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

namespace {

constexpr std::array<char, 8> kModelMagic{'C', 'C', 'W', 'E', 'M', 'B', '0', '1'};
constexpr std::array<char, 8> kCheckpointMagic{'C', 'C', 'W', 'C', 'K', 'P', 'T', '1'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void put(std::ostream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::istream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw DataError("checkpoint: truncated file");
  return v;
}

void put_doubles(std::ostream& out, const double* p, std::size_t n) {
  out.write(reinterpret_cast<const char*>(p), static_cast<std::streamsize>(n * sizeof(double)));
}

void get_doubles(std::istream& in, double* p, std::size_t n) {
  in.read(reinterpret_cast<char*>(p), static_cast<std::streamsize>(n * sizeof(double)));
  if (!in) throw DataError("checkpoint: truncated table");
}

void expect_magic(std::istream& in, const std::array<char, 8>& magic, const char* what) {
  std::array<char, 8> got{};
  in.read(got.data(), got.size());
  if (!in || got != magic) throw DataError(std::string("checkpoint: not a ") + what);
  if (get<std::uint32_t>(in) != kVersion) throw DataError(std::string("checkpoint: unsupported ") + what + " version");
}

}  // namespace

void save_model(std::ostream& out, const EmbeddingModel& model) {
  out.write(kModelMagic.data(), kModelMagic.size());
  put<std::uint32_t>(out, kVersion);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(model.variant()));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(model.layers()));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(model.dim()));
  put<std::uint64_t>(out, static_cast<std::uint64_t>(model.num_users()));
  put<std::uint64_t>(out, static_cast<std::uint64_t>(model.num_items()));
  put<std::uint64_t>(out, model.seed());
  put_doubles(out, model.user_table().data(), static_cast<std::size_t>(model.user_table().size()));
  put_doubles(out, model.item_table().data(), static_cast<std::size_t>(model.item_table().size()));
}

EmbeddingModel load_model(std::istream& in) {
  expect_magic(in, kModelMagic, "model dump");
  const auto variant = get<std::uint32_t>(in);
  const auto layers = get<std::uint32_t>(in);
  const auto dim = get<std::uint32_t>(in);
  const auto users = get<std::uint64_t>(in);
  const auto items = get<std::uint64_t>(in);
  const auto seed = get<std::uint64_t>(in);
  if (variant > 1 || dim == 0 || users > (1u << 31) || items > (1u << 31))
    throw DataError("checkpoint: corrupt model header");
  EmbeddingModel m(static_cast<index_t>(users), static_cast<index_t>(items), static_cast<int>(dim),
                   static_cast<BaseVariant>(variant), static_cast<int>(layers), seed);
  get_doubles(in, m.user_table().data(), static_cast<std::size_t>(m.user_table().size()));
  get_doubles(in, m.item_table().data(), static_cast<std::size_t>(m.item_table().size()));
  return m;
}

std::string clustering_hash(const CoClustering& cc) { return sha256_hex(serialize_clustering(cc)); }

void save_checkpoint(const std::filesystem::path& path, const CCWModel& model) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out.write(kCheckpointMagic.data(), kCheckpointMagic.size());
  put<std::uint32_t>(out, kVersion);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(model.mode));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(model.k()));
  const std::string hash = clustering_hash(model.clustering);
  out.write(hash.data(), 64);
  save_model(out, model.global);
  for (const auto& l : model.locals) save_model(out, l);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(model.lic.input_dim()));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(model.lic.hidden_dim()));
  put_doubles(out, model.lic.w1.data(), static_cast<std::size_t>(model.lic.w1.size()));
  put_doubles(out, model.lic.b1.data(), static_cast<std::size_t>(model.lic.b1.size()));
  put_doubles(out, model.lic.w2.data(), static_cast<std::size_t>(model.lic.w2.size()));
  put<double>(out, model.lic.b2);
  if (!out) throw DataError("checkpoint: write failed for " + path.string());
}

namespace {

struct Header {
  ScoreMode mode;
  int k;
  std::string hash;
};

Header read_header(std::istream& in) {
  expect_magic(in, kCheckpointMagic, "ccw checkpoint");
  const auto mode = get<std::uint32_t>(in);
  const auto k = get<std::uint32_t>(in);
  std::string hash(64, '\0');
  in.read(hash.data(), 64);
  if (!in || mode > 2) throw DataError("checkpoint: corrupt header");
  return {static_cast<ScoreMode>(mode), static_cast<int>(k), hash};
}

}  // namespace

std::string checkpoint_clustering_hash(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  return read_header(in).hash;
}

CCWModel load_checkpoint(const std::filesystem::path& path, const InteractionDataset& ds, const CoClustering& cc) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  const Header h = read_header(in);
  if (h.hash != clustering_hash(cc))
    throw DataError("checkpoint " + path.string() + " was trained with a different clustering (hash mismatch)");
  if (h.k != cc.k) throw DataError("checkpoint: cluster count mismatch");

  CCWModel m;
  m.mode = h.mode;
  m.clustering = cc.has_subgraphs() ? cc : build_subgraphs(incidence_matrix(ds), cc);
  m.global = load_model(in);
  if (m.global.num_users() != ds.num_users() || m.global.num_items() != ds.num_items())
    throw DataError("checkpoint: global model does not match dataset shape");
  m.global.set_edge_scope(ds.train_edges());
  for (int c = 0; c < h.k; ++c) {
    EmbeddingModel local = load_model(in);
    const Subgraph& g = m.clustering.subgraphs[static_cast<std::size_t>(c)];
    if (local.num_users() != static_cast<index_t>(g.users.size()) ||
        local.num_items() != static_cast<index_t>(g.items.size()))
      throw DataError("checkpoint: local model " + std::to_string(c) + " does not match its cluster");
    local.set_edge_scope(g.local_edges);
    if (g.users.empty() || g.items.empty()) m.inert_clusters.push_back(c);
    m.locals.push_back(std::move(local));
  }
  const auto in_dim = get<std::uint32_t>(in);
  const auto hidden = get<std::uint32_t>(in);
  m.lic.w1.resize(in_dim, hidden);
  m.lic.b1.resize(hidden);
  m.lic.w2.resize(hidden);
  get_doubles(in, m.lic.w1.data(), static_cast<std::size_t>(m.lic.w1.size()));
  get_doubles(in, m.lic.b1.data(), hidden);
  get_doubles(in, m.lic.w2.data(), hidden);
  m.lic.b2 = get<double>(in);
  return m;
}

}  // namespace ccw
