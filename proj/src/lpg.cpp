#include "hvpr/lpg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "hvpr/binary_io.hpp"
#include "hvpr/error.hpp"

namespace hvpr {

namespace {

constexpr std::uint32_t kGraphVersion = 1;
constexpr std::uint32_t kNoMatch = 0xFFFFFFFFu;

void check_sigma(double sigma) {
  if (!(sigma > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "sigma must be positive, got " + std::to_string(sigma));
  }
}

}  // namespace

StarGraphSet build_star_graphs(std::span<const Position> positions, double h) {
  if (!(h > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "window size h must be positive, got " + std::to_string(h));
  }
  const double half = h / 2.0;
  const std::size_t n = positions.size();
  StarGraphSet out;
  out.h = h;
  out.graphs.resize(n);

  // Sweep over features sorted by x: the x-window is a contiguous range.
  std::vector<std::uint32_t> by_x(n);
  std::iota(by_x.begin(), by_x.end(), 0u);
  std::stable_sort(by_x.begin(), by_x.end(),
                   [&](std::uint32_t a, std::uint32_t b) { return positions[a].x < positions[b].x; });
  std::vector<double> xs(n);
  for (std::size_t k = 0; k < n; ++k) xs[k] = positions[by_x[k]].x;

  for (std::uint32_t root = 0; root < n; ++root) {
    const Position p = positions[root];
    auto& g = out.graphs[root];
    g.root = root;
    // Candidates satisfy x >= p.x - half; the exact test below settles the edges.
    auto first = std::lower_bound(xs.begin(), xs.end(), p.x - half);
    for (auto k = static_cast<std::size_t>(first - xs.begin()); k < n; ++k) {
      const std::uint32_t m = by_x[k];
      const double dx = positions[m].x - p.x;
      if (dx > half) break;
      if (m == root || std::abs(dx) > half || std::abs(positions[m].y - p.y) > half) continue;
      g.leaves.push_back(m);
    }
    std::sort(g.leaves.begin(), g.leaves.end());
  }
  return out;
}

StarGraphSet build_star_graphs(const ImageFeatureSet& feats, double h) {
  return build_star_graphs(std::span<const Position>(feats.positions), h);
}

GaussianLut::GaussianLut(double sigma) : sigma_(sigma) {
  check_sigma(sigma);
  const double two_sigma2 = 2.0 * sigma * sigma;
  domain_max_ = kDomainSigmas2 * sigma * sigma;
  const double step = domain_max_ / static_cast<double>(kEntries - 1);
  inv_step_ = 1.0 / step;
  for (std::size_t k = 0; k < kEntries; ++k) {
    entries_[k] = std::exp(-(static_cast<double>(k) * step) / two_sigma2);
  }
  entries_[kEntries] = 0.0;
}

double gaussian_weight(double delta_sq, double sigma, const GaussianLut* lut) {
  check_sigma(sigma);
  if (lut) return (*lut)(delta_sq);
  return std::exp(-delta_sq / (2.0 * sigma * sigma));
}

std::vector<double> lpg_weights(const StarGraphSet& db_graphs, const ImageFeatureSet& db, const ImageFeatureSet& q,
                                std::span<const Match> matches, double sigma, const GaussianLut* lut) {
  check_sigma(sigma);
  if (db_graphs.graphs.size() != db.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "star graph count " + std::to_string(db_graphs.graphs.size()) +
                                                   " != feature count " + std::to_string(db.size()) + " for '" +
                                                   db.image_id + "'");
  }
  const double inv_two_sigma2 = 1.0 / (2.0 * sigma * sigma);
  std::vector<std::uint32_t> match_of_db(db.size(), kNoMatch);
  for (const auto& m : matches) match_of_db[m.db] = static_cast<std::uint32_t>(m.query);

  std::vector<double> weights(matches.size(), 0.0);
  for (std::size_t k = 0; k < matches.size(); ++k) {
    const auto& g = db_graphs.graphs[matches[k].db];
    if (g.leaves.empty()) {
      weights[k] = 1.0;
      continue;
    }
    const Position root_db = db.positions[matches[k].db];
    const Position root_q = q.positions[matches[k].query];
    double sum = 0.0;
    std::size_t matched = 0;
    for (std::uint32_t leaf : g.leaves) {
      const std::uint32_t j = match_of_db[leaf];
      if (j == kNoMatch) continue;
      const Position leaf_db = db.positions[leaf];
      const Position leaf_q = q.positions[j];
      const double dx = (leaf_db.x - root_db.x) - (leaf_q.x - root_q.x);
      const double dy = (leaf_db.y - root_db.y) - (leaf_q.y - root_q.y);
      const double r2 = dx * dx + dy * dy;
      sum += lut ? (*lut)(r2) : std::exp(-r2 * inv_two_sigma2);
      ++matched;
    }
    weights[k] = matched == 0 ? 0.0 : sum / static_cast<double>(matched);
  }
  return weights;
}

PairScore score_lpg(const StarGraphSet& db_graphs, const ImageFeatureSet& db, const ImageFeatureSet& q,
                    double sigma, const GaussianLut* lut) {
  check_sigma(sigma);
  if (db.empty() || q.empty()) return {0.0, true};
  const MatchSet matches = match_features(db, q);
  const auto weights = lpg_weights(db_graphs, db, q, matches, sigma, lut);
  return {image_similarity(matches, weights, db.size(), q.size()), false};
}

std::vector<std::uint8_t> encode_graph_cache(std::span<const StarGraphSet> sets) {
  ByteWriter out;
  out.magic("VPRG");
  out.u32(kGraphVersion);
  const double h = sets.empty() ? kDefaultWindow : sets.front().h;
  out.f32(static_cast<float>(h));
  out.u32(static_cast<std::uint32_t>(sets.size()));
  for (const auto& s : sets) {
    if (s.h != h) {
      throw Error(ErrorCode::kInvalidArgument, "graph cache requires a single window size");
    }
    if (s.graphs.size() > 0xFFFFu + 1) {
      throw Error(ErrorCode::kOutOfRange, "graph cache stores at most 65536 features per image");
    }
    out.u32(static_cast<std::uint32_t>(s.graphs.size()));
    for (const auto& g : s.graphs) {
      out.u16(static_cast<std::uint16_t>(g.leaves.size()));
      for (std::uint32_t leaf : g.leaves) out.u16(static_cast<std::uint16_t>(leaf));
    }
  }
  return std::move(out).take();
}

std::vector<StarGraphSet> decode_graph_cache(std::span<const std::uint8_t> bytes) {
  ByteReader in(bytes);
  in.expect_magic("VPRG");
  in.expect_version(kGraphVersion);
  const double h = in.f32();
  const std::uint32_t count = in.u32();
  std::vector<StarGraphSet> sets;
  for (std::uint32_t n = 0; n < count; ++n) {
    StarGraphSet s;
    s.h = h;
    const std::uint32_t features = in.u32();
    if (features > in.remaining() / 2) {
      throw Error(ErrorCode::kTruncated, "graph cache feature count exceeds file size");
    }
    s.graphs.resize(features);
    for (std::uint32_t r = 0; r < features; ++r) {
      s.graphs[r].root = r;
      const std::uint16_t leaves = in.u16();
      s.graphs[r].leaves.resize(leaves);
      for (auto& leaf : s.graphs[r].leaves) {
        leaf = in.u16();
        if (leaf >= features || leaf == r) {
          throw Error(ErrorCode::kMalformed, "graph cache leaf index out of range");
        }
      }
    }
    sets.push_back(std::move(s));
  }
  if (in.remaining() != 0) {
    throw Error(ErrorCode::kMalformed, "trailing bytes after graph cache payload");
  }
  return sets;
}

void write_graph_cache(std::span<const StarGraphSet> sets, const std::filesystem::path& path) {
  write_file_atomic(path, encode_graph_cache(sets));
}

std::vector<StarGraphSet> read_graph_cache(const std::filesystem::path& path) {
  return decode_graph_cache(read_file(path));
}

}  // namespace hvpr
