#pragma once

// Local Positional Graphs.
//
// Every database feature roots a star graph whose leaves are the other
// features inside an h×h window around it. When a root is mutually matched
// into the query, its matched leaves are compared in root-relative
// coordinates:
//
//   delta_k = (p_k^db - p_root^db) - (p_k^q - p_root^q)
//   G(delta) = exp(-|delta|^2 / (2 sigma^2))
//   w_ij = mean_k G(delta_k)
//
// and w_ij weights the match in the image similarity. Graphs are built once
// per database image; the query side only needs the match correspondence.

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "hvpr/matching.hpp"
#include "hvpr/types.hpp"

namespace hvpr {

inline constexpr double kDefaultSigma = 1.0;
inline constexpr double kDefaultWindow = 60.0;

struct StarGraph {
  std::uint32_t root = 0;
  std::vector<std::uint32_t> leaves;  // ascending feature indices

  friend bool operator==(const StarGraph&, const StarGraph&) = default;
};

struct StarGraphSet {
  double h = kDefaultWindow;
  std::vector<StarGraph> graphs;  // graphs[n].root == n

  friend bool operator==(const StarGraphSet&, const StarGraphSet&) = default;
};

// Leaves of root n: all m != n with |dx| <= h/2 and |dy| <= h/2.
StarGraphSet build_star_graphs(std::span<const Position> positions, double h);
StarGraphSet build_star_graphs(const ImageFeatureSet& feats, double h);

// Sampled exp(-r2 / (2 sigma^2)) over r2 in [0, 50 sigma^2], linearly
// interpolated between the samples; zero past the domain.
class GaussianLut {
 public:
  static constexpr std::size_t kEntries = 4096;
  static constexpr double kDomainSigmas2 = 50.0;

  explicit GaussianLut(double sigma);

  [[nodiscard]] double operator()(double delta_sq) const noexcept {
    if (delta_sq >= domain_max_) return 0.0;
    const double t = delta_sq * inv_step_;
    const auto k = static_cast<std::size_t>(t);
    const double frac = t - static_cast<double>(k);
    return entries_[k] + frac * (entries_[k + 1] - entries_[k]);
  }

  [[nodiscard]] double sigma() const noexcept { return sigma_; }
  [[nodiscard]] double domain_max() const noexcept { return domain_max_; }
  [[nodiscard]] std::span<const double> entries() const noexcept { return {entries_.data(), kEntries}; }

 private:
  double sigma_;
  double domain_max_;
  double inv_step_;
  // One trailing sentinel (0) so interpolation in the last cell stays in bounds.
  std::array<double, kEntries + 1> entries_{};
};

// Exact path without a table, interpolated table lookup otherwise.
// Throws for sigma <= 0.
double gaussian_weight(double delta_sq, double sigma, const GaussianLut* lut = nullptr);

// One weight per match (aligned with `matches`). A root without leaves
// weighs 1; a root with leaves but no matched leaf weighs 0.
std::vector<double> lpg_weights(const StarGraphSet& db_graphs, const ImageFeatureSet& db, const ImageFeatureSet& q,
                                std::span<const Match> matches, double sigma, const GaussianLut* lut = nullptr);

PairScore score_lpg(const StarGraphSet& db_graphs, const ImageFeatureSet& db, const ImageFeatureSet& q,
                    double sigma, const GaussianLut* lut = nullptr);

// VPRG: "VPRG" | version u32 = 1 | h f32 | image_count u32
//       | per image: feature_count u32 | per root: leaf_count u16, leaf_count × u16
// All images share one h.
std::vector<std::uint8_t> encode_graph_cache(std::span<const StarGraphSet> sets);
std::vector<StarGraphSet> decode_graph_cache(std::span<const std::uint8_t> bytes);
void write_graph_cache(std::span<const StarGraphSet> sets, const std::filesystem::path& path);
std::vector<StarGraphSet> read_graph_cache(const std::filesystem::path& path);

}  // namespace hvpr
