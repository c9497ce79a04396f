#pragma once

// Domain types shared by every stage of the pipeline.

#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

namespace hvpr {

// Feature positions live in a normalized [0, kPositionRange) square per axis.
inline constexpr double kPositionRange = 100.0;

struct Position {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Position&, const Position&) = default;
};

[[nodiscard]] inline bool in_range(Position p) noexcept {
  return p.x >= 0.0 && p.x < kPositionRange && p.y >= 0.0 && p.y < kPositionRange;
}

// One descriptor per row. Stored as 32-bit floats, the precision of the
// on-disk format; similarity arithmetic widens to double where it matters.
using DescriptorMatrix =
    Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct LocalFeature {
  Position pos;
  std::vector<float> desc;
};

// All local features of one image plus the optional holistic descriptor.
// Positions and descriptors are kept as parallel arrays so the descriptor
// block can feed matrix products directly.
struct ImageFeatureSet {
  std::string image_id;
  std::vector<Position> positions;
  DescriptorMatrix descriptors;
  std::optional<std::vector<float>> holistic;

  ImageFeatureSet() = default;
  ImageFeatureSet(std::string id, std::size_t d_loc) : image_id(std::move(id)), descriptors(0, static_cast<Eigen::Index>(d_loc)) {}

  static ImageFeatureSet from_features(std::string id, std::span<const LocalFeature> features,
                                       std::size_t d_loc);

  [[nodiscard]] std::size_t size() const noexcept { return positions.size(); }
  [[nodiscard]] bool empty() const noexcept { return positions.empty(); }
  [[nodiscard]] std::size_t descriptor_length() const noexcept {
    return static_cast<std::size_t>(descriptors.cols());
  }
  [[nodiscard]] std::span<const float> descriptor(std::size_t i) const {
    return {descriptors.row(static_cast<Eigen::Index>(i)).data(), descriptor_length()};
  }
  [[nodiscard]] LocalFeature feature(std::size_t i) const;

  friend bool operator==(const ImageFeatureSet& a, const ImageFeatureSet& b);
};

// Dense backbone output of one image: an H×W×C tensor (row-major y, x, c)
// and the H×W attention map produced alongside it.
struct DenseFeatureMap {
  std::string image_id;
  std::size_t height = 0;
  std::size_t width = 0;
  std::size_t channels = 0;
  std::vector<float> values;
  std::vector<float> attention;

  [[nodiscard]] float at(std::size_t y, std::size_t x, std::size_t c) const {
    return values[(y * width + x) * channels + c];
  }
  [[nodiscard]] Eigen::MatrixXd attention_map() const;

  // Throws kDimensionMismatch when the tensor or attention sizes disagree.
  void validate() const;
};

// query_id -> ids of database images that depict the same place.
using GroundTruth = std::map<std::string, std::set<std::string>>;

enum class Stage { kHolistic, kReranked };

struct RankedEntry {
  std::size_t db_index = 0;
  std::string db_id;
  double score = 0.0;
  Stage stage = Stage::kReranked;
};

struct RetrievalResult {
  std::string query_id;
  std::vector<RankedEntry> ranking;
};

// Similarity of one image pair together with whether a degenerate rule
// (empty set, underdetermined geometry) produced it.
struct PairScore {
  double similarity = 0.0;
  bool degenerate = false;
};

}  // namespace hvpr
