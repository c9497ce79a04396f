#pragma once

// Seeded generators for desk-scale test worlds: random feature stores with
// planted query copies, and epipolar-consistent point correspondences.

#include <cstddef>
#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "json.hpp"

#include "hvpr/geometry.hpp"
#include "hvpr/types.hpp"

namespace hvpr {

struct WorldConfig {
  std::uint64_t seed = 0;
  std::size_t db_size = 100;
  std::size_t query_size = 10;
  std::size_t features_per_image = 200;
  std::size_t d_loc = 1024;
  double descriptor_noise = 0.0;  // norm of the expected perturbation relative to a unit descriptor
  double position_jitter = 0.0;   // half-width of the uniform per-axis offset, position units
  double outlier_fraction = 0.0;  // probability that a query feature is replaced

  // Throws kInvalidArgument on zero counts, negative levels, outlier_fraction > 1.
  void validate() const;
};

void to_json(nlohmann::json& j, const WorldConfig& cfg);
// Missing keys keep their defaults; unknown keys are rejected.
void from_json(const nlohmann::json& j, WorldConfig& cfg);

struct World {
  std::vector<ImageFeatureSet> db;
  std::vector<ImageFeatureSet> queries;
  GroundTruth gt;
  std::vector<std::size_t> source;  // db index each query was copied from
};

// Database images are independent random sets; query q perturbs a distinct
// db image (sources cycle once query_size exceeds db_size). Positions are
// exactly representable as 32-bit floats so stores round-trip bit-exactly.
// Output does not depend on `threads`.
World gen_world(const WorldConfig& cfg, unsigned threads = 1);

// Unit-norm random descriptors and uniform positions.
ImageFeatureSet random_feature_set(std::string id, std::size_t count, std::size_t d_loc, std::uint64_t seed);

struct EpipolarPairs {
  std::vector<PointPair> pairs;
  std::vector<bool> inlier;
  Eigen::Matrix3d fundamental;  // query^T F db = 0 on inliers, Frobenius norm 1
};

// A random point cloud seen by two cameras; each view is rescaled into
// [5, 95]² and outliers are uniform in [0, 100)². Pair order is shuffled.
// Throws kInvalidArgument when n_inliers < 8.
EpipolarPairs gen_epipolar_pairs(std::uint64_t seed, std::size_t n_inliers, std::size_t n_outliers);

}  // namespace hvpr
