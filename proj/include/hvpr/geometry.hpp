#pragma once

// RANSAC fundamental-matrix verification of mutual matches.
//
// Hypotheses come from the Hartley-normalized 8-point algorithm with rank-2
// enforcement; a match is an inlier when its Sampson distance (the square
// root of the first-order epipolar error) is at most the threshold. The
// consensus set is refit by least squares at the end. Geometry that cannot
// be estimated (too few matches, zero parallax, every sample degenerate)
// falls back to treating all matches as inliers.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "hvpr/types.hpp"

namespace hvpr {

struct RansacParams {
  int max_iterations = 2000;
  double inlier_threshold = 2.0;  // normalized position units
  double confidence = 0.99;
  std::size_t min_matches = 8;

  void validate() const;
};

// db is the first view, query the second: q^T F db = 0.
struct PointPair {
  Position db;
  Position query;
};

struct FundamentalEstimate {
  Eigen::Matrix3d F = Eigen::Matrix3d::Zero();
  std::vector<bool> inlier_mask;
  bool degenerate = false;
  int iterations = 0;

  [[nodiscard]] std::size_t inlier_count() const;
};

// First-order (Sampson) epipolar error; squared distance units.
double sampson_error(const Eigen::Matrix3d& F, const PointPair& pair);

// 8-point estimate from the selected pairs (all pairs when `indices` is
// empty). Exactly 8 pairs give the minimal solve; more give the least-squares
// fit. Returns nullopt for rank-deficient configurations.
std::optional<Eigen::Matrix3d> estimate_fundamental(std::span<const PointPair> pairs,
                                                    std::span<const std::size_t> indices = {});

FundamentalEstimate ransac_fundamental(std::span<const PointPair> pairs, const RansacParams& params,
                                       std::uint64_t seed);

// Mutual matches weighted 1 (inlier) or 0 (outlier). Empty sets score 0
// with the degenerate flag; underdetermined geometry keeps every match and
// also sets the flag.
PairScore score_ransac(const ImageFeatureSet& db, const ImageFeatureSet& q, const RansacParams& params,
                       std::uint64_t seed);

}  // namespace hvpr
