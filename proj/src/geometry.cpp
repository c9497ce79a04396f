#include "hvpr/geometry.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>

#include <Eigen/Dense>

#include "hvpr/error.hpp"
#include "hvpr/matching.hpp"
#include "hvpr/rng.hpp"

namespace hvpr {

namespace {

constexpr std::size_t kSampleSize = 8;
// Relative pivot below which the 8-point system counts as rank-deficient.
constexpr double kRankThreshold = 1e-9;

// Similarity transform moving the centroid to the origin with mean distance sqrt(2).
std::optional<Eigen::Matrix3d> hartley_transform(std::span<const PointPair> pairs,
                                                 std::span<const std::size_t> idx, bool query_side) {
  double cx = 0.0;
  double cy = 0.0;
  for (std::size_t k : idx) {
    const Position p = query_side ? pairs[k].query : pairs[k].db;
    cx += p.x;
    cy += p.y;
  }
  const double n = static_cast<double>(idx.size());
  cx /= n;
  cy /= n;
  double mean_dist = 0.0;
  for (std::size_t k : idx) {
    const Position p = query_side ? pairs[k].query : pairs[k].db;
    mean_dist += std::hypot(p.x - cx, p.y - cy);
  }
  mean_dist /= n;
  if (!(mean_dist > 1e-12)) return std::nullopt;
  const double s = std::sqrt(2.0) / mean_dist;
  Eigen::Matrix3d t;
  t << s, 0, -s * cx, 0, s, -s * cy, 0, 0, 1;
  return t;
}

Eigen::Matrix3d enforce_rank2(const Eigen::Matrix3d& f) {
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(f, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::Vector3d s = svd.singularValues();
  s(2) = 0.0;
  return svd.matrixU() * s.asDiagonal() * svd.matrixV().transpose();
}

std::size_t count_inliers(const Eigen::Matrix3d& F, std::span<const PointPair> pairs, double max_error,
                          std::vector<bool>* mask) {
  std::size_t count = 0;
  if (mask) mask->assign(pairs.size(), false);
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    if (sampson_error(F, pairs[k]) <= max_error) {
      ++count;
      if (mask) (*mask)[k] = true;
    }
  }
  return count;
}

int required_iterations(double inlier_ratio, double confidence, int cap) {
  const double good_sample = std::pow(inlier_ratio, static_cast<double>(kSampleSize));
  if (good_sample >= 1.0) return 1;
  if (good_sample <= 0.0) return cap;
  const double n = std::log(1.0 - confidence) / std::log(1.0 - good_sample);
  if (!(n < static_cast<double>(cap))) return cap;
  return std::max(1, static_cast<int>(std::ceil(n)));
}

FundamentalEstimate all_inliers(std::size_t n, int iterations) {
  FundamentalEstimate est;
  est.inlier_mask.assign(n, true);
  est.degenerate = true;
  est.iterations = iterations;
  return est;
}

}  // namespace

void RansacParams::validate() const {
  if (max_iterations <= 0 || !(inlier_threshold > 0.0) || !(confidence > 0.0 && confidence < 1.0) ||
      min_matches < kSampleSize) {
    throw Error(ErrorCode::kInvalidArgument,
                "RANSAC parameters require iterations > 0, threshold > 0, 0 < confidence < 1, min_matches >= 8");
  }
}

std::size_t FundamentalEstimate::inlier_count() const {
  return static_cast<std::size_t>(std::count(inlier_mask.begin(), inlier_mask.end(), true));
}

double sampson_error(const Eigen::Matrix3d& F, const PointPair& pair) {
  const Eigen::Vector3d x(pair.db.x, pair.db.y, 1.0);
  const Eigen::Vector3d xp(pair.query.x, pair.query.y, 1.0);
  const Eigen::Vector3d fx = F * x;
  const Eigen::Vector3d ftxp = F.transpose() * xp;
  const double e = xp.dot(fx);
  const double denom = fx(0) * fx(0) + fx(1) * fx(1) + ftxp(0) * ftxp(0) + ftxp(1) * ftxp(1);
  if (denom <= 0.0) return e == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  return e * e / denom;
}

std::optional<Eigen::Matrix3d> estimate_fundamental(std::span<const PointPair> pairs,
                                                    std::span<const std::size_t> indices) {
  std::vector<std::size_t> all;
  if (indices.empty()) {
    all.resize(pairs.size());
    std::iota(all.begin(), all.end(), std::size_t{0});
    indices = all;
  }
  if (indices.size() < kSampleSize) return std::nullopt;
  const auto t1 = hartley_transform(pairs, indices, false);
  const auto t2 = hartley_transform(pairs, indices, true);
  if (!t1 || !t2) return std::nullopt;

  Eigen::Matrix<double, Eigen::Dynamic, 9> a(static_cast<Eigen::Index>(indices.size()), 9);
  for (std::size_t r = 0; r < indices.size(); ++r) {
    const Eigen::Vector3d x = *t1 * Eigen::Vector3d(pairs[indices[r]].db.x, pairs[indices[r]].db.y, 1.0);
    const Eigen::Vector3d xp = *t2 * Eigen::Vector3d(pairs[indices[r]].query.x, pairs[indices[r]].query.y, 1.0);
    a.row(static_cast<Eigen::Index>(r)) << xp(0) * x(0), xp(0) * x(1), xp(0), xp(1) * x(0), xp(1) * x(1), xp(1),
        x(0), x(1), 1.0;
  }

  Eigen::Matrix<double, 9, 1> f;
  if (indices.size() == kSampleSize) {
    // Null vector of the 8×9 system: last column of Q in the QR of A^T.
    Eigen::ColPivHouseholderQR<Eigen::Matrix<double, 9, Eigen::Dynamic>> qr(a.transpose());
    qr.setThreshold(kRankThreshold);
    if (qr.rank() < static_cast<Eigen::Index>(kSampleSize)) return std::nullopt;
    const Eigen::Matrix<double, 9, 9> q = qr.householderQ();
    f = q.col(8);
  } else {
    const Eigen::Matrix<double, 9, 9> ata = a.transpose() * a;
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix<double, 9, 9>> eig(ata);
    const auto& ev = eig.eigenvalues();
    if (!(ev(1) > kRankThreshold * kRankThreshold * ev(8))) return std::nullopt;
    f = eig.eigenvectors().col(0);
  }
  Eigen::Matrix3d fn;
  fn << f(0), f(1), f(2), f(3), f(4), f(5), f(6), f(7), f(8);
  Eigen::Matrix3d F = t2->transpose() * enforce_rank2(fn) * *t1;
  const double norm = F.norm();
  if (!(norm > 0.0) || !F.allFinite()) return std::nullopt;
  return F / norm;
}

FundamentalEstimate ransac_fundamental(std::span<const PointPair> pairs, const RansacParams& params,
                                       std::uint64_t seed) {
  params.validate();
  const std::size_t n = pairs.size();
  if (n < params.min_matches) return all_inliers(n, 0);

  const double max_error = params.inlier_threshold * params.inlier_threshold;
  Rng rng(seed);
  std::array<std::size_t, kSampleSize> sample{};
  std::size_t best_count = 0;
  Eigen::Matrix3d best_F = Eigen::Matrix3d::Zero();
  int needed = params.max_iterations;
  int iter = 0;
  int valid = 0;
  while (iter < needed) {
    ++iter;
    for (std::size_t s = 0; s < kSampleSize; ++s) {
      std::size_t pick = 0;
      do {
        pick = static_cast<std::size_t>(rng.below(n));
      } while (std::find(sample.begin(), sample.begin() + static_cast<std::ptrdiff_t>(s), pick) !=
               sample.begin() + static_cast<std::ptrdiff_t>(s));
      sample[s] = pick;
    }
    const auto F = estimate_fundamental(pairs, sample);
    if (!F) continue;
    ++valid;
    const std::size_t count = count_inliers(*F, pairs, max_error, nullptr);
    if (count > best_count) {
      best_count = count;
      best_F = *F;
      needed = std::min(needed, required_iterations(static_cast<double>(count) / static_cast<double>(n),
                                                    params.confidence, params.max_iterations));
    }
  }
  if (valid == 0) return all_inliers(n, iter);

  FundamentalEstimate est;
  est.iterations = iter;
  est.F = best_F;
  count_inliers(best_F, pairs, max_error, &est.inlier_mask);
  if (best_count >= kSampleSize) {
    std::vector<std::size_t> consensus;
    for (std::size_t k = 0; k < n; ++k) {
      if (est.inlier_mask[k]) consensus.push_back(k);
    }
    if (const auto refit = estimate_fundamental(pairs, consensus)) {
      std::vector<bool> mask;
      if (count_inliers(*refit, pairs, max_error, &mask) >= best_count) {
        est.F = *refit;
        est.inlier_mask = std::move(mask);
      }
    }
  }
  return est;
}

PairScore score_ransac(const ImageFeatureSet& db, const ImageFeatureSet& q, const RansacParams& params,
                       std::uint64_t seed) {
  if (db.empty() || q.empty()) return {0.0, true};
  const MatchSet matches = match_features(db, q);
  std::vector<PointPair> pairs;
  pairs.reserve(matches.size());
  for (const auto& m : matches) pairs.push_back({db.positions[m.db], q.positions[m.query]});
  const auto est = ransac_fundamental(pairs, params, seed);
  std::vector<double> weights(matches.size());
  for (std::size_t k = 0; k < matches.size(); ++k) weights[k] = est.inlier_mask[k] ? 1.0 : 0.0;
  return {image_similarity(matches, weights, db.size(), q.size()), est.degenerate};
}

}  // namespace hvpr
