#include "hvpr/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include <Eigen/Geometry>

#include "hvpr/error.hpp"
#include "hvpr/parallel.hpp"
#include "hvpr/rng.hpp"

namespace hvpr {
namespace {

constexpr std::uint64_t kQueryStream = 0x51ED270B27A1C3F5ull;
constexpr std::uint64_t kSourceStream = 0x2545F4914F6CDD1Dull;

// Largest float strictly below the position range.
const double kMaxPosition = static_cast<double>(std::nextafter(static_cast<float>(kPositionRange), 0.0f));

double to_position(double v) {
  return std::clamp(static_cast<double>(static_cast<float>(v)), 0.0, kMaxPosition);
}

Position random_position(Rng& rng) {
  return {to_position(rng.uniform(0.0, kPositionRange)), to_position(rng.uniform(0.0, kPositionRange))};
}

void random_unit(Rng& rng, float* out, std::size_t d) {
  double norm_sq = 0.0;
  std::vector<double> v(d);
  do {
    norm_sq = 0.0;
    for (auto& x : v) {
      x = rng.normal();
      norm_sq += x * x;
    }
  } while (norm_sq == 0.0);
  const double inv = 1.0 / std::sqrt(norm_sq);
  for (std::size_t i = 0; i < d; ++i) out[i] = static_cast<float>(v[i] * inv);
}

std::string image_name(const char* prefix, std::size_t i) {
  std::string digits = std::to_string(i);
  if (digits.size() < 6) digits.insert(0, 6 - digits.size(), '0');
  return prefix + digits;
}

ImageFeatureSet perturb(const ImageFeatureSet& src, std::string id, const WorldConfig& cfg, std::uint64_t seed) {
  Rng rng(seed);
  ImageFeatureSet out = src;
  out.image_id = std::move(id);
  out.holistic.reset();
  const std::size_t d = cfg.d_loc;
  const double component_std = cfg.descriptor_noise / std::sqrt(static_cast<double>(d));
  std::vector<double> v(d);
  for (std::size_t k = 0; k < out.size(); ++k) {
    float* row = out.descriptors.row(static_cast<Eigen::Index>(k)).data();
    if (cfg.outlier_fraction > 0.0 && rng.uniform() < cfg.outlier_fraction) {
      out.positions[k] = random_position(rng);
      random_unit(rng, row, d);
      continue;
    }
    if (cfg.position_jitter > 0.0) {
      const double j = cfg.position_jitter;
      out.positions[k] = {to_position(out.positions[k].x + rng.uniform(-j, j)),
                          to_position(out.positions[k].y + rng.uniform(-j, j))};
    }
    if (cfg.descriptor_noise > 0.0) {
      double norm_sq = 0.0;
      for (std::size_t c = 0; c < d; ++c) {
        v[c] = static_cast<double>(row[c]) + component_std * rng.normal();
        norm_sq += v[c] * v[c];
      }
      if (norm_sq == 0.0) {
        random_unit(rng, row, d);
        continue;
      }
      const double inv = 1.0 / std::sqrt(norm_sq);
      for (std::size_t c = 0; c < d; ++c) row[c] = static_cast<float>(v[c] * inv);
    }
  }
  return out;
}

Eigen::Matrix3d cross_matrix(const Eigen::Vector3d& t) {
  Eigen::Matrix3d m;
  m << 0, -t.z(), t.y(), t.z(), 0, -t.x(), -t.y(), t.x(), 0;
  return m;
}

// Affine map (isotropic scale + shift) placing `pts` inside [5, 95]².
Eigen::Matrix3d fit_into_frame(const std::vector<Eigen::Vector2d>& pts) {
  Eigen::Vector2d lo = pts.front();
  Eigen::Vector2d hi = pts.front();
  for (const auto& p : pts) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  const double extent = std::max((hi - lo).maxCoeff(), 1e-12);
  const double scale = 90.0 / extent;
  const Eigen::Vector2d centre = (lo + hi) / 2.0;
  Eigen::Matrix3d t = Eigen::Matrix3d::Identity();
  t(0, 0) = scale;
  t(1, 1) = scale;
  t(0, 2) = 50.0 - scale * centre.x();
  t(1, 2) = 50.0 - scale * centre.y();
  return t;
}

}  // namespace

void WorldConfig::validate() const {
  if (db_size == 0 || query_size == 0 || features_per_image == 0 || d_loc == 0) {
    throw Error(ErrorCode::kInvalidArgument, "world sizes must be positive");
  }
  if (!(descriptor_noise >= 0.0) || !(position_jitter >= 0.0) || !(outlier_fraction >= 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "noise, jitter and outlier fraction must be non-negative");
  }
  if (outlier_fraction > 1.0) {
    throw Error(ErrorCode::kInvalidArgument, "outlier fraction must not exceed 1");
  }
}

void to_json(nlohmann::json& j, const WorldConfig& cfg) {
  j = nlohmann::json{{"seed", cfg.seed},
                     {"db_size", cfg.db_size},
                     {"query_size", cfg.query_size},
                     {"features_per_image", cfg.features_per_image},
                     {"d_loc", cfg.d_loc},
                     {"descriptor_noise", cfg.descriptor_noise},
                     {"position_jitter", cfg.position_jitter},
                     {"outlier_fraction", cfg.outlier_fraction}};
}

void from_json(const nlohmann::json& j, WorldConfig& cfg) {
  if (!j.is_object()) throw Error(ErrorCode::kMalformed, "world config must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (key == "seed") cfg.seed = value.get<std::uint64_t>();
    else if (key == "db_size") cfg.db_size = value.get<std::size_t>();
    else if (key == "query_size") cfg.query_size = value.get<std::size_t>();
    else if (key == "features_per_image") cfg.features_per_image = value.get<std::size_t>();
    else if (key == "d_loc") cfg.d_loc = value.get<std::size_t>();
    else if (key == "descriptor_noise") cfg.descriptor_noise = value.get<double>();
    else if (key == "position_jitter") cfg.position_jitter = value.get<double>();
    else if (key == "outlier_fraction") cfg.outlier_fraction = value.get<double>();
    else throw Error(ErrorCode::kMalformed, "unknown world config key '" + key + "'");
  }
}

ImageFeatureSet random_feature_set(std::string id, std::size_t count, std::size_t d_loc, std::uint64_t seed) {
  Rng rng(seed);
  ImageFeatureSet set(std::move(id), d_loc);
  set.positions.resize(count);
  set.descriptors.resize(static_cast<Eigen::Index>(count), static_cast<Eigen::Index>(d_loc));
  for (std::size_t k = 0; k < count; ++k) {
    set.positions[k] = random_position(rng);
    random_unit(rng, set.descriptors.row(static_cast<Eigen::Index>(k)).data(), d_loc);
  }
  return set;
}

World gen_world(const WorldConfig& cfg, unsigned threads) {
  cfg.validate();
  World world;
  world.db.resize(cfg.db_size);
  parallel_for(cfg.db_size, threads, [&](std::size_t i) {
    world.db[i] = random_feature_set(image_name("db", i), cfg.features_per_image, cfg.d_loc, derive_seed(cfg.seed, i));
  });

  std::vector<std::size_t> order(cfg.db_size);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng shuffle(derive_seed(cfg.seed ^ kSourceStream, 0));
  for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[shuffle.below(i)]);
  world.source.resize(cfg.query_size);
  for (std::size_t q = 0; q < cfg.query_size; ++q) world.source[q] = order[q % order.size()];

  world.queries.resize(cfg.query_size);
  parallel_for(cfg.query_size, threads, [&](std::size_t q) {
    world.queries[q] =
        perturb(world.db[world.source[q]], image_name("q", q), cfg, derive_seed(cfg.seed ^ kQueryStream, q));
  });
  for (std::size_t q = 0; q < cfg.query_size; ++q) {
    world.gt[world.queries[q].image_id] = {world.db[world.source[q]].image_id};
  }
  return world;
}

EpipolarPairs gen_epipolar_pairs(std::uint64_t seed, std::size_t n_inliers, std::size_t n_outliers) {
  if (n_inliers < 8) throw Error(ErrorCode::kInvalidArgument, "epipolar generator needs at least 8 inliers");
  Rng rng(seed);

  // Camera 1 at the origin looking down +z; camera 2 rotated and displaced.
  const Eigen::Vector3d axis = Eigen::Vector3d(rng.normal(), rng.normal(), rng.normal()).normalized();
  const Eigen::Matrix3d rot = Eigen::AngleAxisd(rng.uniform(0.05, 0.25), axis).toRotationMatrix();
  Eigen::Vector3d baseline(rng.uniform(0.5, 1.5), rng.uniform(-0.5, 0.5), rng.uniform(-0.3, 0.3));
  if (rng.uniform() < 0.5) baseline.x() = -baseline.x();

  std::vector<Eigen::Vector2d> view1;
  std::vector<Eigen::Vector2d> view2;
  while (view1.size() < n_inliers) {
    const Eigen::Vector3d p(rng.uniform(-2.0, 2.0), rng.uniform(-2.0, 2.0), rng.uniform(4.0, 8.0));
    const Eigen::Vector3d p2 = rot * p + baseline;
    if (p2.z() < 1.0) continue;
    view1.emplace_back(p.x() / p.z(), p.y() / p.z());
    view2.emplace_back(p2.x() / p2.z(), p2.y() / p2.z());
  }
  const Eigen::Matrix3d t1 = fit_into_frame(view1);
  const Eigen::Matrix3d t2 = fit_into_frame(view2);

  EpipolarPairs out;
  const Eigen::Matrix3d essential = cross_matrix(baseline) * rot;
  out.fundamental = t2.inverse().transpose() * essential * t1.inverse();
  out.fundamental /= out.fundamental.norm();

  std::vector<PointPair> pairs;
  std::vector<bool> labels;
  for (std::size_t k = 0; k < n_inliers; ++k) {
    const Eigen::Vector3d a = t1 * view1[k].homogeneous();
    const Eigen::Vector3d b = t2 * view2[k].homogeneous();
    pairs.push_back({{a.x(), a.y()}, {b.x(), b.y()}});
    labels.push_back(true);
  }
  for (std::size_t k = 0; k < n_outliers; ++k) {
    const Position a{rng.uniform(0.0, kPositionRange), rng.uniform(0.0, kPositionRange)};
    const Position b{rng.uniform(0.0, kPositionRange), rng.uniform(0.0, kPositionRange)};
    pairs.push_back({a, b});
    labels.push_back(false);
  }
  std::vector<std::size_t> order(pairs.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
  for (std::size_t i : order) {
    out.pairs.push_back(pairs[i]);
    out.inlier.push_back(labels[i]);
  }
  return out;
}

}  // namespace hvpr
