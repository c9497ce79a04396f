#include "hvpr/hdc.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "hvpr/error.hpp"
#include "hvpr/rng.hpp"

namespace hvpr {

namespace {

struct AxisWeights {
  std::size_t lo = 0;
  std::size_t hi = 0;
  double w_lo = 1.0;
  double w_hi = 0.0;
};

// Anchors sit at 100 * i / (n - 1); a coordinate splits its weight between
// the two neighbouring anchors.
AxisWeights axis_weights(double v, std::size_t n) {
  if (n == 1) return {};
  const double spacing = kPositionRange / static_cast<double>(n - 1);
  const double t = v / spacing;
  auto lo = static_cast<std::size_t>(std::floor(t));
  lo = std::min(lo, n - 2);
  const double frac = t - static_cast<double>(lo);
  return {lo, lo + 1, 1.0 - frac, frac};
}

void check_position(Position pos) {
  if (!in_range(pos)) {
    throw Error(ErrorCode::kOutOfRange,
                "position (" + std::to_string(pos.x) + ", " + std::to_string(pos.y) + ") outside [0, 100)");
  }
}

}  // namespace

HdcCodebook hdc_init(std::uint64_t seed, std::size_t dim, std::size_t n_x, std::size_t n_y, std::size_t d_loc) {
  if (dim == 0 || n_x == 0 || n_y == 0 || d_loc == 0) {
    throw Error(ErrorCode::kInvalidArgument, "HDC codebook dimensions must be positive");
  }
  HdcCodebook cb;
  cb.seed = seed;
  cb.dim = dim;
  cb.n_x = n_x;
  cb.n_y = n_y;
  const auto d = static_cast<Eigen::Index>(dim);
  Rng rng(seed);
  cb.projection.resize(d, static_cast<Eigen::Index>(d_loc));
  for (Eigen::Index r = 0; r < d; ++r) {
    for (Eigen::Index c = 0; c < cb.projection.cols(); ++c) cb.projection(r, c) = rng.normal();
  }
  auto fill_anchors = [&](Eigen::MatrixXd& m, std::size_t count) {
    m.resize(d, static_cast<Eigen::Index>(count));
    for (Eigen::Index a = 0; a < m.cols(); ++a) {
      for (Eigen::Index r = 0; r < d; ++r) m(r, a) = (rng.next() >> 63) != 0 ? 1.0 : -1.0;
    }
  };
  fill_anchors(cb.x_anchors, n_x);
  fill_anchors(cb.y_anchors, n_y);
  return cb;
}

Eigen::VectorXd encode_position(const HdcCodebook& cb, Position pos) {
  check_position(pos);
  const AxisWeights wx = axis_weights(pos.x, cb.n_x);
  const AxisWeights wy = axis_weights(pos.y, cb.n_y);
  Eigen::VectorXd code = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(cb.dim));
  const std::size_t xs[2] = {wx.lo, wx.hi};
  const double wxs[2] = {wx.w_lo, wx.w_hi};
  const std::size_t ys[2] = {wy.lo, wy.hi};
  const double wys[2] = {wy.w_lo, wy.w_hi};
  for (int a = 0; a < 2; ++a) {
    for (int b = 0; b < 2; ++b) {
      const double w = wxs[a] * wys[b];
      if (w == 0.0) continue;
      code += w * cb.x_anchors.col(static_cast<Eigen::Index>(xs[a]))
                      .cwiseProduct(cb.y_anchors.col(static_cast<Eigen::Index>(ys[b])));
    }
  }
  return code;
}

HolisticDescriptor hdc_aggregate(const HdcCodebook& cb, const ImageFeatureSet& feats) {
  HolisticDescriptor out;
  out.values = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(cb.dim));
  if (feats.empty()) {
    out.empty = true;
    return out;
  }
  if (feats.descriptor_length() != cb.descriptor_length()) {
    throw Error(ErrorCode::kDimensionMismatch, "descriptor length " + std::to_string(feats.descriptor_length()) +
                                                   " != codebook d_loc " +
                                                   std::to_string(cb.descriptor_length()));
  }
  // Binding distributes over bundling: sum_k (P d_k) ⊙ sum_c w_kc a_c equals
  // sum_c a_c ⊙ P (sum_k w_kc d_k), so the projection runs once per anchor
  // cell instead of once per feature.
  const std::size_t cells = cb.n_x * cb.n_y;
  Eigen::MatrixXd cell_sums = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(feats.descriptor_length()),
                                                    static_cast<Eigen::Index>(cells));
  std::vector<bool> used(cells, false);
  for (std::size_t k = 0; k < feats.size(); ++k) {
    check_position(feats.positions[k]);
    const AxisWeights wx = axis_weights(feats.positions[k].x, cb.n_x);
    const AxisWeights wy = axis_weights(feats.positions[k].y, cb.n_y);
    const Eigen::VectorXd desc = feats.descriptors.row(static_cast<Eigen::Index>(k)).transpose().cast<double>();
    const std::size_t xs[2] = {wx.lo, wx.hi};
    const double wxs[2] = {wx.w_lo, wx.w_hi};
    const std::size_t ys[2] = {wy.lo, wy.hi};
    const double wys[2] = {wy.w_lo, wy.w_hi};
    for (int a = 0; a < 2; ++a) {
      for (int b = 0; b < 2; ++b) {
        const double w = wxs[a] * wys[b];
        if (w == 0.0) continue;
        const std::size_t cell = xs[a] * cb.n_y + ys[b];
        cell_sums.col(static_cast<Eigen::Index>(cell)) += w * desc;
        used[cell] = true;
      }
    }
  }
  std::vector<Eigen::Index> active;
  for (std::size_t c = 0; c < cells; ++c) {
    if (used[c]) active.push_back(static_cast<Eigen::Index>(c));
  }
  Eigen::MatrixXd packed(cell_sums.rows(), static_cast<Eigen::Index>(active.size()));
  for (std::size_t i = 0; i < active.size(); ++i) packed.col(static_cast<Eigen::Index>(i)) = cell_sums.col(active[i]);
  const Eigen::MatrixXd projected = cb.projection * packed;
  for (std::size_t i = 0; i < active.size(); ++i) {
    const auto c = static_cast<std::size_t>(active[i]);
    const auto xa = static_cast<Eigen::Index>(c / cb.n_y);
    const auto ya = static_cast<Eigen::Index>(c % cb.n_y);
    out.values.array() += projected.col(static_cast<Eigen::Index>(i)).array() * cb.x_anchors.col(xa).array() *
                          cb.y_anchors.col(ya).array();
  }
  const double norm = out.values.norm();
  if (norm > 0.0) {
    out.values /= norm;
  } else {
    out.empty = true;
  }
  return out;
}

HolisticMatrix stack_holistic(std::span<const ImageFeatureSet> db) {
  if (db.empty()) return {};
  const std::size_t dim = db.front().holistic ? db.front().holistic->size() : 0;
  HolisticMatrix m(static_cast<Eigen::Index>(db.size()), static_cast<Eigen::Index>(dim));
  for (std::size_t i = 0; i < db.size(); ++i) {
    if (!db[i].holistic || db[i].holistic->size() != dim || dim == 0) {
      throw Error(ErrorCode::kInvalidArgument, "missing or inconsistent holistic descriptor for '" +
                                                   db[i].image_id + "'");
    }
    m.row(static_cast<Eigen::Index>(i)) =
        Eigen::Map<const Eigen::RowVectorXf>(db[i].holistic->data(), static_cast<Eigen::Index>(dim));
  }
  return m;
}

std::vector<double> holistic_similarities(std::span<const float> query, const HolisticMatrix& db) {
  if (static_cast<Eigen::Index>(query.size()) != db.cols()) {
    throw Error(ErrorCode::kDimensionMismatch, "holistic query length " + std::to_string(query.size()) +
                                                   " != database dimension " + std::to_string(db.cols()));
  }
  const Eigen::VectorXd q =
      Eigen::Map<const Eigen::VectorXf>(query.data(), static_cast<Eigen::Index>(query.size())).cast<double>();
  const double qn = q.norm();
  std::vector<double> sims(static_cast<std::size_t>(db.rows()), 0.0);
  for (Eigen::Index i = 0; i < db.rows(); ++i) {
    double dot = 0.0;
    double nn = 0.0;
    const float* row = db.row(i).data();
    for (Eigen::Index c = 0; c < db.cols(); ++c) {
      const double v = row[c];
      dot += v * q(c);
      nn += v * v;
    }
    // Zero holistic vectors (empty images) compare as 0.
    sims[static_cast<std::size_t>(i)] = (qn > 0.0 && nn > 0.0) ? dot / (qn * std::sqrt(nn)) : 0.0;
  }
  return sims;
}

std::vector<Candidate> holistic_topk(std::span<const float> query, const HolisticMatrix& db, std::size_t k) {
  if (db.rows() == 0) {
    throw Error(ErrorCode::kEmptyInput, "holistic_topk on an empty database");
  }
  if (k == 0) {
    throw Error(ErrorCode::kInvalidArgument, "holistic_topk requires K >= 1");
  }
  const auto sims = holistic_similarities(query, db);
  std::vector<Candidate> all(sims.size());
  for (std::size_t i = 0; i < sims.size(); ++i) all[i] = {i, sims[i]};
  const std::size_t keep = std::min(k, all.size());
  auto better = [](const Candidate& a, const Candidate& b) {
    return a.score > b.score || (a.score == b.score && a.index < b.index);
  };
  std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(keep), all.end(), better);
  all.resize(keep);
  return all;
}

}  // namespace hvpr
