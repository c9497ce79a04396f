#include "hvpr/matching.hpp"

#include <cmath>

#include "hvpr/error.hpp"

namespace hvpr {

namespace {

Eigen::VectorXf inverse_norms(const DescriptorMatrix& d) {
  Eigen::VectorXf inv(d.rows());
  for (Eigen::Index i = 0; i < d.rows(); ++i) {
    const double n = d.row(i).cast<double>().norm();
    if (n == 0.0) {
      throw Error(ErrorCode::kInvalidArgument, "zero-norm descriptor at row " + std::to_string(i));
    }
    inv(i) = static_cast<float>(1.0 / n);
  }
  return inv;
}

}  // namespace

Eigen::MatrixXd cosine_matrix(const DescriptorMatrix& a, const DescriptorMatrix& b) {
  if (a.cols() != b.cols()) {
    throw Error(ErrorCode::kDimensionMismatch, "descriptor lengths differ: " + std::to_string(a.cols()) + " vs " +
                                                   std::to_string(b.cols()));
  }
  const Eigen::MatrixXd ad = a.cast<double>();
  const Eigen::MatrixXd bd = b.cast<double>();
  Eigen::VectorXd na = ad.rowwise().norm();
  Eigen::VectorXd nb = bd.rowwise().norm();
  if ((na.array() == 0.0).any() || (nb.array() == 0.0).any()) {
    throw Error(ErrorCode::kInvalidArgument, "zero-norm descriptor in cosine_matrix");
  }
  return na.cwiseInverse().asDiagonal() * (ad * bd.transpose()) * nb.cwiseInverse().asDiagonal();
}

double descriptor_cosine(std::span<const float> a, std::span<const float> b) {
  double dot = 0.0;
  double na = 0.0;
  double nb = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double x = a[k];
    const double y = b[k];
    dot += x * y;
    na += x * x;
    nb += y * y;
  }
  return dot / std::sqrt(na * nb);
}

MatchSet match_features(const ImageFeatureSet& db, const ImageFeatureSet& q) {
  if (db.empty() || q.empty()) return {};
  if (db.descriptor_length() != q.descriptor_length()) {
    throw Error(ErrorCode::kDimensionMismatch, "descriptor lengths differ between '" + db.image_id + "' and '" +
                                                   q.image_id + "'");
  }
  const Eigen::VectorXf inv_db = inverse_norms(db.descriptors);
  const Eigen::VectorXf inv_q = inverse_norms(q.descriptors);
  Eigen::MatrixXf sim;
  sim.noalias() = db.descriptors * q.descriptors.transpose();
  sim = inv_db.asDiagonal() * sim * inv_q.asDiagonal();
  MatchSet matches = mutual_matches(sim);
  for (auto& m : matches) {
    m.cosine = descriptor_cosine(db.descriptor(m.db), q.descriptor(m.query));
  }
  return matches;
}

double image_similarity(std::span<const Match> matches, std::span<const double> weights, std::size_t db_count,
                        std::size_t query_count) {
  if (db_count == 0 || query_count == 0) return 0.0;
  double sum = 0.0;
  for (std::size_t k = 0; k < matches.size(); ++k) {
    const double w = weights.empty() ? 1.0 : weights[k];
    sum += w * matches[k].cosine;
  }
  return sum / std::sqrt(static_cast<double>(db_count) * static_cast<double>(query_count));
}

PairScore score_mm(const ImageFeatureSet& db, const ImageFeatureSet& q) {
  if (db.empty() || q.empty()) return {0.0, true};
  const MatchSet matches = match_features(db, q);
  return {image_similarity(matches, {}, db.size(), q.size()), false};
}

}  // namespace hvpr
