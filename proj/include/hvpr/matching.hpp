#pragma once

// Descriptor similarity, mutual nearest-neighbour matching and the weighted
// image similarity
//
//   S = 1 / sqrt(|D_db| * |D_q|) * sum_ij w_ij * cos(D_db^i, D_q^j)
//
// shared by every re-ranking method.

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "hvpr/types.hpp"

namespace hvpr {

struct Match {
  std::size_t db = 0;     // feature index in the database image
  std::size_t query = 0;  // feature index in the query image
  double cosine = 0.0;
};

// Partial bijection: each db index and each query index appears at most once.
using MatchSet = std::vector<Match>;

// M(i, j) = cos(a_i, b_j) in double precision. Throws on zero-norm rows or
// differing descriptor lengths.
Eigen::MatrixXd cosine_matrix(const DescriptorMatrix& a, const DescriptorMatrix& b);

// (i, j) is kept iff j is the argmax of row i and i the argmax of column j;
// argmax ties go to the lowest index. The cosine is read from `m`.
template <typename Derived>
MatchSet mutual_matches(const Eigen::MatrixBase<Derived>& m) {
  MatchSet out;
  const Eigen::Index rows = m.rows();
  const Eigen::Index cols = m.cols();
  if (rows == 0 || cols == 0) return out;
  std::vector<Eigen::Index> row_best(static_cast<std::size_t>(rows), 0);
  std::vector<Eigen::Index> col_best(static_cast<std::size_t>(cols), 0);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) {
      auto& rb = row_best[static_cast<std::size_t>(i)];
      if (m(i, j) > m(i, rb)) rb = j;
      auto& cb = col_best[static_cast<std::size_t>(j)];
      if (m(i, j) > m(cb, j)) cb = i;
    }
  }
  for (Eigen::Index i = 0; i < rows; ++i) {
    const Eigen::Index j = row_best[static_cast<std::size_t>(i)];
    if (col_best[static_cast<std::size_t>(j)] == i) {
      out.push_back({static_cast<std::size_t>(i), static_cast<std::size_t>(j), static_cast<double>(m(i, j))});
    }
  }
  return out;
}

// Production matcher: the similarity matrix is a single-precision product
// (the dominant cost), the mutual-match cosines are then recomputed exactly
// in double from the stored descriptors.
MatchSet match_features(const ImageFeatureSet& db, const ImageFeatureSet& q);

// Exact double-precision cosine between two stored descriptors.
double descriptor_cosine(std::span<const float> a, std::span<const float> b);

// Weighted image similarity over a match set. `weights` is either empty
// (all ones) or aligned with `matches`.
double image_similarity(std::span<const Match> matches, std::span<const double> weights, std::size_t db_count,
                        std::size_t query_count);

// Mutual-matching score: w_ij = 1 on mutual matches, 0 elsewhere.
// Either set empty -> similarity 0 with the degenerate flag.
PairScore score_mm(const ImageFeatureSet& db, const ImageFeatureSet& q);

}  // namespace hvpr
