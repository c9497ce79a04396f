#pragma once

// Hyperdimensional aggregation of a local feature set into one holistic
// descriptor, and holistic top-K candidate selection.
//
// Each feature contributes (P · desc) ⊙ pos(x, y), where P is a seeded
// Gaussian projection to D dimensions and pos(x, y) bilinearly interpolates
// the bound anchor grid x_anchor_i ⊙ y_anchor_j (anchors are random ±1
// hypervectors at uniform grid positions). Contributions are bundled by
// summation and the result is L2-normalized.

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "hvpr/types.hpp"

namespace hvpr {

inline constexpr std::size_t kDefaultHdcDim = 4096;
inline constexpr std::size_t kDefaultAnchorsX = 5;
inline constexpr std::size_t kDefaultAnchorsY = 9;

struct HdcCodebook {
  std::uint64_t seed = 0;
  std::size_t dim = kDefaultHdcDim;
  std::size_t n_x = kDefaultAnchorsX;
  std::size_t n_y = kDefaultAnchorsY;
  Eigen::MatrixXd projection;  // dim × d_loc
  Eigen::MatrixXd x_anchors;   // dim × n_x, entries ±1
  Eigen::MatrixXd y_anchors;   // dim × n_y, entries ±1

  [[nodiscard]] std::size_t descriptor_length() const noexcept {
    return static_cast<std::size_t>(projection.cols());
  }
};

struct HolisticDescriptor {
  Eigen::VectorXd values;  // unit norm, or zero for an empty feature set
  bool empty = false;
};

// Deterministic in (seed, dims). Throws for zero dimensions.
HdcCodebook hdc_init(std::uint64_t seed, std::size_t dim, std::size_t n_x, std::size_t n_y, std::size_t d_loc);

Eigen::VectorXd encode_position(const HdcCodebook& cb, Position pos);

HolisticDescriptor hdc_aggregate(const HdcCodebook& cb, const ImageFeatureSet& feats);

struct Candidate {
  std::size_t index = 0;
  double score = 0.0;
};

// Row-per-image matrix of stored holistic descriptors.
using HolisticMatrix = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

HolisticMatrix stack_holistic(std::span<const ImageFeatureSet> db);

// Cosine of `query` against every row of `db`, computed in double.
std::vector<double> holistic_similarities(std::span<const float> query, const HolisticMatrix& db);

// The K best rows by cosine, descending, ties to the lower index. K larger
// than the database returns every row. Throws on an empty database or K == 0.
std::vector<Candidate> holistic_topk(std::span<const float> query, const HolisticMatrix& db, std::size_t k);

}  // namespace hvpr
