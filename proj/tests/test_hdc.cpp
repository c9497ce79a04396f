#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "hvpr/error.hpp"
#include "hvpr/hdc.hpp"
#include "hvpr/rng.hpp"
#include "hvpr/synthetic.hpp"
#include "oracle/geometry_oracle.hpp"
#include "test_support.hpp"

using namespace hvpr;

namespace {

constexpr std::size_t kDim = 4096;
constexpr std::size_t kLoc = 32;

double cosine(const Eigen::VectorXd& a, const Eigen::VectorXd& b) { return a.dot(b) / (a.norm() * b.norm()); }

std::vector<float> to_float(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

const HdcCodebook& codebook() {
  static const HdcCodebook cb = hdc_init(77, kDim, kDefaultAnchorsX, kDefaultAnchorsY, kLoc);
  return cb;
}

}  // namespace

TEST(HdcCodebook, DeterministicPerSeed) {
  const HdcCodebook a = hdc_init(5, 256, 5, 9, 16);
  const HdcCodebook b = hdc_init(5, 256, 5, 9, 16);
  EXPECT_EQ(a.projection, b.projection);
  EXPECT_EQ(a.x_anchors, b.x_anchors);
  EXPECT_EQ(a.y_anchors, b.y_anchors);
  EXPECT_EQ(a.descriptor_length(), 16u);
  EXPECT_THROW(hdc_init(5, 0, 5, 9, 16), Error);
}

TEST(HdcCodebook, AnchorsAreSignVectors) {
  const HdcCodebook& cb = codebook();
  for (const auto* m : {&cb.x_anchors, &cb.y_anchors}) {
    EXPECT_TRUE((m->array().abs() == 1.0).all());
    for (long c = 0; c < m->cols(); ++c) EXPECT_DOUBLE_EQ(m->col(c).norm(), std::sqrt(static_cast<double>(kDim)));
  }
  EXPECT_EQ(cb.x_anchors.cols(), 5);
  EXPECT_EQ(cb.y_anchors.cols(), 9);
}

TEST(HdcCodebook, DifferentSeedsNearlyOrthogonal) {
  double total = 0.0;
  int count = 0;
  for (std::uint64_t s = 0; s < 100; ++s) {
    const HdcCodebook a = hdc_init(2 * s, kDim, 5, 9, 1);
    const HdcCodebook b = hdc_init(2 * s + 1, kDim, 5, 9, 1);
    for (long c = 0; c < 5; ++c, ++count) total += std::abs(cosine(a.x_anchors.col(c), b.x_anchors.col(c)));
    for (long c = 0; c < 9; ++c, ++count) total += std::abs(cosine(a.y_anchors.col(c), b.y_anchors.col(c)));
  }
  EXPECT_LT(total / count, 0.1);
}

TEST(EncodePosition, GridNodesAndMidpoints) {
  const HdcCodebook& cb = codebook();
  const Eigen::VectorXd origin = encode_position(cb, {0.0, 0.0});
  EXPECT_EQ(origin, Eigen::VectorXd(cb.x_anchors.col(0).cwiseProduct(cb.y_anchors.col(0))));
  const Eigen::VectorXd node = encode_position(cb, {25.0, 12.5});
  EXPECT_EQ(node, Eigen::VectorXd(cb.x_anchors.col(1).cwiseProduct(cb.y_anchors.col(1))));
  const Eigen::VectorXd mid = encode_position(cb, {12.5, 50.0});
  const Eigen::VectorXd expected =
      0.5 * (cb.x_anchors.col(0).cwiseProduct(cb.y_anchors.col(4)) + cb.x_anchors.col(1).cwiseProduct(cb.y_anchors.col(4)));
  EXPECT_LE((mid - expected).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(EncodePosition, Continuity) {
  const HdcCodebook& cb = codebook();
  Rng rng(3);
  for (int i = 0; i < 200; ++i) {
    const Position p{rng.uniform(0, 99.9), rng.uniform(0, 99.9)};
    const Position q{p.x + 1e-6, p.y + 1e-6};
    EXPECT_LE((encode_position(cb, p) - encode_position(cb, q)).norm(), 1e-4);
  }
  // crossing an anchor is continuous too
  EXPECT_LE((encode_position(cb, {25.0 - 1e-7, 50}) - encode_position(cb, {25.0, 50})).norm(), 1e-4);
}

TEST(EncodePosition, OutOfRange) {
  EXPECT_THROW(encode_position(codebook(), {100.0, 5.0}), Error);
  EXPECT_THROW(encode_position(codebook(), {5.0, -1e-9}), Error);
}

TEST(HdcAggregate, IdenticalSetsCosineOne) {
  const auto a = random_feature_set("a", 200, kLoc, 1);
  auto b = a;
  b.image_id = "b";
  const auto ha = hdc_aggregate(codebook(), a);
  const auto hb = hdc_aggregate(codebook(), b);
  EXPECT_NEAR(ha.values.dot(hb.values), 1.0, 1e-9);
  EXPECT_NEAR(ha.values.norm(), 1.0, 1e-12);
  EXPECT_EQ(ha.values, hb.values);
}

TEST(HdcAggregate, SingleFeatureEqualsBinding) {
  const auto a = random_feature_set("a", 1, kLoc, 2);
  const Eigen::VectorXd desc = a.descriptors.row(0).transpose().cast<double>();
  const Eigen::VectorXd bound = (codebook().projection * desc).cwiseProduct(encode_position(codebook(), a.positions[0]));
  EXPECT_NEAR(cosine(hdc_aggregate(codebook(), a).values, bound), 1.0, 1e-12);
}

TEST(HdcAggregate, SumOfBindingsReference) {
  const auto a = random_feature_set("a", 20, kLoc, 3);
  Eigen::VectorXd ref = Eigen::VectorXd::Zero(kDim);
  for (std::size_t k = 0; k < a.size(); ++k) {
    const Eigen::VectorXd d = a.descriptors.row(static_cast<long>(k)).transpose().cast<double>();
    ref += (codebook().projection * d).cwiseProduct(encode_position(codebook(), a.positions[k]));
  }
  ref.normalize();
  EXPECT_LE((hdc_aggregate(codebook(), a).values - ref).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(HdcAggregate, IndependentSetsNearlyOrthogonal) {
  int small = 0;
  for (std::uint64_t t = 0; t < 100; ++t) {
    const auto a = random_feature_set("a", 200, kLoc, 1000 + 2 * t);
    const auto b = random_feature_set("b", 200, kLoc, 1001 + 2 * t);
    small += std::abs(hdc_aggregate(codebook(), a).values.dot(hdc_aggregate(codebook(), b).values)) < 0.1;
  }
  EXPECT_GE(small, 95);
}

TEST(HdcAggregate, PositionSensitivity) {
  Rng rng(8);
  double margin = 0.0;
  for (std::uint64_t t = 0; t < 50; ++t) {
    const auto a = random_feature_set("a", 200, kLoc, 2000 + t);
    auto shuffled = a;
    for (std::size_t i = shuffled.size(); i > 1; --i) std::swap(shuffled.positions[i - 1], shuffled.positions[rng.below(i)]);
    const auto h = hdc_aggregate(codebook(), a).values;
    margin += 1.0 - h.dot(hdc_aggregate(codebook(), shuffled).values);
  }
  EXPECT_GT(margin / 50.0, 0.05);
}

TEST(HdcAggregate, OrderInvariant) {
  const auto a = random_feature_set("a", 150, kLoc, 4);
  auto b = a;
  Rng rng(4);
  for (std::size_t i = b.size(); i > 1; --i) {
    const auto j = static_cast<long>(rng.below(i));
    std::swap(b.positions[i - 1], b.positions[static_cast<std::size_t>(j)]);
    b.descriptors.row(static_cast<long>(i - 1)).swap(b.descriptors.row(j));
  }
  EXPECT_LE((hdc_aggregate(codebook(), a).values - hdc_aggregate(codebook(), b).values).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(HdcAggregate, EmptyAndMismatch) {
  const auto h = hdc_aggregate(codebook(), ImageFeatureSet("e", kLoc));
  EXPECT_TRUE(h.empty);
  EXPECT_EQ(h.values.norm(), 0.0);
  EXPECT_THROW(hdc_aggregate(codebook(), random_feature_set("x", 3, kLoc + 1, 1)), Error);
}

TEST(HolisticTopK, Examples) {
  std::vector<ImageFeatureSet> db;
  for (std::uint64_t i = 0; i < 30; ++i) {
    auto s = random_feature_set("db" + std::to_string(i), 20, kLoc, 300 + i);
    s.holistic = to_float(hdc_aggregate(codebook(), s).values);
    db.push_back(std::move(s));
  }
  const HolisticMatrix m = stack_holistic(db);
  const auto top1 = holistic_topk(*db[17].holistic, m, 1);
  ASSERT_EQ(top1.size(), 1u);
  EXPECT_EQ(top1[0].index, 17u);

  Rng rng(5);
  for (int t = 0; t < 20; ++t) {
    std::vector<float> q(kDim);
    for (auto& v : q) v = static_cast<float>(rng.normal());
    const auto sims = holistic_similarities(q, m);
    const auto ref = oracle::sort_by_score(sims);
    const auto all = holistic_topk(q, m, db.size());
    ASSERT_EQ(all.size(), db.size());
    for (std::size_t r = 0; r < all.size(); ++r) EXPECT_EQ(all[r].index, ref[r]);
    const auto some = holistic_topk(q, m, 7);
    ASSERT_EQ(some.size(), 7u);
    for (std::size_t r = 0; r < 7; ++r) EXPECT_EQ(some[r].index, ref[r]);
    EXPECT_EQ(holistic_topk(q, m, 1000).size(), db.size());
  }
}

TEST(HolisticTopK, TiesToLowerIndex) {
  HolisticMatrix m(4, 2);
  m << 1, 0, 0, 1, 1, 0, 0.5f, 0.5f;
  const std::vector<float> q{1, 0};
  const auto top = holistic_topk(q, m, 3);
  EXPECT_EQ(top[0].index, 0u);
  EXPECT_EQ(top[1].index, 2u);
  EXPECT_EQ(top[2].index, 3u);
}

TEST(HolisticTopK, Errors) {
  const std::vector<float> q{1, 0};
  EXPECT_THROW(holistic_topk(q, HolisticMatrix(0, 2), 1), Error);
  HolisticMatrix m(1, 2);
  m << 1, 0;
  EXPECT_THROW(holistic_topk(q, m, 0), Error);
}
