#include <gtest/gtest.h>

#include <cmath>

#include "hvpr/error.hpp"
#include "hvpr/matching.hpp"
#include "hvpr/rng.hpp"
#include "hvpr/synthetic.hpp"
#include "oracle/lpg_oracle.hpp"
#include "test_support.hpp"

using namespace hvpr;
using testing_support::basis;
using testing_support::make_set;

TEST(CosineMatrix, SingleUnitVector) {
  const auto a = make_set("a", {{1, 1}}, {{0.6f, 0.8f}});
  const Eigen::MatrixXd m = cosine_matrix(a.descriptors, a.descriptors);
  ASSERT_EQ(m.rows(), 1);
  EXPECT_NEAR(m(0, 0), 1.0, 1e-15);
}

TEST(CosineMatrix, OrthogonalVectors) {
  const auto a = make_set("a", {{1, 1}}, {basis(0, 3)});
  const auto b = make_set("b", {{1, 1}}, {basis(2, 3)});
  EXPECT_NEAR(cosine_matrix(a.descriptors, b.descriptors)(0, 0), 0.0, 1e-9);
}

TEST(CosineMatrix, MatchesNaiveLoop) {
  const auto a = random_feature_set("a", 5, 9, 1);
  auto b = random_feature_set("b", 7, 9, 2);
  b.descriptors *= 3.0f;
  const Eigen::MatrixXd m = cosine_matrix(a.descriptors, b.descriptors);
  for (std::size_t i = 0; i < 5; ++i)
    for (std::size_t j = 0; j < 7; ++j)
      EXPECT_NEAR(m(static_cast<long>(i), static_cast<long>(j)), oracle::loop_cosine(a, i, b, j), 1e-9);
}

TEST(CosineMatrix, Errors) {
  const auto a = make_set("a", {{1, 1}}, {{0.0f, 0.0f}});
  const auto b = make_set("b", {{1, 1}}, {{1.0f, 0.0f}});
  EXPECT_THROW(cosine_matrix(a.descriptors, b.descriptors), Error);
  const auto c = make_set("c", {{1, 1}}, {{1.0f, 0.0f, 0.0f}});
  EXPECT_THROW(cosine_matrix(b.descriptors, c.descriptors), Error);
}

TEST(MutualMatches, IdentityLike) {
  Eigen::MatrixXd m = Eigen::MatrixXd::Constant(4, 4, 0.3);
  m.diagonal().setOnes();
  const MatchSet s = mutual_matches(m);
  ASSERT_EQ(s.size(), 4u);
  for (std::size_t i = 0; i < 4; ++i) {
    EXPECT_EQ(s[i].db, i);
    EXPECT_EQ(s[i].query, i);
  }
}

TEST(MutualMatches, OnlyOneTwoSidedArgmax) {
  Eigen::MatrixXd m(2, 3);
  m << 0.1, 0.9, 0.2,
       0.3, 0.8, 0.1;
  // row argmaxes: 0->1, 1->1; column argmaxes: 0->1, 1->0, 2->0
  const MatchSet s = mutual_matches(m);
  ASSERT_EQ(s.size(), 1u);
  EXPECT_EQ(s[0].db, 0u);
  EXPECT_EQ(s[0].query, 1u);
  EXPECT_EQ(s[0].cosine, 0.9);
}

TEST(MutualMatches, TieGoesToLowerIndex) {
  Eigen::MatrixXd m(1, 3);
  m << 0.5, 0.7, 0.7;
  const MatchSet s = mutual_matches(m);
  ASSERT_EQ(s.size(), 1u);
  EXPECT_EQ(s[0].query, 1u);
  Eigen::MatrixXd t(3, 1);
  t << 0.7, 0.2, 0.7;
  const MatchSet u = mutual_matches(t);
  ASSERT_EQ(u.size(), 1u);
  EXPECT_EQ(u[0].db, 0u);
}

TEST(MutualMatches, EmptyMatrix) {
  EXPECT_TRUE(mutual_matches(Eigen::MatrixXd(0, 3)).empty());
}

TEST(MutualMatches, PartialBijectionOnRandomInputs) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto a = random_feature_set("a", 1 + seed % 13, 6, seed);
    const auto b = random_feature_set("b", 1 + seed % 7, 6, seed + 100);
    const MatchSet s = match_features(a, b);
    std::set<std::size_t> is, js;
    for (const auto& m : s) {
      EXPECT_TRUE(is.insert(m.db).second);
      EXPECT_TRUE(js.insert(m.query).second);
      EXPECT_GE(m.cosine, -1.0);
      EXPECT_LE(m.cosine, 1.0);
    }
    const MatchSet exact = mutual_matches(cosine_matrix(a.descriptors, b.descriptors));
    ASSERT_EQ(exact.size(), s.size());
    for (std::size_t k = 0; k < s.size(); ++k) {
      EXPECT_EQ(exact[k].db, s[k].db);
      EXPECT_EQ(exact[k].query, s[k].query);
      EXPECT_NEAR(exact[k].cosine, s[k].cosine, 1e-12);
    }
  }
}

TEST(MutualMatches, ScaleInvariance) {
  auto a = random_feature_set("a", 10, 8, 7);
  const auto b = random_feature_set("b", 9, 8, 8);
  const MatchSet before = match_features(a, b);
  a.descriptors *= 7.5f;
  const MatchSet after = match_features(a, b);
  ASSERT_EQ(before.size(), after.size());
  for (std::size_t k = 0; k < before.size(); ++k) {
    EXPECT_EQ(before[k].db, after[k].db);
    EXPECT_EQ(before[k].query, after[k].query);
  }
}

TEST(ScoreMm, IdenticalSetsScoreOne) {
  const auto a = random_feature_set("a", 25, 16, 3);
  const PairScore s = score_mm(a, a);
  EXPECT_NEAR(s.similarity, 1.0, 1e-9);
  EXPECT_FALSE(s.degenerate);
}

TEST(ScoreMm, NoMutualMatchesScoresZero) {
  // a non-empty similarity matrix always has a mutual pair (its global
  // maximum), so only an empty side leaves no matches
  const auto a = make_set("a", {{1, 1}}, {basis(0, 2)});
  const ImageFeatureSet empty("e", 2);
  const PairScore s = score_mm(a, empty);
  EXPECT_EQ(s.similarity, 0.0);
  EXPECT_TRUE(s.degenerate);
  EXPECT_EQ(image_similarity({}, {}, 3, 4), 0.0);
}

TEST(ScoreMm, ClosedFormFourByOne) {
  const auto db = make_set("db", {{1, 1}, {2, 2}, {3, 3}, {4, 4}},
                           {basis(0, 4), basis(1, 4), basis(2, 4), basis(3, 4)});
  const auto q = make_set("q", {{1, 1}}, {basis(2, 4)});
  EXPECT_NEAR(score_mm(db, q).similarity, 0.5, 1e-15);
}

TEST(ScoreMm, SymmetricAndBounded) {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const auto a = random_feature_set("a", 5 + seed % 9, 12, seed);
    const auto b = testing_support::random_partner(a, 4, 3 + seed % 5, seed + 50);
    const double ab = score_mm(a, b).similarity;
    const double ba = score_mm(b, a).similarity;
    EXPECT_NEAR(ab, ba, 1e-12);
    EXPECT_LE(ab, 1.0 + 1e-12);
    const auto ref = oracle::lpg_reference(a, b, 60.0, 1.0, false);
    EXPECT_NEAR(ab, ref.similarity, 1e-12);
  }
}

TEST(ScoreMm, NegativeCosineMatchesAdmitted) {
  const auto a = make_set("a", {{1, 1}}, {{1.0f, 0.0f}});
  const auto b = make_set("b", {{1, 1}}, {{-1.0f, 0.0f}});
  EXPECT_NEAR(score_mm(a, b).similarity, -1.0, 1e-15);
}
