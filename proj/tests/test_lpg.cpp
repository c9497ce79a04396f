#include <gtest/gtest.h>

#include <cmath>

#include "hvpr/error.hpp"
#include "hvpr/lpg.hpp"
#include "hvpr/rng.hpp"
#include "hvpr/synthetic.hpp"
#include "oracle/geometry_oracle.hpp"
#include "oracle/lpg_oracle.hpp"
#include "test_support.hpp"

using namespace hvpr;
using testing_support::basis;
using testing_support::make_set;

namespace {

// Query sharing every descriptor of `db` with positions moved by `shift(k)`.
template <typename Shift>
ImageFeatureSet displaced_copy(const ImageFeatureSet& db, Shift shift) {
  ImageFeatureSet q = db;
  q.image_id = "q";
  for (std::size_t k = 0; k < q.size(); ++k) {
    const Position d = shift(k);
    q.positions[k] = {q.positions[k].x + d.x, q.positions[k].y + d.y};
  }
  return q;
}

}  // namespace

TEST(StarGraphs, CollinearExample) {
  const std::vector<Position> pos{{10, 50}, {30, 50}, {50, 50}};
  const StarGraphSet g = build_star_graphs(pos, 60.0);
  ASSERT_EQ(g.graphs.size(), 3u);
  EXPECT_EQ(g.graphs[0].leaves, (std::vector<std::uint32_t>{1}));
  EXPECT_EQ(g.graphs[1].leaves, (std::vector<std::uint32_t>{0, 2}));
  EXPECT_EQ(g.graphs[2].leaves, (std::vector<std::uint32_t>{1}));
  EXPECT_EQ(g.h, 60.0);
}

TEST(StarGraphs, SingleFeature) {
  const StarGraphSet g = build_star_graphs(std::vector<Position>{{3, 4}}, 60.0);
  ASSERT_EQ(g.graphs.size(), 1u);
  EXPECT_EQ(g.graphs[0].root, 0u);
  EXPECT_TRUE(g.graphs[0].leaves.empty());
}

TEST(StarGraphs, InclusiveWindowBoundary) {
  const StarGraphSet g = build_star_graphs(std::vector<Position>{{20, 20}, {50, 50}, {50.5, 20}}, 60.0);
  EXPECT_EQ(g.graphs[0].leaves, (std::vector<std::uint32_t>{1}));
  EXPECT_EQ(g.graphs[2].leaves, (std::vector<std::uint32_t>{1}));
}

TEST(StarGraphs, MatchesBruteForceWindows) {
  Rng rng(21);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<Position> pos(rng.below(60));
    for (auto& p : pos) {
      // coarse grid to hit boundaries and duplicates
      p = {std::floor(rng.uniform(0, 100) / 5) * 5, std::floor(rng.uniform(0, 100) / 5) * 5};
    }
    const double h = 5.0 * static_cast<double>(1 + rng.below(24));
    const StarGraphSet g = build_star_graphs(pos, h);
    const auto ref = oracle::brute_force_windows(pos, h);
    ASSERT_EQ(g.graphs.size(), pos.size());
    for (std::size_t r = 0; r < pos.size(); ++r) {
      EXPECT_EQ(g.graphs[r].root, r);
      ASSERT_EQ(g.graphs[r].leaves.size(), ref[r].size());
      for (std::size_t k = 0; k < ref[r].size(); ++k) EXPECT_EQ(g.graphs[r].leaves[k], ref[r][k]);
    }
  }
  EXPECT_THROW(build_star_graphs(std::vector<Position>{{1, 1}}, 0.0), Error);
}

TEST(Gaussian, ClosedForms) {
  EXPECT_EQ(gaussian_weight(0.0, 1.0), 1.0);
  EXPECT_NEAR(gaussian_weight(2.0 * 2.25, 1.5), std::exp(-1.0), 1e-15);
  EXPECT_NEAR(gaussian_weight(2.0, 1.0), 0.367879, 1e-6);
  EXPECT_THROW(gaussian_weight(1.0, 0.0), Error);
  EXPECT_THROW(gaussian_weight(1.0, -1.0), Error);
}

TEST(GaussianLut, TableInvariants) {
  const GaussianLut lut(1.0);
  EXPECT_EQ(lut.entries()[0], 1.0);
  EXPECT_EQ(lut.entries().size(), GaussianLut::kEntries);
  for (std::size_t k = 1; k < lut.entries().size(); ++k) EXPECT_LE(lut.entries()[k], lut.entries()[k - 1]);
  EXPECT_EQ(lut.domain_max(), 50.0);
  EXPECT_EQ(lut(50.0), 0.0);
  EXPECT_EQ(lut(1e9), 0.0);
  EXPECT_EQ(gaussian_weight(0.0, 1.0, &lut), 1.0);
}

TEST(GaussianLut, DenseScanWithinBound) {
  for (double sigma : {0.25, 1.0, 3.0}) {
    const GaussianLut lut(sigma);
    const double top = 50.0 * sigma * sigma;
    double worst = 0.0;
    for (int i = 0; i <= 1'000'000; ++i) {
      const double r2 = top * i / 1'000'000.0;
      worst = std::max(worst, std::abs(lut(r2) - std::exp(-r2 / (2 * sigma * sigma))));
    }
    EXPECT_LE(worst, 1e-3) << "sigma " << sigma;
  }
}

TEST(LpgWeights, ExactCopyWeighsOne) {
  const auto db = random_feature_set("db", 30, 16, 4);
  const auto q = displaced_copy(db, [](std::size_t) { return Position{0, 0}; });
  const auto g = build_star_graphs(db, 60.0);
  const MatchSet m = match_features(db, q);
  ASSERT_EQ(m.size(), 30u);
  for (double w : lpg_weights(g, db, q, m, 1.0)) EXPECT_EQ(w, 1.0);
  EXPECT_NEAR(score_lpg(g, db, q, 1.0).similarity, 1.0, 1e-9);
}

TEST(LpgWeights, DisplacedLeavesGiveInverseE) {
  // root at index 0, two leaves; each leaf moved so that |delta|^2 = 2 sigma^2
  const auto db = make_set("db", {{50, 50}, {60, 50}, {50, 40}}, {basis(0, 3), basis(1, 3), basis(2, 3)});
  const auto q = make_set("q", {{50, 50}, {61, 51}, {49, 39}}, {basis(0, 3), basis(1, 3), basis(2, 3)});
  const auto g = build_star_graphs(db, 60.0);
  const MatchSet m = match_features(db, q);
  const auto w = lpg_weights(g, db, q, m, 1.0);
  ASSERT_EQ(w.size(), 3u);
  EXPECT_NEAR(w[0], std::exp(-1.0), 1e-12);
  EXPECT_NEAR(w[0], 0.3679, 1e-4);
}

TEST(LpgWeights, DegenerateLeafRules) {
  // feature 2 is isolated (no leaves): weight 1. Features 0 and 1 see each
  // other, but feature 1 has no partner in the query, so root 0 has leaves
  // and K = 0: weight 0.
  const auto db = make_set("db", {{10, 10}, {20, 10}, {90, 90}}, {basis(0, 4), basis(1, 4), basis(2, 4)});
  const auto q = make_set("q", {{10, 10}, {90, 90}, {50, 50}}, {basis(0, 4), basis(2, 4), basis(3, 4)});
  const auto g = build_star_graphs(db, 20.0);
  const MatchSet m = match_features(db, q);
  const auto w = lpg_weights(g, db, q, m, 1.0);
  std::map<std::size_t, double> by_root;
  for (std::size_t k = 0; k < m.size(); ++k) by_root[m[k].db] = w[k];
  ASSERT_TRUE(by_root.count(0));
  ASSERT_TRUE(by_root.count(2));
  EXPECT_EQ(by_root[0], 0.0);
  EXPECT_EQ(by_root[2], 1.0);
}

TEST(LpgWeights, TranslationInvariance) {
  Rng rng(30);
  for (int trial = 0; trial < 50; ++trial) {
    auto db = random_feature_set("db", 12, 8, 500 + trial);
    for (auto& p : db.positions) p = {15 + 0.7 * p.x, 15 + 0.7 * p.y};
    const double dx = rng.uniform(-10, 10);
    const double dy = rng.uniform(-10, 10);
    const auto q0 = displaced_copy(db, [&](std::size_t) { return Position{rng.uniform(-3, 3), rng.uniform(-3, 3)}; });
    const auto q1 = displaced_copy(q0, [&](std::size_t) { return Position{dx, dy}; });
    const auto g = build_star_graphs(db, 40.0);
    const MatchSet m = match_features(db, q0);
    const auto w0 = lpg_weights(g, db, q0, m, 1.0);
    const auto w1 = lpg_weights(g, db, q1, m, 1.0);
    for (std::size_t k = 0; k < w0.size(); ++k) EXPECT_NEAR(w0[k], w1[k], 1e-12);
    EXPECT_NEAR(score_lpg(g, db, q0, 1.0).similarity, score_lpg(g, db, q1, 1.0).similarity, 1e-12);
  }
}

TEST(ScoreLpg, MatchesBruteForceReference) {
  Rng rng(31);
  for (int trial = 0; trial < 100; ++trial) {
    const auto db = random_feature_set("db", 1 + rng.below(10), 6, 900 + trial);
    const auto q = testing_support::random_partner(db, rng.below(8), rng.below(4), 1900 + trial);
    if (q.empty()) continue;
    const double h = rng.uniform(5, 100);
    const double sigma = rng.uniform(0.5, 20);
    const auto g = build_star_graphs(db, h);
    const auto ref = oracle::lpg_reference(db, q, h, sigma);
    EXPECT_NEAR(score_lpg(g, db, q, sigma).similarity, ref.similarity, 1e-9);
    const MatchSet m = match_features(db, q);
    const auto w = lpg_weights(g, db, q, m, sigma);
    ASSERT_EQ(m.size(), ref.pairs.size());
    for (std::size_t k = 0; k < m.size(); ++k) {
      EXPECT_EQ(m[k].db, ref.pairs[k].db);
      EXPECT_EQ(m[k].query, ref.pairs[k].query);
      EXPECT_NEAR(w[k], ref.pairs[k].weight, 1e-12);
      EXPECT_GE(w[k], 0.0);
      EXPECT_LE(w[k], 1.0);
    }
    const GaussianLut lut(sigma);
    const double bound = 1e-3 * static_cast<double>(m.size()) / std::sqrt(static_cast<double>(db.size() * q.size()));
    EXPECT_LE(std::abs(score_lpg(g, db, q, sigma, &lut).similarity - ref.similarity), bound + 1e-15);
  }
}

TEST(ScoreLpg, NeverAboveMmWithNonNegativeCosines) {
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const auto db = random_feature_set("db", 20, 8, seed);
    auto q = testing_support::random_partner(db, 12, 5, seed + 77);
    const auto g = build_star_graphs(db, 60.0);
    const MatchSet m = match_features(db, q);
    bool non_negative = true;
    for (const auto& x : m) non_negative = non_negative && x.cosine >= 0.0;
    if (!non_negative) continue;
    EXPECT_LE(score_lpg(g, db, q, 1.0).similarity, score_mm(db, q).similarity + 1e-12);
  }
}

TEST(ScoreLpg, EmptySetIsDegenerate) {
  const auto db = random_feature_set("db", 5, 4, 1);
  const ImageFeatureSet q("q", 4);
  const PairScore s = score_lpg(build_star_graphs(db, 60.0), db, q, 1.0);
  EXPECT_EQ(s.similarity, 0.0);
  EXPECT_TRUE(s.degenerate);
}

TEST(GraphCache, RoundTrip) {
  std::vector<StarGraphSet> sets;
  for (std::uint64_t i = 0; i < 5; ++i) sets.push_back(build_star_graphs(random_feature_set("x", 3 + 10 * i, 2, i), 60.0));
  sets.push_back(build_star_graphs(std::vector<Position>{}, 60.0));
  const auto bytes = encode_graph_cache(sets);
  EXPECT_EQ(decode_graph_cache(bytes), sets);
  auto bad = bytes;
  bad[0] = 'Z';
  EXPECT_THROW(decode_graph_cache(bad), Error);
  bad = bytes;
  bad.pop_back();
  EXPECT_THROW(decode_graph_cache(bad), Error);
}
