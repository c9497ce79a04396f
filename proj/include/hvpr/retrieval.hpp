#pragma once

// Hierarchical query engine: holistic top-K candidate selection followed by
// local-feature re-ranking with one of three scorers, plus the exhaustive
// baseline that scores every database image.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <variant>
#include <vector>

#include "hvpr/geometry.hpp"
#include "hvpr/hdc.hpp"
#include "hvpr/lpg.hpp"
#include "hvpr/types.hpp"

namespace hvpr {

inline constexpr std::size_t kDefaultTopK = 100;

struct MmReranker {};

struct LpgReranker {
  double sigma = kDefaultSigma;
  double h = kDefaultWindow;
  bool exact = false;  // bypass the Gaussian look-up table
};

struct RansacReranker {
  RansacParams params;
  std::uint64_t seed = 0;
};

using RerankerChoice = std::variant<MmReranker, LpgReranker, RansacReranker>;

std::string_view reranker_name(const RerankerChoice& choice) noexcept;

// Read-only database: feature sets, their stacked holistic descriptors and
// (for LPG) the star graphs precomputed offline.
class FeatureDatabase {
 public:
  explicit FeatureDatabase(std::vector<ImageFeatureSet> images);

  [[nodiscard]] std::size_t size() const noexcept { return images_.size(); }
  [[nodiscard]] const std::vector<ImageFeatureSet>& images() const noexcept { return images_; }
  [[nodiscard]] const ImageFeatureSet& image(std::size_t i) const { return images_.at(i); }

  [[nodiscard]] bool has_holistic() const noexcept { return holistic_.rows() > 0; }
  // Throws kInvalidArgument when the store carries no holistic descriptors.
  [[nodiscard]] const HolisticMatrix& holistic() const;

  void build_graphs(double h, unsigned threads = 1);
  // Throws kDimensionMismatch unless there is one graph set per image with
  // one graph per feature.
  void set_graphs(std::vector<StarGraphSet> graphs);
  [[nodiscard]] const std::vector<StarGraphSet>& graphs() const noexcept { return graphs_; }
  [[nodiscard]] bool has_graphs() const noexcept { return !graphs_.empty() || images_.empty(); }

 private:
  std::vector<ImageFeatureSet> images_;
  HolisticMatrix holistic_;
  std::vector<StarGraphSet> graphs_;
};

// Scores (database image, query) pairs with the chosen method. RANSAC pairs
// draw from seed ^ (query_index * |DB| + db_index), so a pair's score does
// not depend on which stage or order it is evaluated in.
class PairScorer {
 public:
  // LPG requires graphs built with the same h (throws kInvalidArgument).
  PairScorer(const FeatureDatabase& db, RerankerChoice choice);

  [[nodiscard]] PairScore score(std::size_t db_index, const ImageFeatureSet& q, std::size_t query_index) const;
  [[nodiscard]] const RerankerChoice& choice() const noexcept { return choice_; }
  [[nodiscard]] const FeatureDatabase& database() const noexcept { return *db_; }

 private:
  const FeatureDatabase* db_;
  RerankerChoice choice_;
  std::optional<GaussianLut> lut_;
};

// Every database image scored and sorted (score desc, index asc).
RetrievalResult exhaustive_query(const ImageFeatureSet& q, std::size_t query_index, const PairScorer& scorer);

struct HierarchicalResult {
  RetrievalResult holistic;  // full holistic ordering, before re-ranking
  RetrievalResult final;
};

// Candidates (the k_top holistic best) are re-ranked by the scorer and listed
// first; the remaining images follow in holistic order with scores squeezed
// below min(candidate scores) - 1.
HierarchicalResult hierarchical_query(const ImageFeatureSet& q, std::size_t query_index, const PairScorer& scorer,
                                      std::size_t k_top);

struct QueryOptions {
  std::optional<std::size_t> k_top = kDefaultTopK;  // nullopt: exhaustive
  unsigned threads = 1;
};

struct BatchResult {
  std::vector<RetrievalResult> results;
  std::vector<RetrievalResult> holistic;  // empty for exhaustive runs
};

BatchResult run_queries(std::span<const ImageFeatureSet> queries, const PairScorer& scorer,
                        const QueryOptions& options);

}  // namespace hvpr
