#include "hvpr/retrieval.hpp"

#include <algorithm>
#include <cmath>

#include "hvpr/error.hpp"
#include "hvpr/matching.hpp"
#include "hvpr/parallel.hpp"

namespace hvpr {

namespace {

bool ranks_before(const RankedEntry& a, const RankedEntry& b) {
  return a.score > b.score || (a.score == b.score && a.db_index < b.db_index);
}

}  // namespace

std::string_view reranker_name(const RerankerChoice& choice) noexcept {
  switch (choice.index()) {
    case 0: return "mm";
    case 1: return "lpg";
    default: return "ransac";
  }
}

FeatureDatabase::FeatureDatabase(std::vector<ImageFeatureSet> images) : images_(std::move(images)) {
  const bool any = std::any_of(images_.begin(), images_.end(), [](const auto& s) { return s.holistic.has_value(); });
  if (any) holistic_ = stack_holistic(images_);
}

const HolisticMatrix& FeatureDatabase::holistic() const {
  if (!has_holistic()) {
    throw Error(ErrorCode::kInvalidArgument, "database has no holistic descriptors (run aggregation first)");
  }
  return holistic_;
}

void FeatureDatabase::build_graphs(double h, unsigned threads) {
  std::vector<StarGraphSet> graphs(images_.size());
  parallel_for(images_.size(), threads, [&](std::size_t i) { graphs[i] = build_star_graphs(images_[i], h); });
  graphs_ = std::move(graphs);
}

void FeatureDatabase::set_graphs(std::vector<StarGraphSet> graphs) {
  if (graphs.size() != images_.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "graph cache holds " + std::to_string(graphs.size()) +
                                                   " images, database holds " + std::to_string(images_.size()));
  }
  for (std::size_t i = 0; i < graphs.size(); ++i) {
    if (graphs[i].graphs.size() != images_[i].size()) {
      throw Error(ErrorCode::kDimensionMismatch, "graph cache does not match features of '" +
                                                     images_[i].image_id + "'");
    }
  }
  graphs_ = std::move(graphs);
}

PairScorer::PairScorer(const FeatureDatabase& db, RerankerChoice choice) : db_(&db), choice_(std::move(choice)) {
  if (const auto* lpg = std::get_if<LpgReranker>(&choice_)) {
    if (!db.has_graphs()) {
      throw Error(ErrorCode::kInvalidArgument, "LPG scoring needs precomputed star graphs");
    }
    if (!db.graphs().empty() && std::abs(db.graphs().front().h - lpg->h) > 1e-4 * std::max(1.0, lpg->h)) {
      throw Error(ErrorCode::kInvalidArgument, "star graphs were built with h=" +
                                                   std::to_string(db.graphs().front().h) + ", requested h=" +
                                                   std::to_string(lpg->h));
    }
    if (!lpg->exact) lut_.emplace(lpg->sigma);
  } else if (const auto* ransac = std::get_if<RansacReranker>(&choice_)) {
    ransac->params.validate();
  }
}

PairScore PairScorer::score(std::size_t db_index, const ImageFeatureSet& q, std::size_t query_index) const {
  const ImageFeatureSet& db = db_->image(db_index);
  return std::visit(
      [&](const auto& r) -> PairScore {
        using T = std::decay_t<decltype(r)>;
        if constexpr (std::is_same_v<T, MmReranker>) {
          return score_mm(db, q);
        } else if constexpr (std::is_same_v<T, LpgReranker>) {
          return score_lpg(db_->graphs()[db_index], db, q, r.sigma, lut_ ? &*lut_ : nullptr);
        } else {
          const std::uint64_t pair_index = static_cast<std::uint64_t>(query_index) * db_->size() + db_index;
          return score_ransac(db, q, r.params, r.seed ^ pair_index);
        }
      },
      choice_);
}

RetrievalResult exhaustive_query(const ImageFeatureSet& q, std::size_t query_index, const PairScorer& scorer) {
  const auto& db = scorer.database();
  if (db.size() == 0) {
    throw Error(ErrorCode::kEmptyInput, "query against an empty database");
  }
  RetrievalResult out{q.image_id, {}};
  out.ranking.reserve(db.size());
  for (std::size_t i = 0; i < db.size(); ++i) {
    out.ranking.push_back({i, db.image(i).image_id, scorer.score(i, q, query_index).similarity, Stage::kReranked});
  }
  std::sort(out.ranking.begin(), out.ranking.end(), ranks_before);
  return out;
}

HierarchicalResult hierarchical_query(const ImageFeatureSet& q, std::size_t query_index, const PairScorer& scorer,
                                      std::size_t k_top) {
  const auto& db = scorer.database();
  if (db.size() == 0) {
    throw Error(ErrorCode::kEmptyInput, "query against an empty database");
  }
  if (k_top == 0) {
    throw Error(ErrorCode::kInvalidArgument, "K_top must be at least 1");
  }
  if (!q.holistic) {
    throw Error(ErrorCode::kInvalidArgument, "query '" + q.image_id + "' has no holistic descriptor");
  }
  const auto order = holistic_topk(*q.holistic, db.holistic(), db.size());

  HierarchicalResult out;
  out.holistic.query_id = q.image_id;
  out.holistic.ranking.reserve(order.size());
  for (const auto& c : order) {
    out.holistic.ranking.push_back({c.index, db.image(c.index).image_id, c.score, Stage::kHolistic});
  }

  const std::size_t k = std::min(k_top, order.size());
  auto& ranking = out.final.ranking;
  out.final.query_id = q.image_id;
  ranking.reserve(order.size());
  for (std::size_t r = 0; r < k; ++r) {
    const std::size_t i = order[r].index;
    ranking.push_back({i, db.image(i).image_id, scorer.score(i, q, query_index).similarity, Stage::kReranked});
  }
  std::sort(ranking.begin(), ranking.end(), ranks_before);

  const double floor = ranking.back().score - 1.0;
  const double step = 1.0 / static_cast<double>(order.size());
  for (std::size_t r = k; r < order.size(); ++r) {
    const std::size_t i = order[r].index;
    const double score = floor - static_cast<double>(r - k + 1) * step;
    ranking.push_back({i, db.image(i).image_id, score, Stage::kHolistic});
  }
  return out;
}

BatchResult run_queries(std::span<const ImageFeatureSet> queries, const PairScorer& scorer,
                        const QueryOptions& options) {
  BatchResult out;
  out.results.resize(queries.size());
  if (options.k_top) {
    out.holistic.resize(queries.size());
    parallel_for(queries.size(), options.threads, [&](std::size_t qi) {
      auto r = hierarchical_query(queries[qi], qi, scorer, *options.k_top);
      out.holistic[qi] = std::move(r.holistic);
      out.results[qi] = std::move(r.final);
    });
  } else {
    parallel_for(queries.size(), options.threads,
                 [&](std::size_t qi) { out.results[qi] = exhaustive_query(queries[qi], qi, scorer); });
  }
  return out;
}

}  // namespace hvpr
