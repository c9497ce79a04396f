#pragma once

// Retrieval metrics (PR-AUC over the pooled query×database pairs, Recall@K),
// LPG hyper-parameter sweeps and the feature-comparison timing harness.

#include <chrono>
#include <optional>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "hvpr/retrieval.hpp"
#include "hvpr/types.hpp"

namespace hvpr {

struct ScoredPair {
  std::size_t query = 0;
  std::size_t db = 0;
  double score = 0.0;
  bool positive = false;
};

struct PrPoint {
  double precision = 0.0;
  double recall = 0.0;
};

struct PrCurve {
  std::vector<PrPoint> points;  // one per ranked prefix
  double auc = 0.0;
};

// Pairs ranked by (score desc, query asc, db asc); precision/recall at every
// prefix; trapezoid over recall starting from (0, precision of the first
// prefix). Throws kInvalidArgument when there is no positive pair.
PrCurve pr_auc(std::span<const ScoredPair> pairs);

// Pools every ranked entry of every result. A query without a ground-truth
// entry is an error (use an empty list for "no match").
PrCurve pr_auc(std::span<const RetrievalResult> results, const GroundTruth& gt);

struct RecallAtK {
  std::size_t k = 0;
  double recall = 0.0;
};

struct RecallReport {
  std::vector<RecallAtK> values;
  std::size_t evaluated = 0;
  std::size_t skipped = 0;  // queries missing from the ground truth
};

// Fraction of queries with at least one ground-truth id in their top K.
RecallReport recall_at_k(std::span<const RetrievalResult> results, const GroundTruth& gt,
                         std::span<const std::size_t> ks);

struct SweepCell {
  double sigma = 0.0;
  double h = 0.0;
  double auc = 0.0;
};

struct SweepGrid {
  std::vector<double> sigmas;
  std::vector<double> hs;
  std::vector<SweepCell> cells;  // sigma-major: cells[s * hs.size() + h]

  [[nodiscard]] const SweepCell& at(std::size_t sigma_index, std::size_t h_index) const {
    return cells.at(sigma_index * hs.size() + h_index);
  }
};

// Exhaustive LPG AUC for every (sigma, h) cell. `db` graphs are rebuilt per h.
SweepGrid sweep_lpg(FeatureDatabase& db, std::span<const ImageFeatureSet> queries, const GroundTruth& gt,
                    std::span<const double> sigmas, std::span<const double> hs, bool exact = false,
                    unsigned threads = 1);

struct TimingReport {
  std::string reranker;
  std::size_t k_top = 0;  // 0 for exhaustive
  std::size_t repetitions = 0;
  unsigned threads = 1;
  std::size_t query_count = 0;
  std::size_t pairs_per_repetition = 0;  // local-feature comparisons
  std::vector<double> repetition_seconds;
  std::vector<double> per_query_ms;  // mean over repetitions
  double mean_seconds = 0.0;
  double stddev_seconds = 0.0;
  double min_seconds = 0.0;
  double max_seconds = 0.0;
  double mean_latency_ms = 0.0;
  double pair_throughput = 0.0;  // comparisons per second
  double clock_resolution_s = 0.0;
};

// Times only the comparison work of each query (holistic selection plus
// re-ranking, or the exhaustive scan): no I/O, no graph construction.
// Repetitions are interleaved across configurations. Runs single-threaded.
std::vector<TimingReport> bench_compare(const FeatureDatabase& db, std::span<const ImageFeatureSet> queries,
                                        std::optional<std::size_t> k_top,
                                        std::span<const RerankerChoice> rerankers, std::size_t repetitions);

std::string pr_curve_to_dat(const PrCurve& curve);
std::string sweep_to_csv(const SweepGrid& grid);
nlohmann::json sweep_to_json(const SweepGrid& grid);
nlohmann::json recall_to_json(const RecallReport& report);
std::string recall_to_csv(const RecallReport& report);
std::string timing_to_csv(std::span<const TimingReport> reports);
nlohmann::json timing_to_json(std::span<const TimingReport> reports);

}  // namespace hvpr
