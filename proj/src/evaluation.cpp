#include "hvpr/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "hvpr/error.hpp"

namespace hvpr {

PrCurve pr_auc(std::span<const ScoredPair> pairs) {
  std::vector<ScoredPair> ranked(pairs.begin(), pairs.end());
  std::sort(ranked.begin(), ranked.end(), [](const ScoredPair& a, const ScoredPair& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.query != b.query) return a.query < b.query;
    return a.db < b.db;
  });
  const auto positives =
      static_cast<std::size_t>(std::count_if(ranked.begin(), ranked.end(), [](const auto& p) { return p.positive; }));
  if (positives == 0) {
    throw Error(ErrorCode::kInvalidArgument, "PR curve needs at least one positive pair");
  }
  PrCurve curve;
  curve.points.reserve(ranked.size());
  std::size_t tp = 0;
  for (std::size_t k = 0; k < ranked.size(); ++k) {
    if (ranked[k].positive) ++tp;
    curve.points.push_back({static_cast<double>(tp) / static_cast<double>(k + 1),
                            static_cast<double>(tp) / static_cast<double>(positives)});
  }
  PrPoint prev{curve.points.front().precision, 0.0};
  for (const auto& p : curve.points) {
    curve.auc += (p.recall - prev.recall) * (p.precision + prev.precision) / 2.0;
    prev = p;
  }
  return curve;
}

PrCurve pr_auc(std::span<const RetrievalResult> results, const GroundTruth& gt) {
  std::vector<ScoredPair> pairs;
  for (std::size_t qi = 0; qi < results.size(); ++qi) {
    const auto it = gt.find(results[qi].query_id);
    if (it == gt.end()) {
      throw Error(ErrorCode::kMalformed, "no ground-truth entry for query '" + results[qi].query_id + "'");
    }
    for (const auto& e : results[qi].ranking) {
      pairs.push_back({qi, e.db_index, e.score, it->second.contains(e.db_id)});
    }
  }
  return pr_auc(pairs);
}

RecallReport recall_at_k(std::span<const RetrievalResult> results, const GroundTruth& gt,
                         std::span<const std::size_t> ks) {
  for (std::size_t k : ks) {
    if (k == 0) throw Error(ErrorCode::kInvalidArgument, "Recall@K requires K >= 1");
  }
  RecallReport report;
  std::vector<std::size_t> hits(ks.size(), 0);
  for (const auto& r : results) {
    const auto it = gt.find(r.query_id);
    if (it == gt.end()) {
      ++report.skipped;
      continue;
    }
    ++report.evaluated;
    std::size_t first = std::numeric_limits<std::size_t>::max();  // no correct entry
    for (std::size_t rank = 0; rank < r.ranking.size(); ++rank) {
      if (it->second.contains(r.ranking[rank].db_id)) {
        first = rank;
        break;
      }
    }
    for (std::size_t n = 0; n < ks.size(); ++n) {
      if (first < ks[n]) ++hits[n];
    }
  }
  for (std::size_t n = 0; n < ks.size(); ++n) {
    const double recall =
        report.evaluated == 0 ? 0.0 : static_cast<double>(hits[n]) / static_cast<double>(report.evaluated);
    report.values.push_back({ks[n], recall});
  }
  return report;
}

SweepGrid sweep_lpg(FeatureDatabase& db, std::span<const ImageFeatureSet> queries, const GroundTruth& gt,
                    std::span<const double> sigmas, std::span<const double> hs, bool exact, unsigned threads) {
  if (sigmas.empty() || hs.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "sweep grid needs at least one sigma and one h");
  }
  SweepGrid grid;
  grid.sigmas.assign(sigmas.begin(), sigmas.end());
  grid.hs.assign(hs.begin(), hs.end());
  grid.cells.resize(sigmas.size() * hs.size());
  for (std::size_t hi = 0; hi < hs.size(); ++hi) {
    db.build_graphs(hs[hi], threads);
    for (std::size_t si = 0; si < sigmas.size(); ++si) {
      const PairScorer scorer(db, LpgReranker{sigmas[si], hs[hi], exact});
      const auto batch = run_queries(queries, scorer, {std::nullopt, threads});
      grid.cells[si * hs.size() + hi] = {sigmas[si], hs[hi], pr_auc(batch.results, gt).auc};
    }
  }
  return grid;
}

std::vector<TimingReport> bench_compare(const FeatureDatabase& db, std::span<const ImageFeatureSet> queries,
                                        std::optional<std::size_t> k_top,
                                        std::span<const RerankerChoice> rerankers, std::size_t repetitions) {
  using Clock = std::chrono::steady_clock;
  repetitions = std::max<std::size_t>(repetitions, 1);
  std::vector<PairScorer> scorers;
  std::vector<TimingReport> reports(rerankers.size());
  for (std::size_t c = 0; c < rerankers.size(); ++c) {
    scorers.emplace_back(db, rerankers[c]);
    auto& r = reports[c];
    r.reranker = std::string(reranker_name(rerankers[c]));
    r.k_top = k_top.value_or(0);
    r.repetitions = repetitions;
    r.threads = 1;
    r.query_count = queries.size();
    r.pairs_per_repetition = queries.size() * (k_top ? std::min(*k_top, db.size()) : db.size());
    r.per_query_ms.assign(queries.size(), 0.0);
    r.clock_resolution_s =
        static_cast<double>(Clock::period::num) / static_cast<double>(Clock::period::den);
  }

  for (std::size_t rep = 0; rep < repetitions; ++rep) {
    for (std::size_t c = 0; c < rerankers.size(); ++c) {
      double total = 0.0;
      for (std::size_t qi = 0; qi < queries.size(); ++qi) {
        const auto t0 = Clock::now();
        if (k_top) {
          auto r = hierarchical_query(queries[qi], qi, scorers[c], *k_top);
          (void)r;
        } else {
          auto r = exhaustive_query(queries[qi], qi, scorers[c]);
          (void)r;
        }
        const double dt = std::chrono::duration<double>(Clock::now() - t0).count();
        total += dt;
        reports[c].per_query_ms[qi] += 1e3 * dt / static_cast<double>(repetitions);
      }
      reports[c].repetition_seconds.push_back(total);
    }
  }

  for (auto& r : reports) {
    const auto& s = r.repetition_seconds;
    const double n = static_cast<double>(s.size());
    r.mean_seconds = std::accumulate(s.begin(), s.end(), 0.0) / n;
    double var = 0.0;
    for (double v : s) var += (v - r.mean_seconds) * (v - r.mean_seconds);
    r.stddev_seconds = s.size() > 1 ? std::sqrt(var / (n - 1.0)) : 0.0;
    r.min_seconds = *std::min_element(s.begin(), s.end());
    r.max_seconds = *std::max_element(s.begin(), s.end());
    r.mean_latency_ms = r.query_count == 0 ? 0.0 : 1e3 * r.mean_seconds / static_cast<double>(r.query_count);
    r.pair_throughput =
        r.mean_seconds > 0.0 ? static_cast<double>(r.pairs_per_repetition) / r.mean_seconds : 0.0;
  }
  return reports;
}

std::string pr_curve_to_dat(const PrCurve& curve) {
  std::ostringstream out;
  out.precision(10);
  out << "# recall precision (AUC " << curve.auc << ")\n";
  for (const auto& p : curve.points) out << p.recall << ' ' << p.precision << '\n';
  return out.str();
}

std::string sweep_to_csv(const SweepGrid& grid) {
  std::ostringstream out;
  out << "sigma";
  for (double h : grid.hs) out << ",h=" << h;
  out << '\n';
  out.precision(6);
  for (std::size_t si = 0; si < grid.sigmas.size(); ++si) {
    out << grid.sigmas[si];
    for (std::size_t hi = 0; hi < grid.hs.size(); ++hi) out << ',' << grid.at(si, hi).auc;
    out << '\n';
  }
  return out.str();
}

nlohmann::json sweep_to_json(const SweepGrid& grid) {
  nlohmann::json j;
  j["sigmas"] = grid.sigmas;
  j["hs"] = grid.hs;
  auto cells = nlohmann::json::array();
  for (const auto& c : grid.cells) cells.push_back({{"sigma", c.sigma}, {"h", c.h}, {"auc", c.auc}});
  j["cells"] = std::move(cells);
  return j;
}

nlohmann::json recall_to_json(const RecallReport& report) {
  nlohmann::json j;
  auto values = nlohmann::json::object();
  for (const auto& v : report.values) values["R@" + std::to_string(v.k)] = v.recall;
  j["recall"] = std::move(values);
  j["evaluated_queries"] = report.evaluated;
  j["skipped_queries"] = report.skipped;
  return j;
}

std::string recall_to_csv(const RecallReport& report) {
  std::ostringstream out;
  out << "k,recall\n";
  for (const auto& v : report.values) out << v.k << ',' << v.recall << '\n';
  return out.str();
}

std::string timing_to_csv(std::span<const TimingReport> reports) {
  std::ostringstream out;
  out << "reranker,k_top,repetitions,threads,queries,pairs,mean_s,stddev_s,min_s,max_s,latency_ms,pairs_per_s\n";
  for (const auto& r : reports) {
    out << r.reranker << ',' << r.k_top << ',' << r.repetitions << ',' << r.threads << ',' << r.query_count << ','
        << r.pairs_per_repetition << ',' << r.mean_seconds << ',' << r.stddev_seconds << ',' << r.min_seconds << ','
        << r.max_seconds << ',' << r.mean_latency_ms << ',' << r.pair_throughput << '\n';
  }
  return out.str();
}

nlohmann::json timing_to_json(std::span<const TimingReport> reports) {
  auto arr = nlohmann::json::array();
  for (const auto& r : reports) {
    nlohmann::json j;
    j["reranker"] = r.reranker;
    j["k_top"] = r.k_top;
    j["repetitions"] = r.repetitions;
    j["threads"] = r.threads;
    j["queries"] = r.query_count;
    j["pairs_per_repetition"] = r.pairs_per_repetition;
    j["repetition_seconds"] = r.repetition_seconds;
    j["total_comparison_seconds"] = r.mean_seconds;
    j["stddev_seconds"] = r.stddev_seconds;
    j["min_seconds"] = r.min_seconds;
    j["max_seconds"] = r.max_seconds;
    j["mean_latency_ms"] = r.mean_latency_ms;
    j["pair_throughput_per_s"] = r.pair_throughput;
    j["clock_resolution_s"] = r.clock_resolution_s;
    arr.push_back(std::move(j));
  }
  return arr;
}

}  // namespace hvpr
