#pragma once

// Reference metrics. The PR integrator sums trapezoids only at positive
// ranks (recall is flat elsewhere); Recall@K scans ranks directly.

#include <algorithm>
#include <cstddef>
#include <string>
#include <tuple>
#include <vector>

namespace oracle {

struct LabelledScore {
  std::size_t query = 0;
  std::size_t db = 0;
  double score = 0.0;
  bool positive = false;
};

inline double naive_pr_auc(std::vector<LabelledScore> pairs) {
  std::stable_sort(pairs.begin(), pairs.end(), [](const LabelledScore& a, const LabelledScore& b) {
    return std::make_tuple(-a.score, a.query, a.db) < std::make_tuple(-b.score, b.query, b.db);
  });
  double total_pos = 0.0;
  for (const auto& p : pairs) total_pos += p.positive ? 1.0 : 0.0;
  const auto precision_at = [&](std::size_t len) {
    double tp = 0.0;
    for (std::size_t k = 0; k < len; ++k) tp += pairs[k].positive ? 1.0 : 0.0;
    return tp / static_cast<double>(len);
  };
  double area = 0.0;
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    if (!pairs[k].positive) continue;
    const double here = precision_at(k + 1);
    const double before = k == 0 ? here : precision_at(k);
    area += (here + before) / 2.0 / total_pos;
  }
  return area;
}

// `first_hit_rank[q]` is the 1-based rank of the first correct entry (0 = none).
inline double naive_recall(const std::vector<std::size_t>& first_hit_rank, std::size_t k) {
  std::size_t hits = 0;
  for (std::size_t r : first_hit_rank)
    if (r != 0 && r <= k) ++hits;
  return static_cast<double>(hits) / static_cast<double>(first_hit_rank.size());
}

}  // namespace oracle
