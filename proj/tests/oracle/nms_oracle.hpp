#pragma once

// Exhaustive 3×3 neighbourhood check for keypoint detection.

#include <algorithm>
#include <cstddef>
#include <tuple>
#include <vector>

#include <Eigen/Core>

namespace oracle {

struct Peak {
  std::size_t y = 0;
  std::size_t x = 0;
  double value = 0.0;
};

inline std::vector<Peak> brute_force_peaks(const Eigen::MatrixXd& a) {
  std::vector<Peak> peaks;
  const long h = a.rows();
  const long w = a.cols();
  for (long y = 0; y < h; ++y) {
    for (long x = 0; x < w; ++x) {
      bool peak = true;
      for (long dy = -1; dy <= 1; ++dy)
        for (long dx = -1; dx <= 1; ++dx) {
          if (dy == 0 && dx == 0) continue;
          const long ny = y + dy;
          const long nx = x + dx;
          if (ny < 0 || nx < 0 || ny >= h || nx >= w) continue;
          if (!(a(y, x) > a(ny, nx))) peak = false;
        }
      if (peak) peaks.push_back({static_cast<std::size_t>(y), static_cast<std::size_t>(x), a(y, x)});
    }
  }
  std::stable_sort(peaks.begin(), peaks.end(), [](const Peak& p, const Peak& q) { return p.value > q.value; });
  return peaks;
}

}  // namespace oracle
