#pragma once

#include <cstdint>
#include <vector>

#include "logmaint/clustering.hpp"
#include "logmaint/evaluation.hpp"

namespace logmaint {

struct KScore {
  int k = 0;
  double silhouette = 0.0;
  double inertia = 0.0;
};

struct KSelection {
  int chosen_k = 0;
  std::vector<KScore> table;  // ascending k
};

/// Runs kmeans for every k in [k_min, k_max] and picks the k with the highest
/// mean silhouette (smallest k on ties). The inertia column is kept for elbow
/// inspection.
inline KSelection select_k(const PointMatrix& points, int k_min, int k_max, std::uint64_t seed = 42,
                           int max_iter = 300) {
  const auto n = static_cast<int>(points.rows());
  if (k_min < 2 || k_max < k_min || k_max > n - 1)
    throw Error("select_k: range " + std::to_string(k_min) + ".." + std::to_string(k_max) + " not within 2.." +
                std::to_string(n - 1));
  KSelection out;
  double best = -2.0;
  for (int k = k_min; k <= k_max; ++k) {
    const auto c = kmeans(points, k, seed, max_iter);
    KScore row{k, silhouette(points, c.labels).mean, inertia(points, c)};
    if (row.silhouette > best) {
      best = row.silhouette;
      out.chosen_k = k;
    }
    out.table.push_back(row);
  }
  return out;
}

}  // namespace logmaint
