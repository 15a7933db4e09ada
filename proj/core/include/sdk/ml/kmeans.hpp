#pragma once

#include <cstdint>
#include <vector>

#include "sdk/rng.hpp"

namespace sdk::ml {

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

struct KMeansResult {
  std::vector<Point2> centroids;        // k entries, every cluster non-empty
  std::vector<std::size_t> assignment;  // per input point, nearest centroid (ties -> lowest index)
  double inertia = 0.0;                 // sum of squared distances to assigned centroid
};

/// Lloyd's algorithm with k-means++ seeding from the given seed. Iterates
/// until assignments stabilize or max_iter. Empty clusters are repaired by
/// stealing the farthest point from the largest cluster.
KMeansResult kmeans(const std::vector<Point2>& points, std::size_t k, std::uint64_t seed,
                    std::size_t max_iter = 100);

}  // namespace sdk::ml
