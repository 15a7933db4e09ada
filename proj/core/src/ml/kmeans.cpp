#include "sdk/ml/kmeans.hpp"

#include <algorithm>
#include <cmath>

#include "sdk/errors.hpp"

namespace sdk::ml {

namespace {

double sq_dist(const Point2& a, const Point2& b) {
  const double dx = a.x - b.x;
  const double dy = a.y - b.y;
  return dx * dx + dy * dy;
}

std::size_t nearest_centroid(const Point2& p, const std::vector<Point2>& centroids) {
  std::size_t best = 0;
  double best_d = sq_dist(p, centroids[0]);
  for (std::size_t c = 1; c < centroids.size(); ++c) {
    const double d = sq_dist(p, centroids[c]);
    if (d < best_d) {  // strict: ties keep the lowest index
      best_d = d;
      best = c;
    }
  }
  return best;
}

std::vector<Point2> seed_plus_plus(const std::vector<Point2>& points, std::size_t k, Rng& rng) {
  std::vector<Point2> centroids;
  centroids.reserve(k);
  centroids.push_back(points[rng.uniform_int(points.size())]);

  std::vector<double> d2(points.size());
  while (centroids.size() < k) {
    double total = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i) {
      double best = sq_dist(points[i], centroids[0]);
      for (std::size_t c = 1; c < centroids.size(); ++c) {
        best = std::min(best, sq_dist(points[i], centroids[c]));
      }
      d2[i] = best;
      total += best;
    }
    if (total <= 0.0) {
      // All remaining points coincide with a centroid; duplicate one.
      centroids.push_back(points[rng.uniform_int(points.size())]);
      continue;
    }
    const double target = rng.uniform() * total;
    double cum = 0.0;
    std::size_t chosen = points.size() - 1;
    for (std::size_t i = 0; i < points.size(); ++i) {
      cum += d2[i];
      if (cum >= target) {
        chosen = i;
        break;
      }
    }
    centroids.push_back(points[chosen]);
  }
  return centroids;
}

}  // namespace

KMeansResult kmeans(const std::vector<Point2>& points, std::size_t k, std::uint64_t seed,
                    std::size_t max_iter) {
  if (k < 1 || points.size() < k) {
    throw TooFewRows("kmeans needs at least k points");
  }
  Rng rng(derive_seed(seed, "kmeans"));

  KMeansResult result;
  result.centroids = seed_plus_plus(points, k, rng);
  result.assignment.assign(points.size(), 0);

  // Repair empty clusters: steal the farthest point from the largest cluster
  // and move the empty centroid onto it.
  const auto repair_empty = [&](bool& changed) {
    std::vector<std::size_t> sizes(k, 0);
    for (const std::size_t c : result.assignment) {
      ++sizes[c];
    }
    for (std::size_t c = 0; c < k; ++c) {
      if (sizes[c] > 0) {
        continue;
      }
      const std::size_t donor = static_cast<std::size_t>(
          std::max_element(sizes.begin(), sizes.end()) - sizes.begin());
      std::size_t farthest = 0;
      double far_d = -1.0;
      for (std::size_t i = 0; i < points.size(); ++i) {
        if (result.assignment[i] != donor) {
          continue;
        }
        const double d = sq_dist(points[i], result.centroids[donor]);
        if (d > far_d) {
          far_d = d;
          farthest = i;
        }
      }
      result.assignment[farthest] = c;
      result.centroids[c] = points[farthest];
      --sizes[donor];
      ++sizes[c];
      changed = true;
    }
  };

  for (std::size_t iter = 0; iter < max_iter; ++iter) {
    bool changed = false;
    for (std::size_t i = 0; i < points.size(); ++i) {
      const std::size_t c = nearest_centroid(points[i], result.centroids);
      if (c != result.assignment[i]) {
        result.assignment[i] = c;
        changed = true;
      }
    }
    repair_empty(changed);

    // Update step: centroid = mean of assigned points.
    std::vector<Point2> sums(k, Point2{0.0, 0.0});
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t i = 0; i < points.size(); ++i) {
      sums[result.assignment[i]].x += points[i].x;
      sums[result.assignment[i]].y += points[i].y;
      ++counts[result.assignment[i]];
    }
    for (std::size_t c = 0; c < k; ++c) {
      result.centroids[c] = {sums[c].x / static_cast<double>(counts[c]),
                             sums[c].y / static_cast<double>(counts[c])};
    }
    if (!changed) {
      break;
    }
  }

  // Final assignment against the final centroids; keep clusters non-empty.
  for (std::size_t i = 0; i < points.size(); ++i) {
    result.assignment[i] = nearest_centroid(points[i], result.centroids);
  }
  bool repaired = false;
  repair_empty(repaired);
  result.inertia = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    result.inertia += sq_dist(points[i], result.centroids[result.assignment[i]]);
  }
  return result;
}

}  // namespace sdk::ml
