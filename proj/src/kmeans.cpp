#include "eyectl/kmeans.hpp"

#include <limits>
#include <random>
#include <string>

#include "eyectl/error.hpp"

namespace eyectl {

namespace {

double sq_dist(const Point2& a, const Point2& b) {
  const double dx = a.x - b.x, dy = a.y - b.y;
  return dx * dx + dy * dy;
}

double unit_draw(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

int nearest(const Point2& p, const std::vector<Point2>& centroids) {
  int best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < centroids.size(); ++c) {
    const double d = sq_dist(p, centroids[c]);
    if (d < best_d) {
      best_d = d;
      best = static_cast<int>(c);
    }
  }
  return best;
}

}  // namespace

KMeansResult kmeans(std::span<const Point2> points, int k, std::uint64_t seed, int max_iterations) {
  if (k < 1 || points.size() < static_cast<std::size_t>(k)) {
    throw TooFewPoints("k-means needs at least k=" + std::to_string(k) + " points, got " + std::to_string(points.size()));
  }
  const std::size_t n = points.size();
  std::mt19937_64 rng(seed);
  std::vector<Point2> centroids;
  std::vector<bool> chosen(n, false);
  std::size_t first = static_cast<std::size_t>(rng() % n);
  centroids.push_back(points[first]);
  chosen[first] = true;
  std::vector<double> d2(n);
  for (std::size_t i = 0; i < n; ++i) d2[i] = sq_dist(points[i], centroids[0]);
  while (centroids.size() < static_cast<std::size_t>(k)) {
    double total = 0.0;
    for (double d : d2) total += d;
    std::size_t pick = n;
    if (total > 0.0) {
      const double r = unit_draw(rng) * total;
      double acc = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        acc += d2[i];
        if (d2[i] > 0.0 && acc > r) {
          pick = i;
          break;
        }
      }
      if (pick == n) {
        for (std::size_t i = n; i-- > 0;) {
          if (d2[i] > 0.0) {
            pick = i;
            break;
          }
        }
      }
    } else {
      for (std::size_t i = 0; i < n; ++i) {
        if (!chosen[i]) {
          pick = i;
          break;
        }
      }
    }
    chosen[pick] = true;
    centroids.push_back(points[pick]);
    for (std::size_t i = 0; i < n; ++i) d2[i] = std::min(d2[i], sq_dist(points[i], centroids.back()));
  }

  KMeansResult res;
  res.assignments.assign(n, -1);
  for (int it = 0; it < max_iterations; ++it) {
    bool changed = false;
    for (std::size_t i = 0; i < n; ++i) {
      const int c = nearest(points[i], centroids);
      if (c != res.assignments[i]) {
        res.assignments[i] = c;
        changed = true;
      }
    }
    res.iterations = it + 1;
    if (!changed) break;
    std::vector<Point2> sums(k);
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t i = 0; i < n; ++i) {
      sums[res.assignments[i]].x += points[i].x;
      sums[res.assignments[i]].y += points[i].y;
      ++counts[res.assignments[i]];
    }
    for (int c = 0; c < k; ++c) {
      if (counts[c] > 0) centroids[c] = {sums[c].x / counts[c], sums[c].y / counts[c]};
    }
  }
  res.centroids = std::move(centroids);
  res.sizes.assign(k, 0);
  for (int a : res.assignments) ++res.sizes[a];
  return res;
}

}  // namespace eyectl
