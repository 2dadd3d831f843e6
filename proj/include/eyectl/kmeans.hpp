#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace eyectl {

struct Point2 {
  double x = 0.0;
  double y = 0.0;
  friend bool operator==(const Point2&, const Point2&) = default;
};

struct KMeansResult {
  std::vector<int> assignments;  // one cluster index per input point
  std::vector<Point2> centroids;
  std::vector<std::size_t> sizes;
  int iterations = 0;
};

/// Lloyd iterations from seeded k-means++ seeding, stopping when assignments repeat or after
/// `max_iterations`. Distance ties go to the lower cluster index; an emptied cluster keeps
/// its previous centroid. Throws TooFewPoints when points.size() < k or k < 1.
KMeansResult kmeans(std::span<const Point2> points, int k, std::uint64_t seed, int max_iterations = 100);

}  // namespace eyectl
