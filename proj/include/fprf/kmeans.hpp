#pragma once

#include <cstdint>
#include <vector>

#include "fprf/tensor.hpp"

namespace fprf {

struct KMeansResult {
  Tensor centroids;                  // [k x C]
  std::vector<uint32_t> assignments;  // [n]
  std::vector<Real> inertia;         // after each assignment step
  int iterations = 0;
};

// Lloyd's algorithm with k-means++ seeding. Deterministic for fixed
// (points, k, seed). Ties go to the lowest centroid index. An empty cluster is
// re-seeded with the point farthest from its assigned centroid.
KMeansResult kmeans(const Tensor& points, size_t k, uint64_t seed, int max_iter = 100);

Real squared_distance(const Real* a, const Real* b, size_t n);

}  // namespace fprf
