#include "fprf/kmeans.hpp"

#include <limits>

#include "fprf/error.hpp"
#include "fprf/rng.hpp"

namespace fprf {

Real squared_distance(const Real* a, const Real* b, size_t n) {
  Real s = 0.0;
  for (size_t i = 0; i < n; ++i) {
    const Real d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

namespace {

Tensor seed_plus_plus(const Tensor& points, size_t k, Rng& rng) {
  const size_t n = points.rows(), c = points.cols();
  Tensor centroids({k, c});
  std::vector<Real> d2(n, std::numeric_limits<Real>::infinity());
  size_t pick = rng.below(n);
  for (size_t j = 0; j < k; ++j) {
    std::copy_n(points.data() + pick * c, c, centroids.data() + j * c);
    if (j + 1 == k) break;
    Real total = 0.0;
    for (size_t i = 0; i < n; ++i) {
      d2[i] = std::min(d2[i], squared_distance(points.data() + i * c, centroids.data() + j * c, c));
      total += d2[i];
    }
    if (total <= 0.0) {
      // Every point coincides with a chosen centroid; fall back to index order.
      pick = (pick + 1) % n;
      continue;
    }
    const Real target = rng.uniform() * total;
    Real acc = 0.0;
    pick = n - 1;
    for (size_t i = 0; i < n; ++i) {
      acc += d2[i];
      if (acc > target && d2[i] > 0.0) {
        pick = i;
        break;
      }
    }
  }
  return centroids;
}

Real assign(const Tensor& points, const Tensor& centroids, std::vector<uint32_t>& assignments,
            std::vector<Real>& dist) {
  const size_t n = points.rows(), c = points.cols(), k = centroids.rows();
  Real inertia = 0.0;
  for (size_t i = 0; i < n; ++i) {
    Real best = std::numeric_limits<Real>::infinity();
    uint32_t arg = 0;
    for (size_t j = 0; j < k; ++j) {
      const Real d = squared_distance(points.data() + i * c, centroids.data() + j * c, c);
      if (d < best) {
        best = d;
        arg = static_cast<uint32_t>(j);
      }
    }
    assignments[i] = arg;
    dist[i] = best;
    inertia += best;
  }
  return inertia;
}

}  // namespace

KMeansResult kmeans(const Tensor& points, size_t k, uint64_t seed, int max_iter) {
  require(k >= 1, ErrorKind::Domain, "kmeans needs k >= 1");
  const size_t n = points.rows(), c = points.cols();
  require(n >= k, ErrorKind::Domain,
          "kmeans needs at least k points (n=" + std::to_string(n) + ", k=" + std::to_string(k) + ")");
  Rng rng(seed);
  KMeansResult res;
  res.centroids = seed_plus_plus(points, k, rng);
  res.assignments.assign(n, 0);
  std::vector<Real> dist(n);
  std::vector<uint32_t> previous;

  for (int it = 0; it < std::max(1, max_iter); ++it) {
    res.inertia.push_back(assign(points, res.centroids, res.assignments, dist));
    res.iterations = it + 1;
    if (res.assignments == previous || it + 1 >= max_iter) break;
    previous = res.assignments;

    Tensor sums({k, c});
    std::vector<size_t> counts(k, 0);
    for (size_t i = 0; i < n; ++i) {
      const uint32_t j = res.assignments[i];
      ++counts[j];
      for (size_t d = 0; d < c; ++d) sums[j * c + d] += points[i * c + d];
    }
    for (size_t j = 0; j < k; ++j) {
      if (counts[j] == 0) continue;
      for (size_t d = 0; d < c; ++d) res.centroids[j * c + d] = sums[j * c + d] / static_cast<Real>(counts[j]);
    }
    for (size_t j = 0; j < k; ++j) {
      if (counts[j] != 0) continue;
      size_t far = 0;
      for (size_t i = 1; i < n; ++i)
        if (dist[i] > dist[far]) far = i;
      std::copy_n(points.data() + far * c, c, res.centroids.data() + j * c);
      dist[far] = 0.0;
      previous.clear();
    }
  }
  return res;
}

}  // namespace fprf
