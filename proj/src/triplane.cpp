#include "fprf/triplane.hpp"

#include <algorithm>
#include <cmath>

#include "fprf/error.hpp"
#include "fprf/rng.hpp"

namespace fprf {

TriPlaneGrid TriPlaneGrid::zeros_like() const {
  TriPlaneGrid g;
  g.resolution = resolution;
  g.channels = channels;
  g.xy = Tensor::zeros_like(xy);
  g.xz = Tensor::zeros_like(xz);
  g.yz = Tensor::zeros_like(yz);
  return g;
}

TriPlaneGrid make_constant_triplane(std::array<size_t, 3> res, size_t channels, Real value) {
  for (size_t r : res) require(r >= 2, ErrorKind::Domain, "tri-plane resolution must be >= 2 per axis");
  require(channels >= 1, ErrorKind::Domain, "tri-plane needs at least one channel");
  TriPlaneGrid g;
  g.resolution = res;
  g.channels = channels;
  g.xy = Tensor({res[0], res[1], channels}, value);
  g.xz = Tensor({res[0], res[2], channels}, value);
  g.yz = Tensor({res[1], res[2], channels}, value);
  return g;
}

TriPlaneGrid make_triplane(std::array<size_t, 3> res, size_t channels, uint64_t seed, Real lo, Real hi) {
  TriPlaneGrid g = make_constant_triplane(res, channels, 0.0);
  Rng rng(seed);
  for (Tensor* t : g.tensors())
    for (auto& v : t->vec()) v = rng.uniform(lo, hi);
  return g;
}

namespace {

struct AxisTap {
  size_t i0, i1;
  Real t;
};

AxisTap axis_tap(Real u, size_t res) {
  const Real f = u * static_cast<Real>(res - 1);
  size_t i0 = static_cast<size_t>(std::floor(f));
  if (i0 >= res - 1) i0 = res - 2;
  return {i0, i0 + 1, f - static_cast<Real>(i0)};
}

}  // namespace

PlaneFootprint triplane_footprint(const TriPlaneGrid& grid, const Vec3& x) {
  for (int a = 0; a < 3; ++a) {
    require(x[a] >= 0.0 && x[a] <= 1.0, ErrorKind::Domain,
            "tri-plane coordinate out of [0,1]: axis " + std::to_string(a) + " = " + std::to_string(x[a]));
  }
  const size_t c = grid.channels;
  const std::array<AxisTap, 3> tap{axis_tap(x[0], grid.resolution[0]), axis_tap(x[1], grid.resolution[1]),
                                   axis_tap(x[2], grid.resolution[2])};
  // plane p spans axes (first[p], second[p]) with the second axis contiguous.
  constexpr int first[3] = {0, 0, 1};
  constexpr int second[3] = {1, 2, 2};
  PlaneFootprint fp;
  for (int p = 0; p < 3; ++p) {
    const AxisTap& a = tap[first[p]];
    const AxisTap& b = tap[second[p]];
    const size_t nb = grid.resolution[second[p]];
    fp.offset[p] = {(a.i0 * nb + b.i0) * c, (a.i0 * nb + b.i1) * c, (a.i1 * nb + b.i0) * c, (a.i1 * nb + b.i1) * c};
    fp.weight[p] = {(1 - a.t) * (1 - b.t), (1 - a.t) * b.t, a.t * (1 - b.t), a.t * b.t};
  }
  return fp;
}

namespace {

inline void plane_value(const Tensor& plane, const PlaneFootprint& fp, int p, size_t c, Real* out) {
  const Real* d = plane.data();
  const auto& o = fp.offset[p];
  const auto& w = fp.weight[p];
  for (size_t k = 0; k < c; ++k)
    out[k] = w[0] * d[o[0] + k] + w[1] * d[o[1] + k] + w[2] * d[o[2] + k] + w[3] * d[o[3] + k];
}

}  // namespace

void triplane_sample(const TriPlaneGrid& grid, const Vec3& x_unit, Real* out) {
  const PlaneFootprint fp = triplane_footprint(grid, x_unit);
  const size_t c = grid.channels;
  Real b[64], d[64];
  std::vector<Real> heap;
  Real* bp = b;
  Real* dp = d;
  if (c > 64) {
    heap.resize(2 * c);
    bp = heap.data();
    dp = heap.data() + c;
  }
  plane_value(grid.xy, fp, 0, c, out);
  plane_value(grid.xz, fp, 1, c, bp);
  plane_value(grid.yz, fp, 2, c, dp);
  for (size_t k = 0; k < c; ++k) out[k] = out[k] * bp[k] * dp[k];
}

std::vector<Real> triplane_sample(const TriPlaneGrid& grid, const Vec3& x_unit) {
  std::vector<Real> out(grid.channels);
  triplane_sample(grid, x_unit, out.data());
  return out;
}

void triplane_sample_backward(const TriPlaneGrid& grid, const Vec3& x_unit, const Real* grad_out,
                              TriPlaneGrid& grad_grid, Real scale) {
  const PlaneFootprint fp = triplane_footprint(grid, x_unit);
  const size_t c = grid.channels;
  std::vector<Real> vals(3 * c);
  plane_value(grid.xy, fp, 0, c, vals.data());
  plane_value(grid.xz, fp, 1, c, vals.data() + c);
  plane_value(grid.yz, fp, 2, c, vals.data() + 2 * c);
  Tensor* planes[3] = {&grad_grid.xy, &grad_grid.xz, &grad_grid.yz};
  for (int p = 0; p < 3; ++p) {
    const Real* other1 = vals.data() + ((p + 1) % 3) * c;
    const Real* other2 = vals.data() + ((p + 2) % 3) * c;
    Real* g = planes[p]->data();
    for (size_t k = 0; k < c; ++k) {
      const Real gp = scale * grad_out[k] * other1[k] * other2[k];
      if (gp == 0.0) continue;
      for (int corner = 0; corner < 4; ++corner) g[fp.offset[p][corner] + k] += fp.weight[p][corner] * gp;
    }
  }
}

}  // namespace fprf
