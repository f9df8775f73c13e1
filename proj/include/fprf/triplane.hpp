#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "fprf/geometry.hpp"
#include "fprf/tensor.hpp"

namespace fprf {

// Three axis-aligned feature planes. Resolution counts grid vertices per
// axis; a unit coordinate u maps to vertex coordinate u * (R - 1).
struct TriPlaneGrid {
  std::array<size_t, 3> resolution{};
  size_t channels = 0;
  Tensor xy;  // [Rx x Ry x C]
  Tensor xz;  // [Rx x Rz x C]
  Tensor yz;  // [Ry x Rz x C]

  std::vector<Tensor*> tensors() { return {&xy, &xz, &yz}; }
  std::vector<const Tensor*> tensors() const { return {&xy, &xz, &yz}; }
  TriPlaneGrid zeros_like() const;
};

// Values uniform in [lo, hi]; the default range sits around the identity of
// the elementwise product.
TriPlaneGrid make_triplane(std::array<size_t, 3> resolution, size_t channels, uint64_t seed, Real lo = 0.9,
                           Real hi = 1.1);
TriPlaneGrid make_constant_triplane(std::array<size_t, 3> resolution, size_t channels, Real value);

// Bilinear corner indices and weights on each plane for one query point.
struct PlaneFootprint {
  std::array<std::array<size_t, 4>, 3> offset;  // element offset of the channel-0 value per corner
  std::array<std::array<Real, 4>, 3> weight;
};

PlaneFootprint triplane_footprint(const TriPlaneGrid& grid, const Vec3& x_unit);

// Per-channel product of the three bilinearly sampled plane features.
// x_unit must lie in [0,1]^3 (ErrorKind::Domain otherwise).
void triplane_sample(const TriPlaneGrid& grid, const Vec3& x_unit, Real* out);
std::vector<Real> triplane_sample(const TriPlaneGrid& grid, const Vec3& x_unit);

// Accumulates scale * d(out . grad_out)/d(plane values) into grad_grid.
// Touches the 4 corners of each plane.
void triplane_sample_backward(const TriPlaneGrid& grid, const Vec3& x_unit, const Real* grad_out,
                              TriPlaneGrid& grad_grid, Real scale = 1.0);

}  // namespace fprf
