#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "fprf/camera.hpp"
#include "fprf/tensor.hpp"

namespace fprf {

struct RaySamples {
  std::vector<Real> t;      // strictly increasing
  std::vector<Real> delta;  // t[i+1]-t[i]; last one runs to the lower edge of its bin's far cap
  std::vector<Vec3> points;
};

// K uniform bins over [ray.t_near, ray.t_far]. Deterministic mode takes bin
// midpoints; stratified mode draws one seeded jitter per bin. The last delta
// is t_far minus the lower edge of the last bin, so K = 1 gives t_far - t_near.
RaySamples sample_along_ray(const Ray& ray, size_t k, bool stratified, uint64_t seed);

struct RenderWeights {
  std::vector<Real> weights;        // T_i (1 - exp(-sigma_i delta_i))
  std::vector<Real> transmittance;  // T_i, K + 1 entries (last = after the final sample)
  Real transmittance_end() const { return transmittance.back(); }
};

RenderWeights compute_weights(std::span<const Real> sigmas, std::span<const Real> deltas);

// out = sum_i w_i value_i for values [K x C].
std::vector<Real> accumulate(const Tensor& values, const RenderWeights& w);

// dL/dsigma contribution of one value set given dL/dout.
void accumulate_sigma_grad(const Tensor& values, const RenderWeights& w, std::span<const Real> deltas,
                           std::span<const Real> grad_out, std::span<Real> grad_sigma);

struct VolumeRenderResult {
  std::vector<Real> out;
  std::vector<Real> weights;
  Real transmittance_end;
};

// Emission-absorption quadrature; identical for colors and features.
VolumeRenderResult volume_render(const Tensor& values, std::span<const Real> sigmas, std::span<const Real> deltas);

struct VolumeRenderGrads {
  Tensor values;            // [K x C]
  std::vector<Real> sigmas;  // [K]
};
VolumeRenderGrads volume_render_backward(const Tensor& values, std::span<const Real> sigmas,
                                         std::span<const Real> deltas, std::span<const Real> grad_out);

struct DepthEstimate {
  Real depth = 0.0;
  bool valid = false;
};

inline constexpr Real kMinOpacityForDepth = 0.01;

// Expected termination depth; invalid when the accumulated opacity is below
// kMinOpacityForDepth.
DepthEstimate render_depth(std::span<const Real> weights, std::span<const Real> t);

}  // namespace fprf
