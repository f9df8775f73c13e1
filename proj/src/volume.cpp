#include "fprf/volume.hpp"

#include <algorithm>
#include <cmath>

#include "fprf/error.hpp"
#include "fprf/rng.hpp"

namespace fprf {

RaySamples sample_along_ray(const Ray& ray, size_t k, bool stratified, uint64_t seed) {
  require(k >= 1, ErrorKind::Domain, "need at least one sample per ray");
  require(ray.t_far > ray.t_near, ErrorKind::Domain, "ray interval is empty");
  RaySamples s;
  s.t.resize(k);
  s.delta.resize(k);
  s.points.resize(k);
  const Real span = ray.t_far - ray.t_near;
  const Real bin = span / static_cast<Real>(k);
  Rng rng(seed);
  for (size_t i = 0; i < k; ++i) {
    const Real lo = ray.t_near + bin * static_cast<Real>(i);
    Real frac = 0.5;
    if (stratified) {
      frac = rng.uniform();
      // keep samples strictly increasing and strictly inside the bin
      frac = std::clamp(frac, 1e-6, 1.0 - 1e-6);
    }
    s.t[i] = lo + frac * bin;
  }
  for (size_t i = 0; i + 1 < k; ++i) s.delta[i] = s.t[i + 1] - s.t[i];
  s.delta[k - 1] = ray.t_far - (ray.t_near + bin * static_cast<Real>(k - 1));
  for (size_t i = 0; i < k; ++i) s.points[i] = ray.origin + s.t[i] * ray.dir;
  return s;
}

RenderWeights compute_weights(std::span<const Real> sigmas, std::span<const Real> deltas) {
  require(sigmas.size() == deltas.size(), ErrorKind::Dimension, "sigma and delta lengths differ");
  const size_t k = sigmas.size();
  RenderWeights w;
  w.weights.resize(k);
  w.transmittance.resize(k + 1);
  Real optical = 0.0;
  w.transmittance[0] = 1.0;
  for (size_t i = 0; i < k; ++i) {
    require(sigmas[i] >= 0.0, ErrorKind::Domain, "negative density");
    require(deltas[i] > 0.0, ErrorKind::Domain, "non-positive sample spacing");
    const Real tau = sigmas[i] * deltas[i];
    w.weights[i] = w.transmittance[i] * -std::expm1(-tau);
    optical += tau;
    w.transmittance[i + 1] = std::exp(-optical);
  }
  return w;
}

std::vector<Real> accumulate(const Tensor& values, const RenderWeights& w) {
  const size_t c = values.cols();
  std::vector<Real> out(c, 0.0);
  const size_t k = std::min(values.rows(), w.weights.size());
  for (size_t i = 0; i < k; ++i) {
    const Real wi = w.weights[i];
    const Real* v = values.data() + i * c;
    for (size_t j = 0; j < c; ++j) out[j] += wi * v[j];
  }
  return out;
}

void accumulate_sigma_grad(const Tensor& values, const RenderWeights& w, std::span<const Real> deltas,
                           std::span<const Real> grad_out, std::span<Real> grad_sigma) {
  const size_t c = values.cols();
  const size_t k = values.rows();
  // dL/dsigma_k = delta_k (T_{k+1} v_k.g - sum_{i>k} w_i v_i.g)
  Real suffix = 0.0;
  for (size_t i = k; i-- > 0;) {
    const Real* v = values.data() + i * c;
    Real vg = 0.0;
    for (size_t j = 0; j < c; ++j) vg += v[j] * grad_out[j];
    grad_sigma[i] += deltas[i] * (w.transmittance[i + 1] * vg - suffix);
    suffix += w.weights[i] * vg;
  }
}

VolumeRenderResult volume_render(const Tensor& values, std::span<const Real> sigmas, std::span<const Real> deltas) {
  require(values.rows() == sigmas.size(), ErrorKind::Dimension, "value rows must match sample count");
  const RenderWeights w = compute_weights(sigmas, deltas);
  return {accumulate(values, w), w.weights, w.transmittance_end()};
}

VolumeRenderGrads volume_render_backward(const Tensor& values, std::span<const Real> sigmas,
                                         std::span<const Real> deltas, std::span<const Real> grad_out) {
  require(values.rows() == sigmas.size(), ErrorKind::Dimension, "value rows must match sample count");
  require(grad_out.size() == values.cols(), ErrorKind::Dimension, "output gradient width mismatch");
  const RenderWeights w = compute_weights(sigmas, deltas);
  VolumeRenderGrads g{Tensor::zeros_like(values), std::vector<Real>(sigmas.size(), 0.0)};
  const size_t c = values.cols();
  for (size_t i = 0; i < values.rows(); ++i)
    for (size_t j = 0; j < c; ++j) g.values[i * c + j] = w.weights[i] * grad_out[j];
  accumulate_sigma_grad(values, w, deltas, grad_out, g.sigmas);
  return g;
}

DepthEstimate render_depth(std::span<const Real> weights, std::span<const Real> t) {
  Real sw = 0.0, swt = 0.0;
  for (size_t i = 0; i < weights.size(); ++i) {
    sw += weights[i];
    swt += weights[i] * t[i];
  }
  DepthEstimate d;
  d.valid = sw >= kMinOpacityForDepth;
  d.depth = swt / std::max(sw, 1e-12);
  return d;
}

}  // namespace fprf
