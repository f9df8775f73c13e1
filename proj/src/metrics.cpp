#include "fprf/metrics.hpp"

#include <cmath>

#include "fprf/error.hpp"
#include "fprf/imgproc.hpp"
#include "fprf/parallel.hpp"

namespace fprf {

Real mse(const Tensor& a, const Tensor& b) {
  require(a.shape() == b.shape(), ErrorKind::Dimension,
          "image shapes differ: " + shape_string(a.shape()) + " vs " + shape_string(b.shape()));
  require(!a.empty(), ErrorKind::Dimension, "images are empty");
  Real s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    const Real d = a[i] - b[i];
    s += d * d;
  }
  return s / static_cast<Real>(a.size());
}

Real psnr(const Tensor& a, const Tensor& b) {
  const Real m = mse(a, b);
  if (m == 0.0) return kPsnrIdentical;
  return 10.0 * std::log10(1.0 / m);
}

Real default_warp_tau(Real aabb_diagonal) { return 0.01 * aabb_diagonal; }

WarpResult warp_image(const Tensor& src_image, const Tensor& src_depth, const CameraModel& src_camera,
                      const Tensor& target_depth, const CameraModel& target_camera, Real tau) {
  require(src_image.rank() == 3, ErrorKind::Dimension, "source image must be [H x W x C]");
  const size_t sh = src_image.dim(0), sw = src_image.dim(1), c = src_image.dim(2);
  require(src_depth.size() == sh * sw, ErrorKind::Data, "source depth is missing or has the wrong size");
  require(src_camera.height == sh && src_camera.width == sw, ErrorKind::Dimension, "source camera size mismatch");
  const size_t th = target_camera.height, tw = target_camera.width;
  require(target_depth.size() == th * tw, ErrorKind::Data, "target depth is missing or has the wrong size");
  require(tau > 0.0, ErrorKind::Domain, "warp tolerance must be positive");

  WarpResult r;
  r.image = Tensor({th, tw, c});
  r.mask.assign(th * tw, 0);
  const Vec3 src_center = src_camera.center();
  parallel_for(th, [&](size_t row) {
    for (size_t col = 0; col < tw; ++col) {
      const size_t p = row * tw + col;
      const Real d = target_depth[p];
      if (!(d > 0.0)) continue;
      const Ray ray = generate_ray(target_camera, col, row);
      const Vec3 x = ray.origin + d * ray.dir;
      CameraModel::Projection pr = src_camera.project(x);
      if (!(pr.z > 0.0)) continue;
      // Round-off must not pull a neighbouring tap into an exact pixel hit.
      if (std::abs(pr.x - std::round(pr.x)) < 1e-9) pr.x = std::round(pr.x);
      if (std::abs(pr.y - std::round(pr.y)) < 1e-9) pr.y = std::round(pr.y);
      if (pr.x < 0.0 || pr.y < 0.0 || pr.x > static_cast<Real>(sw - 1) || pr.y > static_cast<Real>(sh - 1)) continue;
      const Real dist = (x - src_center).norm();
      // Source depth at the projection, interpolated over the taps that carry weight.
      const size_t x0 = static_cast<size_t>(std::floor(pr.x)), y0 = static_cast<size_t>(std::floor(pr.y));
      const size_t x1 = std::min(x0 + 1, sw - 1), y1 = std::min(y0 + 1, sh - 1);
      const Real fx = pr.x - static_cast<Real>(x0), fy = pr.y - static_cast<Real>(y0);
      const Real wts[4] = {(1 - fx) * (1 - fy), fx * (1 - fy), (1 - fx) * fy, fx * fy};
      const size_t taps[4] = {y0 * sw + x0, y0 * sw + x1, y1 * sw + x0, y1 * sw + x1};
      bool ok = true;
      Real sd = 0.0;
      for (int k = 0; k < 4; ++k) {
        if (wts[k] == 0.0) continue;
        ok = ok && src_depth[taps[k]] > 0.0;
        sd += wts[k] * src_depth[taps[k]];
      }
      if (!ok || !(std::abs(sd - dist) < tau)) continue;
      sample_bilinear(src_image, pr.x, pr.y, r.image.data() + p * c);
      r.mask[p] = 1;
    }
  });
  for (uint8_t m : r.mask) r.valid += m;
  return r;
}

Real warp_error(const Tensor& target_image, const Tensor& src_image, const Tensor& target_depth,
                const Tensor& src_depth, const CameraModel& target_camera, const CameraModel& src_camera, Real tau) {
  const WarpResult w = warp_image(src_image, src_depth, src_camera, target_depth, target_camera, tau);
  require(target_image.shape() == w.image.shape(), ErrorKind::Dimension, "target image shape mismatch");
  require(w.valid > 0, ErrorKind::Data, "warp mask is empty; the warp error is undefined for this pair");
  const size_t c = target_image.dim(2);
  Real sum = 0.0;
  for (size_t p = 0; p < w.mask.size(); ++p) {
    if (!w.mask[p]) continue;
    Real e = 0.0;
    for (size_t a = 0; a < c; ++a) {
      const Real d = target_image[p * c + a] - w.image[p * c + a];
      e += d * d;
    }
    sum += e / static_cast<Real>(c);
  }
  return sum / static_cast<Real>(w.valid);
}

}  // namespace fprf
