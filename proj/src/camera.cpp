#include "fprf/camera.hpp"

#include <algorithm>
#include <cmath>

#include "fprf/error.hpp"

namespace fprf {

void CameraModel::validate() const {
  require(fx > 0.0 && fy > 0.0, ErrorKind::Domain, "camera focal lengths must be positive");
  require(width >= 1 && height >= 1, ErrorKind::Domain, "camera image size must be positive");
  require(near < far && near >= 0.0, ErrorKind::Domain, "camera needs 0 <= near < far");
  const Mat3 r = rotation();
  require((r.transpose() * r - Mat3::Identity()).cwiseAbs().maxCoeff() <= 1e-5, ErrorKind::Domain,
          "camera rotation is not orthonormal");
}

CameraModel::Projection CameraModel::project(const Vec3& world) const {
  const Vec3 p = rotation().transpose() * (world - center());
  return {fx * p[0] / p[2] + cx - 0.5, fy * p[1] / p[2] + cy - 0.5, p[2]};
}

Mat4 look_at(const Vec3& eye, const Vec3& target, const Vec3& up) {
  const Vec3 forward = (target - eye).normalized();
  const Vec3 right = forward.cross(up).normalized();
  const Vec3 down = forward.cross(right);
  Mat4 m = Mat4::Identity();
  m.block<3, 1>(0, 0) = right;
  m.block<3, 1>(0, 1) = down;
  m.block<3, 1>(0, 2) = forward;
  m.block<3, 1>(0, 3) = eye;
  return m;
}

Ray generate_ray(const CameraModel& cam, size_t u, size_t v) {
  require(u < cam.width && v < cam.height, ErrorKind::Domain,
          "pixel (" + std::to_string(u) + ", " + std::to_string(v) + ") outside the image");
  const Vec3 d_cam((static_cast<double>(u) + 0.5 - cam.cx) / cam.fx, (static_cast<double>(v) + 0.5 - cam.cy) / cam.fy,
                   1.0);
  Ray r;
  r.origin = cam.center();
  r.dir = (cam.rotation() * d_cam).normalized();
  r.u = u;
  r.v = v;
  r.t_near = cam.near;
  r.t_far = cam.far;
  return r;
}

std::vector<Ray> generate_rays(const CameraModel& cam, const std::vector<std::pair<size_t, size_t>>& pixels) {
  std::vector<Ray> rays;
  rays.reserve(pixels.size());
  for (const auto& [u, v] : pixels) rays.push_back(generate_ray(cam, u, v));
  return rays;
}

bool clip_ray_to_box(Ray& ray, const Aabb& box) {
  double t0 = ray.t_near, t1 = ray.t_far;
  for (int a = 0; a < 3; ++a) {
    const double inv = 1.0 / ray.dir[a];
    double lo = (box.min[a] - ray.origin[a]) * inv;
    double hi = (box.max[a] - ray.origin[a]) * inv;
    if (std::isnan(lo) || std::isnan(hi)) {
      // Ray parallel to the slab and on its boundary plane.
      if (ray.origin[a] < box.min[a] || ray.origin[a] > box.max[a]) return false;
      continue;
    }
    if (lo > hi) std::swap(lo, hi);
    t0 = std::max(t0, lo);
    t1 = std::min(t1, hi);
  }
  if (!(t1 > t0)) return false;
  ray.t_near = t0;
  ray.t_far = t1;
  return true;
}

}  // namespace fprf
