#pragma once

#include <utility>
#include <vector>

#include "fprf/geometry.hpp"

namespace fprf {

// Pinhole camera. Camera frame: +x right, +y down, +z forward. Pixel (u, v)
// is sampled through its center (u + 0.5, v + 0.5).
struct CameraModel {
  double fx = 1.0, fy = 1.0, cx = 0.0, cy = 0.0;
  size_t width = 1, height = 1;
  Mat4 camera_to_world = Mat4::Identity();
  double near = 0.1, far = 10.0;

  void validate() const;
  Vec3 center() const { return camera_to_world.block<3, 1>(0, 3); }
  Mat3 rotation() const { return camera_to_world.block<3, 3>(0, 0); }

  // World point -> (pixel x, pixel y) in pixel-index units (center of pixel
  // u is at x = u) and camera-space depth z.
  struct Projection {
    double x, y, z;
  };
  Projection project(const Vec3& world) const;
};

// Look-at pose with the camera's +z towards target and -y towards up.
Mat4 look_at(const Vec3& eye, const Vec3& target, const Vec3& up);

struct Ray {
  Vec3 origin;
  Vec3 dir;  // unit
  size_t u = 0, v = 0;
  double t_near = 0.0, t_far = 1.0;
};

Ray generate_ray(const CameraModel& cam, size_t u, size_t v);
// pixels are (u, v) = (column, row). Throws ErrorKind::Domain when outside the image.
std::vector<Ray> generate_rays(const CameraModel& cam, const std::vector<std::pair<size_t, size_t>>& pixels);

// Intersects [t_near, t_far] with the box. Returns false when the ray misses.
bool clip_ray_to_box(Ray& ray, const Aabb& box);

}  // namespace fprf
