#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fprf/dataset.hpp"

namespace fprf {

enum class ShapeKind { Sphere, Box };

struct SyntheticObject {
  ShapeKind shape = ShapeKind::Sphere;
  Vec3 center = Vec3::Zero();
  Vec3 size = Vec3::Constant(0.3);  // sphere: radius in x; box: half extents
  Vec3 albedo = Vec3::Constant(0.8);
  uint8_t region = 1;
};

// Lambertian objects on a black background, lit by one directional light
// plus ambient. Cameras orbit the box center looking inwards.
struct SyntheticSceneSpec {
  uint64_t seed = 0;
  std::vector<SyntheticObject> objects;
  Aabb aabb;
  Vec3 light_dir = Vec3(-0.4, -0.8, 0.45);  // towards the light; world up is -y
  double ambient = 0.25;
  double orbit_radius = 3.2;
  double elevation_min_deg = 15.0, elevation_max_deg = 40.0;
  double fov_deg = 50.0;

  static SyntheticSceneSpec toy(uint64_t seed = 0);         // three objects
  static SyntheticSceneSpec two_region(uint64_t seed = 0);  // two objects, region IDs 1 and 2
  static SyntheticSceneSpec street(uint64_t seed = 0);      // elongated box for 2x1x2 blocks
  static SyntheticSceneSpec preset(const std::string& name, uint64_t seed);

  void validate() const;
};

struct SurfaceHit {
  double t = 0.0;
  size_t object = 0;
  Vec3 normal = Vec3::Zero();
};

// Nearest intersection along a unit ray.
std::optional<SurfaceHit> trace_scene(const SyntheticSceneSpec& spec, const Vec3& origin, const Vec3& dir);

// Shaded color of a hit (no shadows).
Vec3 shade(const SyntheticSceneSpec& spec, const SurfaceHit& hit);

std::vector<CameraModel> orbit_cameras(const SyntheticSceneSpec& spec, size_t n_views, size_t width, size_t height);

// Ground-truth render of one camera, images quantized to 8 bits and depths
// to 32-bit floats so the result survives a save/load round trip unchanged.
View render_synthetic_view(const SyntheticSceneSpec& spec, const CameraModel& camera);

SceneDataset generate_synthetic_scene(const SyntheticSceneSpec& spec, size_t n_views, size_t width, size_t height);

}  // namespace fprf
