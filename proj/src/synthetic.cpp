#include "fprf/synthetic.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "fprf/error.hpp"
#include "fprf/parallel.hpp"
#include "fprf/rng.hpp"

namespace fprf {

namespace {

SyntheticObject sphere(Vec3 c, double r, Vec3 albedo, uint8_t region) {
  return {ShapeKind::Sphere, c, Vec3::Constant(r), albedo, region};
}

SyntheticObject box(Vec3 c, Vec3 half, Vec3 albedo, uint8_t region) { return {ShapeKind::Box, c, half, albedo, region}; }

std::optional<SurfaceHit> hit_sphere(const SyntheticObject& o, const Vec3& origin, const Vec3& dir) {
  const Vec3 oc = origin - o.center;
  const double r = o.size[0];
  const double b = oc.dot(dir);
  const double c = oc.squaredNorm() - r * r;
  const double disc = b * b - c;
  if (disc < 0.0) return std::nullopt;
  const double s = std::sqrt(disc);
  double t = -b - s;
  if (t <= 0.0) t = -b + s;
  if (t <= 0.0) return std::nullopt;
  SurfaceHit h;
  h.t = t;
  h.normal = (origin + t * dir - o.center) / r;
  return h;
}

std::optional<SurfaceHit> hit_box(const SyntheticObject& o, const Vec3& origin, const Vec3& dir) {
  double t0 = -std::numeric_limits<double>::infinity(), t1 = std::numeric_limits<double>::infinity();
  int axis0 = 0;
  double sign0 = 1.0;
  for (int a = 0; a < 3; ++a) {
    const double lo = o.center[a] - o.size[a], hi = o.center[a] + o.size[a];
    if (dir[a] == 0.0) {
      if (origin[a] < lo || origin[a] > hi) return std::nullopt;
      continue;
    }
    double ta = (lo - origin[a]) / dir[a], tb = (hi - origin[a]) / dir[a];
    double s = -1.0;  // entering through the low face
    if (ta > tb) {
      std::swap(ta, tb);
      s = 1.0;
    }
    if (ta > t0) {
      t0 = ta;
      axis0 = a;
      sign0 = s;
    }
    t1 = std::min(t1, tb);
  }
  if (t0 > t1 || t0 <= 0.0) return std::nullopt;
  SurfaceHit h;
  h.t = t0;
  h.normal = Vec3::Zero();
  h.normal[axis0] = sign0;
  return h;
}

}  // namespace

SyntheticSceneSpec SyntheticSceneSpec::toy(uint64_t seed) {
  SyntheticSceneSpec s;
  s.seed = seed;
  s.objects = {sphere(Vec3(-0.35, 0.1, -0.3), 0.38, Vec3(0.85, 0.25, 0.2), 1),
               box(Vec3(0.4, 0.15, 0.0), Vec3(0.3, 0.3, 0.3), Vec3(0.2, 0.7, 0.3), 2),
               sphere(Vec3(-0.1, 0.2, 0.5), 0.28, Vec3(0.25, 0.35, 0.9), 3)};
  return s;
}

SyntheticSceneSpec SyntheticSceneSpec::two_region(uint64_t seed) {
  SyntheticSceneSpec s;
  s.seed = seed;
  s.objects = {sphere(Vec3(-0.42, 0.0, 0.0), 0.38, Vec3(0.75, 0.7, 0.65), 1),
               box(Vec3(0.42, 0.0, 0.0), Vec3(0.3, 0.3, 0.3), Vec3(0.6, 0.65, 0.7), 2)};
  return s;
}

SyntheticSceneSpec SyntheticSceneSpec::street(uint64_t seed) {
  SyntheticSceneSpec s;
  s.seed = seed;
  s.aabb.min = Vec3(-2.0, -1.0, -2.0);
  s.aabb.max = Vec3(2.0, 1.0, 2.0);
  s.orbit_radius = 5.5;
  s.objects = {box(Vec3(-1.2, 0.3, -1.2), Vec3(0.4, 0.6, 0.4), Vec3(0.7, 0.6, 0.5), 1),
               box(Vec3(1.2, 0.4, -1.0), Vec3(0.5, 0.5, 0.5), Vec3(0.5, 0.55, 0.7), 2),
               sphere(Vec3(0.0, 0.5, 0.0), 0.45, Vec3(0.3, 0.65, 0.35), 3),
               box(Vec3(-1.0, 0.5, 1.3), Vec3(0.5, 0.4, 0.4), Vec3(0.8, 0.4, 0.3), 4),
               sphere(Vec3(1.2, 0.55, 1.2), 0.4, Vec3(0.9, 0.8, 0.3), 5)};
  return s;
}

SyntheticSceneSpec SyntheticSceneSpec::preset(const std::string& name, uint64_t seed) {
  if (name == "toy") return toy(seed);
  if (name == "two_region") return two_region(seed);
  if (name == "street") return street(seed);
  fail(ErrorKind::Config, "unknown scene preset '" + name + "' (toy|two_region|street)");
}

void SyntheticSceneSpec::validate() const {
  require(!objects.empty(), ErrorKind::Config, "synthetic scene has no objects");
  require((aabb.max.array() > aabb.min.array()).all(), ErrorKind::Config, "synthetic scene box is empty");
  require(light_dir.norm() > 0.0, ErrorKind::Config, "light direction is zero");
  require(ambient >= 0.0 && ambient <= 1.0, ErrorKind::Config, "ambient must be in [0, 1]");
  require(fov_deg > 1.0 && fov_deg < 170.0, ErrorKind::Config, "field of view out of range");
  std::vector<bool> seen(kMaxRegionIds, false);
  for (const SyntheticObject& o : objects) {
    require(o.region >= 1 && o.region < kMaxRegionIds, ErrorKind::Config, "region IDs must be in [1, 31]");
    seen[o.region] = true;
    require((o.size.array() > 0.0).all(), ErrorKind::Config, "object sizes must be positive");
    require(((o.center - o.size).array() >= aabb.min.array()).all() &&
                ((o.center + o.size).array() <= aabb.max.array()).all(),
            ErrorKind::Config, "object extends outside the scene box");
  }
  size_t max_id = 0;
  for (size_t i = 0; i < seen.size(); ++i)
    if (seen[i]) max_id = i;
  for (size_t i = 1; i <= max_id; ++i) require(seen[i], ErrorKind::Config, "region IDs must be dense from 1");
  const double half_diag = 0.5 * aabb.diagonal();
  require(orbit_radius > half_diag, ErrorKind::Config, "cameras must orbit outside the scene box");
}

std::optional<SurfaceHit> trace_scene(const SyntheticSceneSpec& spec, const Vec3& origin, const Vec3& dir) {
  std::optional<SurfaceHit> best;
  for (size_t i = 0; i < spec.objects.size(); ++i) {
    const SyntheticObject& o = spec.objects[i];
    auto h = o.shape == ShapeKind::Sphere ? hit_sphere(o, origin, dir) : hit_box(o, origin, dir);
    if (h && (!best || h->t < best->t)) {
      h->object = i;
      best = h;
    }
  }
  return best;
}

Vec3 shade(const SyntheticSceneSpec& spec, const SurfaceHit& hit) {
  const Vec3 l = spec.light_dir.normalized();
  const double lambert = std::max(0.0, hit.normal.dot(l));
  return spec.objects[hit.object].albedo * (spec.ambient + (1.0 - spec.ambient) * lambert);
}

std::vector<CameraModel> orbit_cameras(const SyntheticSceneSpec& spec, size_t n_views, size_t width, size_t height) {
  require(width >= 1 && height >= 1, ErrorKind::Config, "image size must be positive");
  Rng rng(mix_seed(spec.seed, 0xca11));
  const Vec3 target = 0.5 * (spec.aabb.min + spec.aabb.max);
  const double focal = 0.5 * static_cast<double>(width) / std::tan(0.5 * spec.fov_deg * std::numbers::pi / 180.0);
  const double half_diag = 0.5 * spec.aabb.diagonal();
  const double phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
  std::vector<CameraModel> cams;
  for (size_t i = 0; i < n_views; ++i) {
    const double az = phase + 2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n_views) +
                      rng.uniform(-0.05, 0.05);
    const double el = rng.uniform(spec.elevation_min_deg, spec.elevation_max_deg) * std::numbers::pi / 180.0;
    // -y is up in world space, matching the camera frame.
    const Vec3 eye = target + spec.orbit_radius * Vec3(std::cos(el) * std::cos(az), -std::sin(el),
                                                       std::cos(el) * std::sin(az));
    CameraModel c;
    c.fx = c.fy = focal;
    c.cx = 0.5 * static_cast<double>(width);
    c.cy = 0.5 * static_cast<double>(height);
    c.width = width;
    c.height = height;
    c.camera_to_world = look_at(eye, target, Vec3(0.0, -1.0, 0.0));
    c.near = std::max(0.05, spec.orbit_radius - half_diag);
    c.far = spec.orbit_radius + half_diag;
    cams.push_back(c);
  }
  return cams;
}

View render_synthetic_view(const SyntheticSceneSpec& spec, const CameraModel& camera) {
  const size_t h = camera.height, w = camera.width;
  View v;
  v.camera = camera;
  v.image = Tensor({h, w, 3});
  Tensor depth({h, w});
  LabelMap labels{h, w, std::vector<uint8_t>(h * w, 0)};
  parallel_for(h, [&](size_t row) {
    for (size_t col = 0; col < w; ++col) {
      const Ray ray = generate_ray(camera, col, row);
      const auto hit = trace_scene(spec, ray.origin, ray.dir);
      if (!hit) continue;
      const Vec3 c = shade(spec, *hit);
      const size_t p = row * w + col;
      for (int a = 0; a < 3; ++a) v.image[p * 3 + a] = std::round(std::clamp(c[a], 0.0, 1.0) * 255.0) / 255.0;
      depth[p] = hit->t;
      labels.ids[p] = spec.objects[hit->object].region;
    }
  });
  round_to_storage(depth);
  v.depth = std::move(depth);
  v.labels = std::move(labels);
  return v;
}

SceneDataset generate_synthetic_scene(const SyntheticSceneSpec& spec, size_t n_views, size_t width, size_t height) {
  spec.validate();
  require(n_views >= 2, ErrorKind::Config, "a synthetic scene needs at least 2 views");
  SceneDataset ds;
  ds.aabb = spec.aabb;
  for (const CameraModel& cam : orbit_cameras(spec, n_views, width, height))
    ds.views.push_back(render_synthetic_view(spec, cam));
  return ds;
}

}  // namespace fprf
