#include "fprf/render.hpp"

#include <algorithm>

#include "fprf/error.hpp"
#include "fprf/parallel.hpp"
#include "fprf/rng.hpp"

namespace fprf {

std::string to_string(RenderMode mode) {
  switch (mode) {
    case RenderMode::Color: return "color";
    case RenderMode::ContentFeature: return "content_feature";
    case RenderMode::SemanticFeature: return "semantic_feature";
    case RenderMode::Depth: return "depth";
  }
  return "?";
}

RenderMode render_mode_from_string(const std::string& name) {
  if (name == "color") return RenderMode::Color;
  if (name == "content_feature") return RenderMode::ContentFeature;
  if (name == "semantic_feature") return RenderMode::SemanticFeature;
  if (name == "depth") return RenderMode::Depth;
  fail(ErrorKind::Config, "unknown render mode '" + name + "' (color|content_feature|semantic_feature|depth)");
}

bool trace_density(const ContentField& field, const Ray& ray_in, const RenderOptions& options, RayTrace& trace) {
  trace.hit = false;
  trace.active = 0;
  Ray ray = ray_in;
  const Aabb& box = field.layout.scene;
  if (!clip_ray_to_box(ray, box)) return false;
  trace.samples = sample_along_ray(ray, options.samples, options.stratified, options.seed);
  for (Vec3& p : trace.samples.points) p = p.cwiseMax(box.min).cwiseMin(box.max);
  eval_content_density(field, trace.samples.points, trace.content);
  RenderWeights full = compute_weights(trace.content.sigma, trace.samples.delta);
  size_t n = options.samples;
  if (options.early_stop > 0.0) {
    for (size_t i = 0; i < n; ++i) {
      if (full.transmittance[i] < options.early_stop) {
        n = i;
        break;
      }
    }
  }
  full.weights.resize(n);
  full.transmittance.resize(n + 1);
  trace.weights = std::move(full);
  trace.active = n;
  trace.hit = true;
  return true;
}

namespace {

size_t channels_for(RenderMode mode, const ContentField& content, const SemanticField* semantic) {
  switch (mode) {
    case RenderMode::Color: return 3;
    case RenderMode::ContentFeature: return content.feature_dim();
    case RenderMode::SemanticFeature: return semantic->feature_dim();
    case RenderMode::Depth: return 1;
  }
  return 0;
}

}  // namespace

Tensor render_image(const ContentField& content, const SemanticField* semantic, const CameraModel& camera,
                    RenderMode mode, const ColorDecoder* decoder, const RenderOptions& options) {
  camera.validate();
  if (mode == RenderMode::Color) require(decoder != nullptr, ErrorKind::Config, "color rendering needs a decoder");
  if (mode == RenderMode::SemanticFeature)
    require(semantic != nullptr, ErrorKind::Config, "semantic rendering needs a semantic field");
  const size_t h = camera.height, w = camera.width;
  const size_t c = channels_for(mode, content, semantic);
  Tensor image({h, w, c});
  parallel_for(h, [&](size_t row) {
    RayTrace trace;
    SemanticSamples sem;
    for (size_t col = 0; col < w; ++col) {
      RenderOptions opt = options;
      opt.seed = mix_seed(options.seed, row * w + col);
      if (!trace_density(content, generate_ray(camera, col, row), opt, trace)) continue;
      Real* out = image.data() + (row * w + col) * c;
      const size_t n = trace.active;
      if (mode == RenderMode::Depth) {
        const DepthEstimate d = render_depth(trace.weights.weights, std::span(trace.samples.t).first(n));
        out[0] = d.valid ? d.depth : 0.0;
        continue;
      }
      if (n == 0) continue;
      Tensor values;
      if (mode == RenderMode::SemanticFeature) {
        eval_semantic(*semantic, std::span(trace.samples.points).first(n), sem);
        values = sem.features;
      } else {
        eval_content_features(content, generate_ray(camera, col, row).dir, n, trace.content);
        values = mode == RenderMode::Color ? decode_color(*decoder, trace.content.features) : trace.content.features;
      }
      const std::vector<Real> acc = accumulate(values, trace.weights);
      std::copy(acc.begin(), acc.end(), out);
    }
  });
  return image;
}

DepthMap render_depth_map(const ContentField& content, const CameraModel& camera, const RenderOptions& options) {
  Tensor d = render_image(content, nullptr, camera, RenderMode::Depth, nullptr, options);
  DepthMap m;
  m.valid.resize(camera.height * camera.width);
  for (size_t i = 0; i < m.valid.size(); ++i) m.valid[i] = d[i] > 0.0 ? 1 : 0;
  d.reshape({camera.height, camera.width});
  m.depth = std::move(d);
  return m;
}

}  // namespace fprf
