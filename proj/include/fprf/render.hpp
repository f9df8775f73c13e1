#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "fprf/camera.hpp"
#include "fprf/decoder.hpp"
#include "fprf/field.hpp"
#include "fprf/volume.hpp"

namespace fprf {

enum class RenderMode { Color, ContentFeature, SemanticFeature, Depth };

std::string to_string(RenderMode mode);
RenderMode render_mode_from_string(const std::string& name);  // throws ErrorKind::Config

struct RenderOptions {
  size_t samples = 64;
  // Samples whose incoming transmittance is below this are not evaluated.
  // 0 disables early termination.
  Real early_stop = 1e-4;
  bool stratified = false;
  uint64_t seed = 0;
};

// Forward state of one ray through the content field. Only the first
// `active` samples are used for features, colors and weights.
struct RayTrace {
  bool hit = false;
  RaySamples samples;
  ContentSamples content;
  size_t active = 0;
  RenderWeights weights;  // over the active prefix
};

// Clips the ray to the scene box, samples it and evaluates density.
// Returns false (and leaves hit = false) when the ray misses the box.
bool trace_density(const ContentField& field, const Ray& ray, const RenderOptions& options, RayTrace& trace);

// Renders one image. Output shapes: Color [H x W x 3], ContentFeature
// [H x W x C_V], SemanticFeature [H x W x C_D], Depth [H x W x 1] (ray
// distance, 0 where invalid). Rays that miss the scene box render as zero.
Tensor render_image(const ContentField& content, const SemanticField* semantic, const CameraModel& camera,
                    RenderMode mode, const ColorDecoder* decoder, const RenderOptions& options = {});

// Depth and validity mask of a rendered view ([H x W], ray distance).
struct DepthMap {
  Tensor depth;
  std::vector<uint8_t> valid;
};
DepthMap render_depth_map(const ContentField& content, const CameraModel& camera, const RenderOptions& options = {});

}  // namespace fprf
