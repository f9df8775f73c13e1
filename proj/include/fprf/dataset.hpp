#pragma once

#include <optional>
#include <string>
#include <vector>

#include "fprf/camera.hpp"
#include "fprf/encoder.hpp"
#include "fprf/geometry.hpp"
#include "fprf/tensor.hpp"

namespace fprf {

struct View {
  Tensor image;  // [H x W x 3] in [0, 1]
  CameraModel camera;
  std::optional<LabelMap> labels;  // region IDs, 0 = background
  std::optional<Tensor> depth;     // [H x W] ray distance, 0 = no surface
};

// Directory layout:
//   images/NNNN.png      views
//   poses.json           {"frames": [{"c2w": [16 row-major], "fx", "fy", "cx", "cy",
//                                     "width", "height", "near", "far"}, ...]}
//   depth/NNNN.fpt       optional ray-distance depth, 0 where invalid
//   semantic/NNNN.png    optional region IDs in the red channel
//   meta.json            {"aabb": {"min": [x, y, z], "max": [x, y, z]}}
struct SceneDataset {
  std::vector<View> views;
  Aabb aabb;

  size_t height() const { return views.front().image.dim(0); }
  size_t width() const { return views.front().image.dim(1); }
  bool has_labels() const;
  bool has_depth() const;
  // Throws ErrorKind::Data describing the first violated invariant.
  void validate() const;
};

void save_dataset(const SceneDataset& dataset, const std::string& dir);
SceneDataset load_dataset(const std::string& dir);

// Checks a dataset directory without throwing; returns one message per problem.
std::vector<std::string> validate_dataset_dir(const std::string& dir);

// Views held out from training: every eighth view (index % 8 == 7).
bool is_holdout_view(size_t index);

std::string view_name(size_t index);  // "0007"

}  // namespace fprf
