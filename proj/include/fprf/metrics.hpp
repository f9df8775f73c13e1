#pragma once

#include <cstdint>
#include <limits>
#include <vector>

#include "fprf/camera.hpp"
#include "fprf/tensor.hpp"

namespace fprf {

// Returned by psnr() for identical images.
inline constexpr Real kPsnrIdentical = std::numeric_limits<Real>::infinity();

Real mse(const Tensor& a, const Tensor& b);
// 10 log10(1 / MSE); kPsnrIdentical when MSE == 0.
Real psnr(const Tensor& a, const Tensor& b);

// Ray-distance depth map ([H x W]); values <= 0 mark pixels without a surface.
struct WarpResult {
  Tensor image;               // [H x W x C] in the target view, 0 where invalid
  std::vector<uint8_t> mask;  // [H x W]
  size_t valid = 0;
};

// Warps src_image into the target view. A target pixel is valid when its
// depth is valid, its surface point projects inside the source image, and
// the bilinearly sampled source depth agrees with the projected ray distance
// within tau.
WarpResult warp_image(const Tensor& src_image, const Tensor& src_depth, const CameraModel& src_camera,
                      const Tensor& target_depth, const CameraModel& target_camera, Real tau);

// Mean over valid pixels of the channel-averaged squared difference between
// target_image and the warped source. Throws ErrorKind::Data for an empty mask.
Real warp_error(const Tensor& target_image, const Tensor& src_image, const Tensor& target_depth,
                const Tensor& src_depth, const CameraModel& target_camera, const CameraModel& src_camera, Real tau);

Real default_warp_tau(Real aabb_diagonal);  // 0.01 * diagonal

}  // namespace fprf
