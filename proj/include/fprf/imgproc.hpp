#pragma once

#include "fprf/tensor.hpp"

namespace fprf {

// Image-shaped tensors are [H x W x C], row-major.

// Mean over the (2r+1)^2 window around each pixel, windows truncated at the
// image border (the divisor is the number of pixels actually covered).
Tensor box_mean(const Tensor& img, int radius);

// Adjoint of box_mean: returns J^T g.
Tensor box_mean_adjoint(const Tensor& grad, int radius);

// Channel mean, [H x W x C] -> [H x W x 1].
Tensor to_gray(const Tensor& img);

// Guided filter with a grayscale-reduced guide applied to every channel of
// `input`: a = cov(I,p)/(var(I)+eps), b = mean(p) - a mean(I),
// q = mean(a) I + mean(b).
Tensor guided_filter(const Tensor& guide, const Tensor& input, int radius, Real eps);

// For a fixed guide the filter is linear in `input`; this applies its adjoint.
Tensor guided_filter_adjoint(const Tensor& guide, const Tensor& grad_output, int radius, Real eps);

// Bilinear resampling of a stride-s feature map whose location (i, j) sits on
// pixel (s*i, s*j); pixel coordinates beyond the last location clamp.
Tensor upsample_bilinear(const Tensor& fmap, int stride, size_t out_h, size_t out_w);
Tensor upsample_bilinear_adjoint(const Tensor& grad, int stride, size_t in_h, size_t in_w);

// Bilinear sample of an [H x W x C] image at continuous pixel coordinates
// (x, y) measured in pixel-index units (pixel centers at integers), clamped.
void sample_bilinear(const Tensor& img, Real x, Real y, Real* out);

}  // namespace fprf
