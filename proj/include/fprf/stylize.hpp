#pragma once

#include "fprf/decoder.hpp"
#include "fprf/field.hpp"
#include "fprf/render.hpp"
#include "fprf/style_dict.hpp"

namespace fprf {

// softmax_rows(F K^T / tau). tau = 1 is the plain dot product.
Tensor style_attention(const Tensor& semantic, const Tensor& keys, Real tau = 1.0);

struct StyleCodes {
  Tensor mean;  // [K x C_V]
  Tensor std;   // [K x C_V]
};

StyleCodes weighted_style_codes(const Tensor& attention, const Tensor& means, const Tensor& stds);
StyleCodes weighted_style_codes(const Tensor& attention, const StyleDictionary& dict);

// Per-row AdaIN with row-specific target statistics.
Tensor local_adain(const Tensor& features, const ContentStats& stats, const Tensor& mean_w, const Tensor& std_w);

struct StylizeOptions {
  RenderOptions render;
  Real tau = 1.0;
  // Samples with weight below skip_weight / K are dropped; the per-pixel
  // error this introduces is at most skip_weight for colors in [0, 1].
  Real skip_weight = 1e-6;
};

// Semantic attention + local AdaIN + decode per sample, then volume rendering.
Tensor render_stylized(const ContentField& content, const SemanticField& semantic, const StyleDictionary& dict,
                       const ContentStats& stats, const ColorDecoder& decoder, const CameraModel& camera,
                       const StylizeOptions& options = {});

// Single-reference AdaIN with the global statistics of style_image.
Tensor render_stylized_global(const ContentField& content, const ContentStats& stats, const ColorDecoder& decoder,
                              const CameraModel& camera, const Tensor& style_image, const EncoderSpec& style,
                              const StylizeOptions& options = {});

// Per-sample attention rows for arbitrary world points (diagnostics/tests).
Tensor point_attention(const SemanticField& semantic, const StyleDictionary& dict, std::span<const Vec3> points,
                       Real tau = 1.0);

}  // namespace fprf
