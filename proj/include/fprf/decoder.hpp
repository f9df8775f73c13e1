#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "fprf/encoder.hpp"
#include "fprf/mlp.hpp"
#include "fprf/numeric.hpp"

namespace fprf {

// sigma_s (F - mu_c) / sigma_c + mu_s per channel, evaluated so that equal
// content and style statistics return F bit-for-bit.
Tensor adain(const Tensor& features, const Tensor& mu_c, const Tensor& sigma_c, const Tensor& mu_s,
             const Tensor& sigma_s);

// Per-pixel color decoder: content feature -> RGB in (0, 1).
struct ColorDecoder {
  MlpParams mlp;
  bool frozen = false;

  size_t feature_dim() const { return mlp.in_dim(); }
};

ColorDecoder make_color_decoder(size_t feature_dim, uint64_t seed, size_t hidden = 64);

// [n x C_V] -> [n x 3]; rows are decoded independently.
Tensor decode_color(const ColorDecoder& decoder, const Tensor& features);

// Moving-average statistics of rendered content features.
struct ContentStats {
  Tensor mean;
  Tensor std;
  Real decay = 0.99;
  bool initialized = false;
};

// First call copies the batch statistics; later calls blend with `decay`.
ContentStats update_content_stats(const ContentStats& stats, const Tensor& batch);

struct DecoderPretrainConfig {
  size_t steps = 1500;
  Real lr = 2e-3;
  Real lambda_s = 1.0;
  uint64_t seed = 0;
  size_t hidden = 64;
  EncoderSpec style_encoder = EncoderSpec::style_default();
  UpsampleParams upsample;
};

struct DecoderPretrainResult {
  ColorDecoder decoder;  // frozen
  std::vector<Real> loss;          // total loss per step
  std::vector<Real> content_loss;  // L_c per step
  std::vector<Real> style_loss;    // L_s per step
};

// Trains the decoder on random (content, style) pairs: AdaIN the pixel-level
// content features to the style statistics, decode, re-encode, and minimize
// L_c + lambda_s L_s. L_c compares the re-encoded (upsampled, guided by the
// content image) features with the AdaIN target; L_s matches channel means
// and stds of the re-encoded features to the style features.
DecoderPretrainResult pretrain_decoder(const std::vector<Tensor>& content_corpus,
                                       const std::vector<Tensor>& style_corpus, const DecoderPretrainConfig& config,
                                       const std::function<void(size_t, Real)>& on_step = {});

// Pixel-resolution content features of an image ([H*W x C_V] rows).
Tensor pixel_content_features(const ConvEncoder& encoder, const Tensor& image, const UpsampleParams& params);

}  // namespace fprf
