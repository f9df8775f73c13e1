#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fprf/tensor.hpp"

namespace fprf {

// 2D feature map; location (i, j) sits on pixel (stride*i, stride*j).
struct FeatureImage {
  Tensor data;  // [H x W x C]
  int stride = 1;

  size_t height() const { return data.dim(0); }
  size_t width() const { return data.dim(1); }
  size_t channels() const { return data.dim(2); }
};

enum class EncoderKind { RandomConv, OracleSemantic };

std::string to_string(EncoderKind kind);
EncoderKind encoder_kind_from_string(const std::string& s);

struct EncoderSpec {
  EncoderKind kind = EncoderKind::RandomConv;
  uint64_t seed = 0;
  size_t channels = 32;
  int radius = 1;  // box smoothing radius of the oracle encoder
  int stride = 2;

  static EncoderSpec style_default() { return {EncoderKind::RandomConv, 1234, 32, 1, 2}; }
  static EncoderSpec semantic_default() { return {EncoderKind::RandomConv, 4321, 16, 1, 4}; }
  static EncoderSpec oracle_semantic(size_t channels = 16, uint64_t seed = 99) {
    return {EncoderKind::OracleSemantic, seed, channels, 1, 1};
  }
  bool operator==(const EncoderSpec&) const = default;
};

// Region IDs per pixel, [H x W].
struct LabelMap {
  size_t height = 0, width = 0;
  std::vector<uint8_t> ids;
};

inline constexpr size_t kMaxRegionIds = 32;

// Seeded random convolution stack: kxk kernels, replicate padding, ReLU
// between layers (none after the last). Frozen; supports input gradients.
class ConvEncoder {
 public:
  struct Layer {
    int kernel = 5;
    int stride = 1;
    size_t in_channels = 0, out_channels = 0;
    Tensor weight;  // [out x (k*k*in)], patch order (ky, kx, ci)
    Tensor bias;    // [out]
  };
  struct Cache {
    std::vector<Tensor> inputs;  // input of each layer
    std::vector<Tensor> preact;
  };

  ConvEncoder() = default;
  explicit ConvEncoder(std::vector<Layer> layers) : layers_(std::move(layers)) {}

  static ConvEncoder style(const EncoderSpec& spec);
  static ConvEncoder semantic(const EncoderSpec& spec);

  Tensor forward(const Tensor& image, Cache* cache = nullptr) const;
  Tensor backward_input(const Cache& cache, const Tensor& grad_out) const;

  int stride() const;
  int receptive_radius() const;
  size_t out_channels() const { return layers_.back().out_channels; }
  const std::vector<Layer>& layers() const { return layers_; }

 private:
  std::vector<Layer> layers_;
};

// Content/style features: two 5x5 layers, total stride spec.stride (1 or 2).
FeatureImage encode_style(const EncoderSpec& spec, const Tensor& image);

// Semantic features. RandomConv: three layers, receptive radius >= 7.
// OracleSemantic: one-hot region ID through a seeded linear map, then a box
// blur of radius spec.radius; requires labels.
FeatureImage encode_semantic(const EncoderSpec& spec, const Tensor& image, const LabelMap* labels = nullptr);

struct UpsampleParams {
  int radius = 4;
  Real eps = 1e-3;
};

// Bilinear upsampling to the guide's resolution followed by guided filtering
// of every channel against the guide.
FeatureImage upsample_to_pixels(const FeatureImage& fmap, const Tensor& guide_rgb, const UpsampleParams& params = {});

// External features: an FPT1 tensor plus a JSON sidecar {"stride": s, "kind": "..."}.
FeatureImage load_feature_image(const std::string& tensor_path, const std::string& sidecar_path);
void save_feature_image(const FeatureImage& f, const std::string& tensor_path, const std::string& sidecar_path,
                        const std::string& kind);

}  // namespace fprf
