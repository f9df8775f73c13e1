#include "fprf/encoder.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "json.hpp"

#include "fprf/error.hpp"
#include "fprf/imgproc.hpp"
#include "fprf/rng.hpp"

namespace fprf {

std::string to_string(EncoderKind kind) {
  return kind == EncoderKind::RandomConv ? "random_conv" : "oracle_semantic";
}

EncoderKind encoder_kind_from_string(const std::string& s) {
  if (s == "random_conv") return EncoderKind::RandomConv;
  if (s == "oracle_semantic") return EncoderKind::OracleSemantic;
  fail(ErrorKind::Config, "unknown encoder kind '" + s + "'");
}

namespace {

ConvEncoder::Layer make_layer(int kernel, int stride, size_t in, size_t out, Rng& rng) {
  ConvEncoder::Layer l;
  l.kernel = kernel;
  l.stride = stride;
  l.in_channels = in;
  l.out_channels = out;
  const size_t fan_in = static_cast<size_t>(kernel * kernel) * in;
  l.weight = Tensor({out, fan_in});
  l.bias = Tensor({out});
  const double scale = std::sqrt(2.0 / static_cast<double>(fan_in));
  for (auto& w : l.weight.vec()) w = rng.normal() * scale;
  for (auto& b : l.bias.vec()) b = 0.05 * rng.normal();
  return l;
}

inline size_t clamp_index(long i, size_t n) {
  return static_cast<size_t>(std::clamp(i, 0L, static_cast<long>(n) - 1));
}

}  // namespace

ConvEncoder ConvEncoder::style(const EncoderSpec& spec) {
  require(spec.kind == EncoderKind::RandomConv, ErrorKind::Config, "style encoder must be random_conv");
  require(spec.stride == 1 || spec.stride == 2, ErrorKind::Config, "style encoder stride must be 1 or 2");
  require(spec.channels >= 1, ErrorKind::Config, "style encoder needs channels >= 1");
  Rng rng(mix_seed(spec.seed, 100));
  std::vector<Layer> layers;
  layers.push_back(make_layer(5, 1, 3, 16, rng));
  layers.push_back(make_layer(5, spec.stride, 16, spec.channels, rng));
  return ConvEncoder(std::move(layers));
}

ConvEncoder ConvEncoder::semantic(const EncoderSpec& spec) {
  require(spec.kind == EncoderKind::RandomConv, ErrorKind::Config, "semantic conv encoder must be random_conv");
  require(spec.stride == 2 || spec.stride == 4, ErrorKind::Config, "semantic encoder stride must be 2 or 4");
  require(spec.channels >= 1, ErrorKind::Config, "semantic encoder needs channels >= 1");
  Rng rng(mix_seed(spec.seed, 200));
  std::vector<Layer> layers;
  layers.push_back(make_layer(5, 2, 3, 16, rng));
  layers.push_back(make_layer(5, spec.stride == 4 ? 2 : 1, 16, 16, rng));
  layers.push_back(make_layer(3, 1, 16, spec.channels, rng));
  return ConvEncoder(std::move(layers));
}

int ConvEncoder::stride() const {
  int s = 1;
  for (const auto& l : layers_) s *= l.stride;
  return s;
}

int ConvEncoder::receptive_radius() const {
  int r = 0, s = 1;
  for (const auto& l : layers_) {
    r += (l.kernel / 2) * s;
    s *= l.stride;
  }
  return r;
}

Tensor ConvEncoder::forward(const Tensor& image, Cache* cache) const {
  require(image.rank() == 3, ErrorKind::Dimension, "encoder input must be [H x W x C]");
  if (cache) {
    cache->inputs.clear();
    cache->preact.clear();
  }
  Tensor cur = image;
  for (auto& v : cur.vec()) v -= 0.5;
  for (size_t li = 0; li < layers_.size(); ++li) {
    const Layer& l = layers_[li];
    require(cur.dim(2) == l.in_channels, ErrorKind::Dimension,
            "encoder layer " + std::to_string(li) + " expects " + std::to_string(l.in_channels) + " channels");
    const size_t h = cur.dim(0), w = cur.dim(1), cin = l.in_channels, cout = l.out_channels;
    const size_t oh = (h + l.stride - 1) / l.stride, ow = (w + l.stride - 1) / l.stride;
    const int r = l.kernel / 2;
    const size_t patch = static_cast<size_t>(l.kernel * l.kernel) * cin;
    // transposed weights [patch x out] for a vectorizable inner loop
    std::vector<Real> wt(patch * cout);
    for (size_t o = 0; o < cout; ++o)
      for (size_t p = 0; p < patch; ++p) wt[p * cout + o] = l.weight[o * patch + p];
    Tensor z({oh, ow, cout});
    std::vector<Real> buf(patch);
    for (size_t oy = 0; oy < oh; ++oy) {
      for (size_t ox = 0; ox < ow; ++ox) {
        size_t p = 0;
        for (int ky = -r; ky <= r; ++ky) {
          const size_t iy = clamp_index(static_cast<long>(oy) * l.stride + ky, h);
          for (int kx = -r; kx <= r; ++kx) {
            const size_t ix = clamp_index(static_cast<long>(ox) * l.stride + kx, w);
            const Real* src = cur.data() + (iy * w + ix) * cin;
            for (size_t ci = 0; ci < cin; ++ci) buf[p++] = src[ci];
          }
        }
        Real* dst = z.data() + (oy * ow + ox) * cout;
        for (size_t o = 0; o < cout; ++o) dst[o] = l.bias[o];
        for (size_t q = 0; q < patch; ++q) {
          const Real x = buf[q];
          const Real* wq = wt.data() + q * cout;
          for (size_t o = 0; o < cout; ++o) dst[o] += wq[o] * x;
        }
      }
    }
    Tensor a = z;
    if (li + 1 < layers_.size())
      for (auto& v : a.vec()) v = v > 0.0 ? v : 0.0;
    if (cache) {
      cache->inputs.push_back(std::move(cur));
      cache->preact.push_back(std::move(z));
    }
    cur = std::move(a);
  }
  return cur;
}

Tensor ConvEncoder::backward_input(const Cache& cache, const Tensor& grad_out) const {
  require(cache.inputs.size() == layers_.size(), ErrorKind::Dimension, "encoder cache depth mismatch");
  Tensor g = grad_out;
  for (size_t li = layers_.size(); li-- > 0;) {
    const Layer& l = layers_[li];
    const Tensor& in = cache.inputs[li];
    const size_t h = in.dim(0), w = in.dim(1), cin = l.in_channels, cout = l.out_channels;
    const size_t oh = g.dim(0), ow = g.dim(1);
    const int r = l.kernel / 2;
    const size_t patch = static_cast<size_t>(l.kernel * l.kernel) * cin;
    Tensor gin({h, w, cin});
    std::vector<Real> gp(patch);
    for (size_t oy = 0; oy < oh; ++oy) {
      for (size_t ox = 0; ox < ow; ++ox) {
        const Real* go = g.data() + (oy * ow + ox) * cout;
        std::fill(gp.begin(), gp.end(), 0.0);
        for (size_t o = 0; o < cout; ++o) {
          if (go[o] == 0.0) continue;
          const Real* wr = l.weight.data() + o * patch;
          for (size_t q = 0; q < patch; ++q) gp[q] += go[o] * wr[q];
        }
        size_t p = 0;
        for (int ky = -r; ky <= r; ++ky) {
          const size_t iy = clamp_index(static_cast<long>(oy) * l.stride + ky, h);
          for (int kx = -r; kx <= r; ++kx) {
            const size_t ix = clamp_index(static_cast<long>(ox) * l.stride + kx, w);
            Real* dst = gin.data() + (iy * w + ix) * cin;
            for (size_t ci = 0; ci < cin; ++ci) dst[ci] += gp[p++];
          }
        }
      }
    }
    if (li > 0) {
      const Tensor& prev = cache.preact[li - 1];
      for (size_t k = 0; k < gin.size(); ++k)
        if (!(prev[k] > 0.0)) gin[k] = 0.0;
    }
    g = std::move(gin);
  }
  return g;
}

namespace {

void require_rgb(const Tensor& image) {
  require(image.rank() == 3 && image.dim(2) == 3, ErrorKind::Dimension,
          "encoder expects an RGB image [H x W x 3], got " + shape_string(image.shape()));
}

}  // namespace

FeatureImage encode_style(const EncoderSpec& spec, const Tensor& image) {
  require_rgb(image);
  const ConvEncoder enc = ConvEncoder::style(spec);
  return {enc.forward(image), enc.stride()};
}

FeatureImage encode_semantic(const EncoderSpec& spec, const Tensor& image, const LabelMap* labels) {
  require_rgb(image);
  if (spec.kind == EncoderKind::RandomConv) {
    const ConvEncoder enc = ConvEncoder::semantic(spec);
    return {enc.forward(image), enc.stride()};
  }
  require(labels != nullptr, ErrorKind::Data, "oracle_semantic encoder requires a label map");
  const size_t h = image.dim(0), w = image.dim(1), c = spec.channels;
  require(labels->height == h && labels->width == w && labels->ids.size() == h * w, ErrorKind::Dimension,
          "label map size does not match the image");
  Rng rng(mix_seed(spec.seed, 300));
  Tensor embed({kMaxRegionIds, c});
  for (auto& v : embed.vec()) v = rng.normal();
  for (uint8_t id : labels->ids)
    require(id < kMaxRegionIds, ErrorKind::Data, "region id " + std::to_string(id) + " exceeds the oracle table");
  // Windowed mean of the embeddings; a window inside one region yields that
  // region's embedding exactly.
  const long r = std::max(spec.radius, 0);
  Tensor out({h, w, c});
  for (size_t y = 0; y < h; ++y) {
    for (size_t x = 0; x < w; ++x) {
      const long y0 = std::max(0L, static_cast<long>(y) - r), y1 = std::min<long>(h - 1, static_cast<long>(y) + r);
      const long x0 = std::max(0L, static_cast<long>(x) - r), x1 = std::min<long>(w - 1, static_cast<long>(x) + r);
      const uint8_t first = labels->ids[y * w + x];
      bool uniform = true;
      for (long yy = y0; yy <= y1 && uniform; ++yy)
        for (long xx = x0; xx <= x1; ++xx) uniform = uniform && labels->ids[yy * w + xx] == first;
      Real* o = out.data() + (y * w + x) * c;
      if (uniform) {
        std::copy_n(embed.data() + first * c, c, o);
        continue;
      }
      for (long yy = y0; yy <= y1; ++yy)
        for (long xx = x0; xx <= x1; ++xx) {
          const Real* e = embed.data() + labels->ids[yy * w + xx] * c;
          for (size_t k = 0; k < c; ++k) o[k] += e[k];
        }
      const Real inv = 1.0 / static_cast<Real>((y1 - y0 + 1) * (x1 - x0 + 1));
      for (size_t k = 0; k < c; ++k) o[k] *= inv;
    }
  }
  return {std::move(out), 1};
}

FeatureImage upsample_to_pixels(const FeatureImage& fmap, const Tensor& guide_rgb, const UpsampleParams& params) {
  require(guide_rgb.rank() == 3, ErrorKind::Dimension, "guide must be [H x W x C]");
  const size_t h = guide_rgb.dim(0), w = guide_rgb.dim(1);
  const size_t s = static_cast<size_t>(fmap.stride);
  require(fmap.height() == (h + s - 1) / s && fmap.width() == (w + s - 1) / s, ErrorKind::Dimension,
          "feature map " + shape_string(fmap.data.shape()) + " at stride " + std::to_string(s) +
              " does not match guide " + shape_string(guide_rgb.shape()));
  const Tensor up = upsample_bilinear(fmap.data, fmap.stride, h, w);
  return {guided_filter(guide_rgb, up, params.radius, params.eps), 1};
}

FeatureImage load_feature_image(const std::string& tensor_path, const std::string& sidecar_path) {
  std::ifstream in(sidecar_path);
  require(in.good(), ErrorKind::Data, "cannot open feature sidecar " + sidecar_path);
  nlohmann::json meta;
  try {
    in >> meta;
  } catch (const std::exception& e) {
    fail(ErrorKind::Data, "bad feature sidecar " + sidecar_path + ": " + e.what());
  }
  require(meta.contains("stride") && meta["stride"].is_number_integer() && meta["stride"].get<int>() >= 1,
          ErrorKind::Data, "feature sidecar needs an integer stride >= 1");
  FeatureImage f{load_fpt(tensor_path), meta["stride"].get<int>()};
  require(f.data.rank() == 3, ErrorKind::Data, "feature tensor must be [H x W x C]");
  require(f.data.all_finite(), ErrorKind::Data, "feature tensor has non-finite values");
  return f;
}

void save_feature_image(const FeatureImage& f, const std::string& tensor_path, const std::string& sidecar_path,
                        const std::string& kind) {
  save_fpt(tensor_path, f.data);
  std::ofstream out(sidecar_path);
  require(out.good(), ErrorKind::Data, "cannot write " + sidecar_path);
  out << nlohmann::json{{"stride", f.stride}, {"kind", kind}}.dump() << '\n';
}

}  // namespace fprf
