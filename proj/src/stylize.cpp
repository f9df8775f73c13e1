#include "fprf/stylize.hpp"

#include "fprf/error.hpp"
#include "fprf/numeric.hpp"
#include "fprf/parallel.hpp"
#include "fprf/rng.hpp"

namespace fprf {

Tensor style_attention(const Tensor& semantic, const Tensor& keys, Real tau) {
  require(semantic.rank() == 2 && keys.rank() == 2 && semantic.cols() == keys.cols(), ErrorKind::Dimension,
          "attention needs [K x C] queries and [T x C] keys, got " + shape_string(semantic.shape()) + " and " +
              shape_string(keys.shape()));
  require(tau > 0.0, ErrorKind::Domain, "attention temperature must be positive");
  const size_t k = semantic.rows(), t = keys.rows(), c = keys.cols();
  Tensor logits({k, t});
  for (size_t i = 0; i < k; ++i) {
    const Real* q = semantic.data() + i * c;
    for (size_t j = 0; j < t; ++j) {
      const Real* key = keys.data() + j * c;
      Real dot = 0.0;
      for (size_t a = 0; a < c; ++a) dot += q[a] * key[a];
      logits.at(i, j) = dot / tau;
    }
  }
  return softmax_rows(logits);
}

StyleCodes weighted_style_codes(const Tensor& attention, const Tensor& means, const Tensor& stds) {
  require(attention.rank() == 2 && means.rank() == 2 && stds.shape() == means.shape() &&
              attention.cols() == means.rows(),
          ErrorKind::Dimension, "attention columns must match the dictionary size");
  const size_t k = attention.rows(), t = means.rows(), c = means.cols();
  StyleCodes out{Tensor({k, c}), Tensor({k, c})};
  for (size_t i = 0; i < k; ++i) {
    Real* m = out.mean.data() + i * c;
    Real* s = out.std.data() + i * c;
    for (size_t j = 0; j < t; ++j) {
      const Real r = attention.at(i, j);
      const Real* mj = means.data() + j * c;
      const Real* sj = stds.data() + j * c;
      for (size_t a = 0; a < c; ++a) {
        m[a] += r * mj[a];
        s[a] += r * sj[a];
      }
    }
  }
  return out;
}

StyleCodes weighted_style_codes(const Tensor& attention, const StyleDictionary& dict) {
  return weighted_style_codes(attention, dict.means(), dict.stds());
}

Tensor local_adain(const Tensor& features, const ContentStats& stats, const Tensor& mean_w, const Tensor& std_w) {
  require(stats.initialized, ErrorKind::Data, "content statistics are not initialized");
  const size_t k = features.rows(), c = features.cols();
  require(mean_w.shape() == features.shape() && std_w.shape() == features.shape(), ErrorKind::Dimension,
          "style codes must match the feature shape");
  require(stats.mean.size() == c && stats.std.size() == c, ErrorKind::Dimension, "content stats width mismatch");
  Tensor out = features;
  for (size_t i = 0; i < k; ++i) {
    Real* row = out.data() + i * c;
    const Real* m = mean_w.data() + i * c;
    const Real* s = std_w.data() + i * c;
    for (size_t a = 0; a < c; ++a) {
      // Same expression as adain(), so matching codes give identical bits.
      const Real scale = s[a] / stats.std[a] - 1.0;
      const Real shift = m[a] - stats.mean[a];
      row[a] = row[a] + scale * (row[a] - stats.mean[a]) + shift;
    }
  }
  return out;
}

namespace {

struct Stylizer {
  const ContentField& content;
  const SemanticField* semantic;  // null for the global path
  Tensor keys, means, stds;       // dictionary path
  std::vector<Real> global_mean, global_std;
  const ContentStats& stats;
  const ColorDecoder& decoder;
  const StylizeOptions& options;

  Tensor render(const CameraModel& camera) const {
    camera.validate();
    require(stats.initialized, ErrorKind::Data, "content statistics are not initialized");
    const size_t h = camera.height, w = camera.width, cv = content.feature_dim();
    const Real threshold = options.skip_weight / static_cast<Real>(options.render.samples);
    Tensor image({h, w, 3});
    parallel_for(h, [&](size_t row) {
      RayTrace trace;
      SemanticSamples sem;
      for (size_t col = 0; col < w; ++col) {
        RenderOptions opt = options.render;
        opt.seed = mix_seed(options.render.seed, row * w + col);
        const Ray ray = generate_ray(camera, col, row);
        if (!trace_density(content, ray, opt, trace) || trace.active == 0) continue;
        const size_t n = trace.active;
        std::vector<size_t> kept;
        for (size_t i = 0; i < n; ++i)
          if (trace.weights.weights[i] >= threshold) kept.push_back(i);
        if (kept.empty()) continue;
        eval_content_features(content, ray.dir, kept.back() + 1, trace.content);
        const size_t m = kept.size();
        Tensor f({m, cv});
        for (size_t r = 0; r < m; ++r)
          std::copy_n(trace.content.features.data() + kept[r] * cv, cv, f.data() + r * cv);
        StyleCodes codes;
        if (semantic != nullptr) {
          std::vector<Vec3> pts(m);
          for (size_t r = 0; r < m; ++r) pts[r] = trace.samples.points[kept[r]];
          eval_semantic(*semantic, pts, sem);
          codes = weighted_style_codes(style_attention(sem.features, keys, options.tau), means, stds);
        } else {
          codes = {Tensor({m, cv}), Tensor({m, cv})};
          for (size_t r = 0; r < m; ++r) {
            std::copy(global_mean.begin(), global_mean.end(), codes.mean.data() + r * cv);
            std::copy(global_std.begin(), global_std.end(), codes.std.data() + r * cv);
          }
        }
        const Tensor rgb = decode_color(decoder, local_adain(f, stats, codes.mean, codes.std));
        Real* out = image.data() + (row * w + col) * 3;
        for (size_t r = 0; r < m; ++r) {
          const Real wt = trace.weights.weights[kept[r]];
          for (size_t a = 0; a < 3; ++a) out[a] += wt * rgb.at(r, a);
        }
      }
    });
    return image;
  }
};

}  // namespace

Tensor render_stylized(const ContentField& content, const SemanticField& semantic, const StyleDictionary& dict,
                       const ContentStats& stats, const ColorDecoder& decoder, const CameraModel& camera,
                       const StylizeOptions& options) {
  dict.validate();
  require(dict.key_dim() == semantic.feature_dim(), ErrorKind::Dimension,
          "dictionary keys have " + std::to_string(dict.key_dim()) + " channels, semantic field produces " +
              std::to_string(semantic.feature_dim()));
  require(dict.value_dim() == content.feature_dim(), ErrorKind::Dimension,
          "dictionary values do not match the content feature width");
  Stylizer s{content, &semantic, dict.keys(), dict.means(), dict.stds(), {}, {}, stats, decoder, options};
  return s.render(camera);
}

Tensor render_stylized_global(const ContentField& content, const ContentStats& stats, const ColorDecoder& decoder,
                              const CameraModel& camera, const Tensor& style_image, const EncoderSpec& style,
                              const StylizeOptions& options) {
  const ChannelStats g = global_style_stats(style_image, style);
  require(g.mean.size() == content.feature_dim(), ErrorKind::Dimension,
          "style encoder width does not match the content feature width");
  Stylizer s{content, nullptr, {}, {}, {}, g.mean.vec(), g.std.vec(), stats, decoder, options};
  return s.render(camera);
}

Tensor point_attention(const SemanticField& semantic, const StyleDictionary& dict, std::span<const Vec3> points,
                       Real tau) {
  SemanticSamples sem;
  eval_semantic(semantic, points, sem);
  return style_attention(sem.features, dict.keys(), tau);
}

}  // namespace fprf
