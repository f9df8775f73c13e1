#include "fprf/decoder.hpp"

#include <cmath>

#include "fprf/adam.hpp"
#include "fprf/error.hpp"
#include "fprf/imgproc.hpp"
#include "fprf/rng.hpp"

namespace fprf {

Tensor adain(const Tensor& features, const Tensor& mu_c, const Tensor& sigma_c, const Tensor& mu_s,
             const Tensor& sigma_s) {
  const size_t c = features.cols();
  require(mu_c.size() == c && sigma_c.size() == c && mu_s.size() == c && sigma_s.size() == c, ErrorKind::Dimension,
          "adain statistics must have one entry per channel");
  std::vector<Real> scale(c), shift(c);
  for (size_t k = 0; k < c; ++k) {
    require(sigma_c[k] > 0.0, ErrorKind::Domain, "adain content std must be positive");
    scale[k] = sigma_s[k] / sigma_c[k] - 1.0;
    shift[k] = mu_s[k] - mu_c[k];
  }
  Tensor out = features;
  const size_t n = features.rows();
  for (size_t r = 0; r < n; ++r) {
    Real* row = out.data() + r * c;
    for (size_t k = 0; k < c; ++k) row[k] = row[k] + scale[k] * (row[k] - mu_c[k]) + shift[k];
  }
  return out;
}

ColorDecoder make_color_decoder(size_t feature_dim, uint64_t seed, size_t hidden) {
  return {make_mlp({feature_dim, hidden, hidden, 3}, OutputActivation::Sigmoid, seed), false};
}

Tensor decode_color(const ColorDecoder& decoder, const Tensor& features) {
  require(features.rank() == 2 && features.cols() == decoder.feature_dim(), ErrorKind::Dimension,
          "decoder expects [n x " + std::to_string(decoder.feature_dim()) + "] features, got " +
              shape_string(features.shape()));
  return mlp_forward(decoder.mlp, features);
}

ContentStats update_content_stats(const ContentStats& stats, const Tensor& batch) {
  const ChannelStats b = channel_stats(batch);
  ContentStats out = stats;
  if (!stats.initialized) {
    out.mean = b.mean;
    out.std = b.std;
    out.initialized = true;
    return out;
  }
  require(stats.mean.size() == b.mean.size(), ErrorKind::Dimension, "content stats width mismatch");
  for (size_t k = 0; k < b.mean.size(); ++k) {
    out.mean[k] = stats.decay * stats.mean[k] + (1.0 - stats.decay) * b.mean[k];
    out.std[k] = stats.decay * stats.std[k] + (1.0 - stats.decay) * b.std[k];
  }
  return out;
}

Tensor pixel_content_features(const ConvEncoder& encoder, const Tensor& image, const UpsampleParams& params) {
  FeatureImage f{encoder.forward(image), encoder.stride()};
  FeatureImage up = upsample_to_pixels(f, image, params);
  up.data.reshape({image.dim(0) * image.dim(1), up.channels()});
  return up.data;
}

DecoderPretrainResult pretrain_decoder(const std::vector<Tensor>& content_corpus,
                                       const std::vector<Tensor>& style_corpus, const DecoderPretrainConfig& config,
                                       const std::function<void(size_t, Real)>& on_step) {
  require(!content_corpus.empty() && !style_corpus.empty(), ErrorKind::Data, "decoder pretraining needs images");
  require(config.lambda_s >= 0.0, ErrorKind::Config, "lambda_s must be >= 0");
  const ConvEncoder encoder = ConvEncoder::style(config.style_encoder);
  const size_t cv = encoder.out_channels();
  const int stride = encoder.stride();

  DecoderPretrainResult res;
  res.decoder = make_color_decoder(cv, mix_seed(config.seed, 7), config.hidden);
  AdamState adam;
  const AdamConfig adam_cfg{config.lr};
  Rng rng(mix_seed(config.seed, 8));

  std::vector<Tensor> content_feats(content_corpus.size());
  std::vector<ChannelStats> style_stats(style_corpus.size());
  std::vector<bool> style_ready(style_corpus.size(), false);

  for (size_t step = 0; step < config.steps; ++step) {
    const size_t ci = rng.below(content_corpus.size());
    const size_t si = rng.below(style_corpus.size());
    const Tensor& content = content_corpus[ci];
    require(content.rank() == 3 && content.dim(2) == 3, ErrorKind::Data, "content images must be RGB");
    if (content_feats[ci].empty()) content_feats[ci] = pixel_content_features(encoder, content, config.upsample);
    if (!style_ready[si]) {
      style_stats[si] = channel_stats(encoder.forward(style_corpus[si]));
      style_ready[si] = true;
    }
    const Tensor& fc = content_feats[ci];
    const ChannelStats cs = channel_stats(fc);
    const ChannelStats& ss = style_stats[si];
    const Tensor target = adain(fc, cs.mean, cs.std, ss.mean, ss.std);

    MlpCache dec_cache;
    Tensor rgb = mlp_forward(res.decoder.mlp, target, &dec_cache);
    const size_t h = content.dim(0), w = content.dim(1);
    rgb.reshape({h, w, 3});
    ConvEncoder::Cache enc_cache;
    const Tensor enc = encoder.forward(rgb, &enc_cache);
    const Tensor up = guided_filter(content, upsample_bilinear(enc, stride, h, w), config.upsample.radius,
                                    config.upsample.eps);

    // L_c
    const Real n_c = static_cast<Real>(up.size());
    Real lc = 0.0;
    Tensor grad_up(up.shape());
    for (size_t k = 0; k < up.size(); ++k) {
      const Real d = up[k] - target[k];
      lc += d * d;
      grad_up[k] = 2.0 * d / n_c;
    }
    lc /= n_c;

    // L_s
    const ChannelStats es = channel_stats(enc);
    Real ls = 0.0;
    Tensor g_mean({cv}), g_std({cv});
    for (size_t k = 0; k < cv; ++k) {
      const Real dm = es.mean[k] - ss.mean[k];
      const Real ds = es.std[k] - ss.std[k];
      ls += (dm * dm + ds * ds) / static_cast<Real>(cv);
      g_mean[k] = config.lambda_s * 2.0 * dm / static_cast<Real>(cv);
      g_std[k] = config.lambda_s * 2.0 * ds / static_cast<Real>(cv);
    }

    Tensor grad_enc = upsample_bilinear_adjoint(
        guided_filter_adjoint(content, grad_up, config.upsample.radius, config.upsample.eps), stride, enc.dim(0),
        enc.dim(1));
    if (config.lambda_s > 0.0) {
      const Tensor gs = channel_stats_backward(enc, es, g_mean, g_std);
      for (size_t k = 0; k < grad_enc.size(); ++k) grad_enc[k] += gs[k];
    }
    Tensor grad_rgb = encoder.backward_input(enc_cache, grad_enc);
    grad_rgb.reshape({h * w, 3});

    MlpParams grads = res.decoder.mlp.zeros_like();
    mlp_backward(res.decoder.mlp, dec_cache, grad_rgb, &grads, nullptr);
    const auto gp = grads.tensors();
    adam_step(res.decoder.mlp.tensors(), {gp.begin(), gp.end()}, adam, adam_cfg);

    const Real total = lc + config.lambda_s * ls;
    require(std::isfinite(total), ErrorKind::Numeric, "decoder pretraining diverged at step " + std::to_string(step));
    res.loss.push_back(total);
    res.content_loss.push_back(lc);
    res.style_loss.push_back(ls);
    if (on_step) on_step(step, total);
  }
  res.decoder.frozen = true;
  return res;
}

}  // namespace fprf
