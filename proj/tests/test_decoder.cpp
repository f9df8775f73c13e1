#include <cmath>

#include "doctest.h"
#include "fprf/corpus.hpp"
#include "fprf/decoder.hpp"
#include "fprf/encoder.hpp"
#include "fprf/numeric.hpp"
#include "support.hpp"

using namespace fprf;

TEST_SUITE("decoder") {
  TEST_CASE("adain") {
    const Tensor f = test::random_tensor({50, 4}, 1, -2.0, 3.0);
    const ChannelStats c = channel_stats(f);
    CHECK(adain(f, c.mean, c.std, c.mean, c.std) == f);

    const Tensor mu_s({4}, {0.5, -1.0, 2.0, 0.0}), sd_s({4}, {0.3, 2.0, 1.0, 0.01});
    const ChannelStats out = channel_stats(adain(f, c.mean, c.std, mu_s, sd_s));
    for (size_t k = 0; k < 4; ++k) {
      CHECK(std::abs(out.mean[k] - mu_s[k]) <= 1e-5);
      CHECK(std::abs(out.std[k] - sd_s[k]) <= 1e-5);
    }

    const Tensor h = adain(Tensor({2, 1}, {0.0, 2.0}), Tensor({1}, 1.0), Tensor({1}, 1.0), Tensor({1}, 5.0),
                           Tensor({1}, 2.0));
    CHECK(h[0] == 3.0);
    CHECK(h[1] == 7.0);
  }

  TEST_CASE("color decoder") {
    ColorDecoder d = make_color_decoder(6, 3, 16);
    for (DenseLayer& l : d.mlp.layers) l.bias = test::random_tensor({l.out_dim()}, 9 + l.out_dim());
    const Tensor z = decode_color(d, Tensor({2, 6}));
    // Zero features: the bias chain, relu(relu(b0) W1 + b1) W2 + b2 -> sigmoid.
    const Tensor expect = mlp_forward(d.mlp, Tensor({1, 6}));
    for (size_t c = 0; c < 3; ++c) {
      CHECK(z.at(0, c) == expect[c]);
      CHECK(z.at(1, c) == expect[c]);
      CHECK(z.at(0, c) > 0.0);
      CHECK(z.at(0, c) < 1.0);
    }

    const Tensor f = test::random_tensor({7, 6}, 4);
    const Tensor batch = decode_color(d, f);
    CHECK(batch == decode_color(d, f));
    for (size_t r = 0; r < 7; ++r) {
      Tensor one({1, 6});
      for (size_t c = 0; c < 6; ++c) one[c] = f.at(r, c);
      const Tensor y = decode_color(d, one);
      for (size_t c = 0; c < 3; ++c) CHECK(y[c] == batch.at(r, c));
    }
  }

  TEST_CASE("content statistics") {
    const Tensor b = test::random_tensor({30, 3}, 5);
    const ChannelStats bs = channel_stats(b);
    ContentStats s;
    s = update_content_stats(s, b);
    CHECK(s.initialized);
    CHECK(s.mean == bs.mean);
    CHECK(s.std == bs.std);

    ContentStats drift;
    drift = update_content_stats(drift, test::random_tensor({30, 3}, 6, -0.5, 1.5));
    for (int i = 0; i < 1000; ++i) drift = update_content_stats(drift, b);
    for (size_t c = 0; c < 3; ++c) CHECK(std::abs(drift.mean[c] - bs.mean[c]) < 1e-4);

    ContentStats last;
    last.decay = 0.0;
    last = update_content_stats(last, test::random_tensor({30, 3}, 7));
    last = update_content_stats(last, b);
    CHECK(last.mean == bs.mean);
    CHECK(last.std == bs.std);
  }

  TEST_CASE("pretraining without style loss reduces reconstruction error") {
    const std::vector<Tensor> corpus = procedural_corpus(8, 24, 3);
    DecoderPretrainConfig cfg;
    cfg.steps = 60;
    cfg.lambda_s = 0.0;
    cfg.hidden = 32;
    const ConvEncoder enc = ConvEncoder::style(cfg.style_encoder);
    const Tensor held = procedural_image(99, 24, PatternKind::ValueNoise);
    const Tensor feats = pixel_content_features(enc, held, cfg.upsample);
    const Tensor pixels = [&] {
      Tensor p = held;
      p.reshape({24 * 24, 3});
      return p;
    }();
    auto recon = [&](const ColorDecoder& d) {
      const Tensor out = decode_color(d, feats);
      Real s = 0.0;
      for (size_t i = 0; i < out.size(); ++i) s += (out[i] - pixels[i]) * (out[i] - pixels[i]);
      return s / static_cast<Real>(out.size());
    };
    const ColorDecoder init = make_color_decoder(enc.out_channels(), cfg.seed, cfg.hidden);
    const DecoderPretrainResult r = pretrain_decoder(corpus, corpus, cfg);
    CHECK(r.loss.size() == 60);
    CHECK(r.decoder.frozen);
    CHECK(recon(r.decoder) < recon(init));
    CHECK(r.loss.back() < r.loss.front());
  }
}
