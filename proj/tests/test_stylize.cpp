#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "fprf/corpus.hpp"
#include "fprf/error.hpp"
#include "fprf/stylize.hpp"
#include "support.hpp"

using namespace fprf;
using test::max_abs_diff;
using test::pinhole;
using test::random_tensor;

namespace {

struct StylizeFixture {
  ContentField content;
  SemanticField semantic;
  ColorDecoder decoder;
  ContentStats stats;
  CameraModel camera;
};

StylizeFixture make_fixture(uint64_t seed) {
  BlockLayout layout;
  ContentFieldShape cs;
  cs.grid_resolution = {10, 10, 10};
  cs.density_bias = 0.0;
  SemanticFieldShape ss;
  ss.grid_resolution = {10, 10, 10};
  StylizeFixture f{make_content_field(layout, cs, seed), make_semantic_field(layout, ss, seed + 1),
                   make_color_decoder(cs.feature_dim, seed + 2, 16), {}, {}};
  f.stats.mean = random_tensor({cs.feature_dim}, seed + 3, -0.2, 0.2);
  f.stats.std = random_tensor({cs.feature_dim}, seed + 4, 0.3, 1.2);
  f.stats.initialized = true;
  f.camera = pinhole(7, 6, look_at(Vec3(0.8, -1, -3), Vec3::Zero(), Vec3(0, -1, 0)));
  return f;
}

}  // namespace

TEST_SUITE("stylize") {
  TEST_CASE("attention rows") {
    const Tensor q = random_tensor({5, 4}, 1);
    const Tensor one = style_attention(q, random_tensor({1, 4}, 2));
    for (size_t i = 0; i < 5; ++i) CHECK(one.at(i, 0) == 1.0);

    // Orthogonal keys, query equal to key 1 with a margin of 10.
    Tensor keys({3, 3});
    keys.at(0, 0) = 1.0;
    keys.at(1, 1) = std::sqrt(11.0);
    keys.at(2, 2) = 1.0;
    Tensor query({1, 3});
    query.at(0, 1) = std::sqrt(11.0);
    CHECK(style_attention(query, keys).at(0, 1) > 0.99);

    // Direct evaluation for K = T = 2.
    Tensor f({2, 2}), k({2, 2});
    f.vec() = {0.5, -1.0, 2.0, 0.25};
    k.vec() = {1.0, 0.0, -0.5, 3.0};
    const Tensor r = style_attention(f, k);
    for (size_t i = 0; i < 2; ++i) {
      const Real l0 = f.at(i, 0) * k.at(0, 0) + f.at(i, 1) * k.at(0, 1);
      const Real l1 = f.at(i, 0) * k.at(1, 0) + f.at(i, 1) * k.at(1, 1);
      CHECK(std::abs(r.at(i, 0) - std::exp(l0) / (std::exp(l0) + std::exp(l1))) < 1e-6);
      CHECK(std::abs(r.at(i, 0) + r.at(i, 1) - 1.0) < 1e-12);
    }
    Tensor f2 = f;
    for (Real& v : f2.vec()) v *= 2.0;
    CHECK(max_abs_diff(style_attention(f, k, 0.5), style_attention(f2, k)) < 1e-12);
    CHECK_THROWS_AS(style_attention(f, random_tensor({2, 3}, 3)), Error);
  }

  TEST_CASE("weighted style codes") {
    const Tensor means = random_tensor({3, 4}, 5), stds = random_tensor({3, 4}, 6, 0.1, 2.0);
    Tensor hot({3, 3});
    hot.at(0, 2) = hot.at(1, 0) = hot.at(2, 1) = 1.0;
    const StyleCodes h = weighted_style_codes(hot, means, stds);
    const size_t pick[3] = {2, 0, 1};
    for (size_t i = 0; i < 3; ++i)
      for (size_t c = 0; c < 4; ++c) {
        CHECK(h.mean.at(i, c) == means.at(pick[i], c));
        CHECK(h.std.at(i, c) == stds.at(pick[i], c));
      }

    Tensor uniform({2, 3});
    uniform.fill(1.0 / 3.0);
    const StyleCodes u = weighted_style_codes(uniform, means, stds);
    for (size_t c = 0; c < 4; ++c)
      CHECK(std::abs(u.mean.at(1, c) - (means.at(0, c) + means.at(1, c) + means.at(2, c)) / 3.0) < 1e-12);

    Tensor w = random_tensor({6, 3}, 7, 0.0, 1.0);
    for (size_t i = 0; i < 6; ++i) {
      const Real s = w.at(i, 0) + w.at(i, 1) + w.at(i, 2);
      for (size_t t = 0; t < 3; ++t) w.at(i, t) /= s;
    }
    const StyleCodes r = weighted_style_codes(w, means, stds);
    for (size_t i = 0; i < 6; ++i)
      for (size_t c = 0; c < 4; ++c) {
        Real m = 0.0, s = 0.0;
        for (size_t t = 0; t < 3; ++t) {
          m += w.at(i, t) * means.at(t, c);
          s += w.at(i, t) * stds.at(t, c);
        }
        CHECK(std::abs(r.mean.at(i, c) - m) < 1e-6);
        CHECK(std::abs(r.std.at(i, c) - s) < 1e-6);
        CHECK(r.std.at(i, c) > 0.0);
      }
    CHECK_THROWS_AS(weighted_style_codes(random_tensor({2, 2}, 8), means, stds), Error);
  }

  TEST_CASE("local AdaIN") {
    Tensor f({1, 1}), mw({1, 1}), sw({1, 1});
    f[0] = 2.0;
    sw[0] = 3.0;
    ContentStats stats;
    stats.mean = Tensor({1});
    stats.mean[0] = 1.0;
    stats.std = Tensor({1});
    stats.std[0] = 1.0;
    stats.initialized = true;
    CHECK(local_adain(f, stats, mw, sw)[0] == doctest::Approx(3.0).epsilon(1e-15));

    const Tensor feats = random_tensor({5, 4}, 9);
    ContentStats s4{random_tensor({4}, 10), random_tensor({4}, 11, 0.5, 1.5), 0.99, true};
    Tensor m_rows({5, 4}), s_rows({5, 4});
    for (size_t i = 0; i < 5; ++i)
      for (size_t c = 0; c < 4; ++c) {
        m_rows.at(i, c) = s4.mean[c];
        s_rows.at(i, c) = s4.std[c];
      }
    CHECK(max_abs_diff(local_adain(feats, s4, m_rows, s_rows), feats) < 1e-12);

    // Same target on every row reduces to global AdaIN.
    const Tensor mu_s = random_tensor({4}, 12), sd_s = random_tensor({4}, 13, 0.2, 1.0);
    for (size_t i = 0; i < 5; ++i)
      for (size_t c = 0; c < 4; ++c) {
        m_rows.at(i, c) = mu_s[c];
        s_rows.at(i, c) = sd_s[c];
      }
    CHECK(max_abs_diff(local_adain(feats, s4, m_rows, s_rows), adain(feats, s4.mean, s4.std, mu_s, sd_s)) <= 1e-6);

    ContentStats none;
    CHECK_THROWS_AS(local_adain(feats, none, m_rows, s_rows), Error);
  }

  TEST_CASE("single-entry dictionary matches the global path") {
    const StylizeFixture fx = make_fixture(21);
    const Tensor style = procedural_image(4, 48, PatternKind::ValueNoise);
    const DictionaryEncoders enc;
    const StyleDictionary dict = build_dictionary({style}, 1, enc, 0);
    const Tensor multi = render_stylized(fx.content, fx.semantic, dict, fx.stats, fx.decoder, fx.camera);
    const Tensor global = render_stylized_global(fx.content, fx.stats, fx.decoder, fx.camera, style, enc.style);
    CHECK(max_abs_diff(multi, global) <= 1e-6);
    // The comparison only means something if the scene is visible.
    Real sum = 0.0;
    for (Real v : global.vec()) sum += v;
    CHECK(sum > 0.05 * static_cast<Real>(global.size()));
    CHECK(render_stylized_global(fx.content, fx.stats, fx.decoder, fx.camera, style, enc.style).vec() == global.vec());
  }

  TEST_CASE("entry order and the low-weight skip leave renders unchanged") {
    const StylizeFixture fx = make_fixture(31);
    const DictionaryEncoders enc;
    const StyleDictionary dict = build_dictionary(
        {procedural_image(1, 40, PatternKind::Checkers), procedural_image(2, 40, PatternKind::Stripes)}, 3, enc, 5);
    StyleDictionary reversed = dict;
    std::reverse(reversed.entries.begin(), reversed.entries.end());
    const Tensor a = render_stylized(fx.content, fx.semantic, dict, fx.stats, fx.decoder, fx.camera);
    CHECK(max_abs_diff(a, render_stylized(fx.content, fx.semantic, reversed, fx.stats, fx.decoder, fx.camera)) <= 1e-6);
    StylizeOptions full;
    full.skip_weight = 0.0;
    CHECK(max_abs_diff(a, render_stylized(fx.content, fx.semantic, dict, fx.stats, fx.decoder, fx.camera, full)) <= 1e-6);
    CHECK(render_stylized(fx.content, fx.semantic, dict, fx.stats, fx.decoder, fx.camera).vec() == a.vec());

    ContentStats none;
    CHECK_THROWS_AS(render_stylized(fx.content, fx.semantic, dict, none, fx.decoder, fx.camera), Error);
  }

  TEST_CASE("point attention does not depend on the batch") {
    const StylizeFixture fx = make_fixture(41);
    const StyleDictionary dict =
        build_dictionary({procedural_image(3, 40, PatternKind::ValueNoise)}, 4, DictionaryEncoders{}, 2);
    const std::vector<Vec3> pts = {Vec3(0.1, 0.2, -0.3), Vec3(-0.5, 0.4, 0.6), Vec3(0.7, -0.7, 0.0)};
    const Tensor all = point_attention(fx.semantic, dict, pts);
    for (size_t i = 0; i < pts.size(); ++i) {
      const Tensor one = point_attention(fx.semantic, dict, std::span<const Vec3>(&pts[i], 1));
      Real row = 0.0;
      for (size_t t = 0; t < dict.size(); ++t) {
        CHECK(one.at(0, t) == all.at(i, t));
        row += one.at(0, t);
      }
      CHECK(std::abs(row - 1.0) < 1e-6);
    }
  }
}
