#include <cmath>

#include "doctest.h"
#include "fprf/block_layout.hpp"
#include "fprf/error.hpp"
#include "fprf/field.hpp"
#include "fprf/numeric.hpp"
#include "fprf/triplane.hpp"
#include "support.hpp"

using namespace fprf;

namespace {

// Bilinear lookup on one [Ra x Rb x C] plane at unit coordinates (a, b).
Real bilinear(const Tensor& plane, Real a, Real b, size_t c) {
  const Real fa = a * static_cast<Real>(plane.dim(0) - 1), fb = b * static_cast<Real>(plane.dim(1) - 1);
  const size_t a0 = std::min<size_t>(static_cast<size_t>(std::floor(fa)), plane.dim(0) - 2);
  const size_t b0 = std::min<size_t>(static_cast<size_t>(std::floor(fb)), plane.dim(1) - 2);
  const Real ta = fa - static_cast<Real>(a0), tb = fb - static_cast<Real>(b0);
  return (1 - ta) * (1 - tb) * plane.at(a0, b0, c) + ta * (1 - tb) * plane.at(a0 + 1, b0, c) +
         (1 - ta) * tb * plane.at(a0, b0 + 1, c) + ta * tb * plane.at(a0 + 1, b0 + 1, c);
}

BlockLayout unit_layout(std::array<int, 3> blocks = {1, 1, 1}, double overlap = 0.0) {
  BlockLayout l;
  l.blocks = blocks;
  l.overlap_frac = overlap;
  return l;
}

ContentFieldShape small_content() {
  ContentFieldShape s;
  s.grid_resolution = {6, 6, 6};
  s.grid_channels = 4;
  s.hidden = 8;
  s.trunk_width = 6;
  s.feature_dim = 5;
  s.n_freq = 2;
  return s;
}

}  // namespace

TEST_SUITE("field") {
  TEST_CASE("triplane sampling") {
    const TriPlaneGrid ones = make_constant_triplane({4, 5, 3}, 3, 1.0);
    for (const Vec3 x : {Vec3(0, 0, 0), Vec3(0.3, 0.7, 0.1), Vec3(1, 1, 1)})
      for (Real v : triplane_sample(ones, x)) CHECK(v == 1.0);

    const TriPlaneGrid g = make_triplane({4, 4, 4}, 2, 5, -1.0, 1.0);
    // Vertex (1, 2, 3) of a 4-vertex axis sits at 1/3, 2/3, 1.
    const std::vector<Real> corner = triplane_sample(g, Vec3(1.0 / 3.0, 2.0 / 3.0, 1.0));
    for (size_t c = 0; c < 2; ++c)
      CHECK(corner[c] == doctest::Approx(g.xy.at(1, 2, c) * g.xz.at(1, 3, c) * g.yz.at(2, 3, c)).epsilon(1e-12));

    const Vec3 x(0.3, 0.6, 0.5);
    const std::vector<Real> v = triplane_sample(g, x);
    for (size_t c = 0; c < 2; ++c) {
      const Real ref = bilinear(g.xy, x[0], x[1], c) * bilinear(g.xz, x[0], x[2], c) * bilinear(g.yz, x[1], x[2], c);
      CHECK(std::abs(v[c] - ref) < 1e-6);
    }
    CHECK_THROWS_AS(triplane_sample(g, Vec3(1.2, 0.5, 0.5)), Error);
  }

  TEST_CASE("triplane backward: zero input and product rule") {
    TriPlaneGrid g = make_triplane({4, 4, 4}, 2, 6, -1.0, 1.0);
    const Vec3 x(0.2, 0.55, 0.9);
    TriPlaneGrid grad = g.zeros_like();
    const Real zero[2] = {0.0, 0.0};
    triplane_sample_backward(g, x, zero, grad);
    for (const Tensor* t : std::as_const(grad).tensors())
      for (Real v : t->vec()) CHECK(v == 0.0);

    g.xy.fill(1.0);
    const Real go[2] = {0.7, -1.3};
    triplane_sample_backward(g, x, go, grad);
    const PlaneFootprint fp = triplane_footprint(g, x);
    for (size_t c = 0; c < 2; ++c) {
      const Real others = bilinear(g.xz, x[0], x[2], c) * bilinear(g.yz, x[1], x[2], c);
      Real total = 0.0;
      for (size_t k = 0; k < 4; ++k) {
        const Real expected = go[c] * others * fp.weight[0][k];
        CHECK(grad.xy[fp.offset[0][k] + c] == doctest::Approx(expected).epsilon(1e-12));
        total += grad.xy[fp.offset[0][k] + c];
      }
      CHECK(total == doctest::Approx(go[c] * others).epsilon(1e-12));
    }
  }

  TEST_CASE("block lookup") {
    const BlockLayout one = unit_layout();
    const auto w = block_lookup(one, Vec3(0.3, -0.2, 0.9));
    REQUIRE(w.size() == 1);
    CHECK(w[0].weight == 1.0);

    const BlockLayout two = unit_layout({2, 1, 1}, 0.1);
    const auto mid = block_lookup(two, Vec3(0.0, 0.1, -0.4));
    REQUIRE(mid.size() == 2);
    CHECK(mid[0].weight == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(mid[1].weight == doctest::Approx(0.5).epsilon(1e-15));

    const BlockLayout many = unit_layout({2, 3, 2}, 0.1);
    Rng rng(3);
    for (int i = 0; i < 500; ++i) {
      const Vec3 p(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1));
      Real s = 0.0;
      for (const BlockWeight& b : block_lookup(many, p)) {
        CHECK(b.weight > 0.0);
        CHECK((b.x_unit.array() >= 0.0).all());
        CHECK((b.x_unit.array() <= 1.0).all());
        s += b.weight;
      }
      CHECK(std::abs(s - 1.0) < 1e-6);
    }
    CHECK_THROWS_AS(block_lookup(many, Vec3(1.5, 0, 0)), Error);
  }

  TEST_CASE("content query") {
    ContentFieldShape shape = small_content();
    shape.density_bias = 0.0;
    ContentField f = make_content_field(unit_layout(), shape, 4);
    for (Tensor* t : f.tensors()) t->fill(0.0);
    const Vec3 d = Vec3(1, 2, 2).normalized();
    const ContentQuery a = content_query(f, Vec3(0.1, 0.2, 0.3), d);
    const ContentQuery b = content_query(f, Vec3(-0.7, 0.5, 0.0), d);
    CHECK(a.sigma == doctest::Approx(std::log(2.0)).epsilon(1e-15));
    CHECK(a.feature == b.feature);

    const ContentField r = make_content_field(unit_layout(), small_content(), 5);
    const Vec3 x(0.25, -0.4, 0.6);
    const ContentQuery q1 = content_query(r, x, d), q2 = content_query(r, x, d);
    CHECK(q1.sigma == q2.sigma);
    CHECK(q1.feature == q2.feature);
    const ContentQuery q3 = content_query(r, x, Vec3(-1, 0, 0));
    CHECK(q3.sigma == q1.sigma);
    CHECK(q3.feature != q1.feature);
    CHECK(q1.sigma >= 0.0);
    CHECK_THROWS_AS(content_query(r, x, Vec3(1, 1, 0)), Error);
  }

  TEST_CASE("semantic query") {
    SemanticFieldShape shape;
    shape.grid_resolution = {6, 6, 6};
    shape.grid_channels = 4;
    shape.hidden = 8;
    shape.feature_dim = 3;
    SemanticField f = make_semantic_field(unit_layout(), shape, 5);
    const Vec3 x(0.3, 0.3, -0.3);
    CHECK(semantic_query(f, x) == semantic_query(f, x));
    CHECK(semantic_query(f, x) != semantic_query(f, Vec3(-0.8, 0.1, 0.5)));

    for (Tensor* t : f.grid_tensors()) t->fill(0.0);
    for (size_t l = 0; l < f.head.layers.size(); ++l)
      f.head.layers[l].bias = test::random_tensor({f.head.layers[l].out_dim()}, 20 + l, 0.1, 1.0);
    // Zero grid features: output is the head applied to a zero vector.
    const Tensor expect = mlp_forward(f.head, Tensor({1, shape.grid_channels}));
    for (const Vec3 p : {Vec3(0, 0, 0), Vec3(0.9, -0.9, 0.2)}) {
      const std::vector<Real> v = semantic_query(f, p);
      for (size_t c = 0; c < v.size(); ++c) {
        CHECK(v[c] == expect[c]);
        CHECK(v[c] != 0.0);
      }
    }
  }
}
