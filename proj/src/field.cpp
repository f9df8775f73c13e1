#include "fprf/field.hpp"

#include <cmath>

#include "fprf/error.hpp"
#include "fprf/numeric.hpp"
#include "fprf/rng.hpp"

namespace fprf {

namespace {

template <class Field>
std::vector<Tensor*> collect_grids(Field& f) {
  std::vector<Tensor*> out;
  for (auto& g : f.grids)
    for (Tensor* t : g.tensors()) out.push_back(t);
  return out;
}

void append(std::vector<Tensor*>& dst, std::vector<Tensor*> src) { dst.insert(dst.end(), src.begin(), src.end()); }

std::vector<TriPlaneGrid> zero_grids(const std::vector<TriPlaneGrid>& grids) {
  std::vector<TriPlaneGrid> out;
  out.reserve(grids.size());
  for (const auto& g : grids) out.push_back(g.zeros_like());
  return out;
}

std::vector<TriPlaneGrid> make_grids(const BlockLayout& layout, std::array<size_t, 3> res, size_t channels,
                                     uint64_t seed) {
  layout.validate();
  std::vector<TriPlaneGrid> grids;
  for (size_t b = 0; b < layout.block_count(); ++b) grids.push_back(make_triplane(res, channels, mix_seed(seed, b)));
  return grids;
}

}  // namespace

std::vector<Tensor*> ContentField::grid_tensors() { return collect_grids(*this); }
std::vector<Tensor*> ContentField::mlp_tensors() {
  std::vector<Tensor*> out = trunk.tensors();
  append(out, head.tensors());
  return out;
}
std::vector<Tensor*> ContentField::tensors() {
  std::vector<Tensor*> out = grid_tensors();
  append(out, mlp_tensors());
  return out;
}
std::vector<const Tensor*> ContentField::tensors() const {
  auto out = const_cast<ContentField*>(this)->tensors();
  return {out.begin(), out.end()};
}
ContentField ContentField::zeros_like() const {
  return ContentField{layout, zero_grids(grids), trunk.zeros_like(), head.zeros_like(), n_freq};
}

std::vector<Tensor*> SemanticField::grid_tensors() { return collect_grids(*this); }
std::vector<Tensor*> SemanticField::mlp_tensors() { return head.tensors(); }
std::vector<Tensor*> SemanticField::tensors() {
  std::vector<Tensor*> out = grid_tensors();
  append(out, mlp_tensors());
  return out;
}
std::vector<const Tensor*> SemanticField::tensors() const {
  auto out = const_cast<SemanticField*>(this)->tensors();
  return {out.begin(), out.end()};
}
SemanticField SemanticField::zeros_like() const { return SemanticField{layout, zero_grids(grids), head.zeros_like()}; }

ContentField make_content_field(const BlockLayout& layout, const ContentFieldShape& shape, uint64_t seed) {
  require(shape.trunk_width >= 2, ErrorKind::Config, "content trunk width must be >= 2");
  ContentField f;
  f.layout = layout;
  f.grids = make_grids(layout, shape.grid_resolution, shape.grid_channels, mix_seed(seed, 1));
  f.trunk = make_mlp({shape.grid_channels, shape.hidden, shape.trunk_width}, OutputActivation::Identity,
                     mix_seed(seed, 2));
  f.trunk.layers.back().bias[0] = shape.density_bias;
  const size_t head_in = shape.trunk_width - 1 + 6 * static_cast<size_t>(shape.n_freq);
  f.head = make_mlp({head_in, shape.hidden, shape.feature_dim}, OutputActivation::Identity, mix_seed(seed, 3));
  f.n_freq = shape.n_freq;
  return f;
}

SemanticField make_semantic_field(const BlockLayout& layout, const SemanticFieldShape& shape, uint64_t seed) {
  SemanticField f;
  f.layout = layout;
  f.grids = make_grids(layout, shape.grid_resolution, shape.grid_channels, mix_seed(seed, 11));
  f.head = make_mlp({shape.grid_channels, shape.hidden, shape.hidden, shape.feature_dim}, OutputActivation::Identity,
                    mix_seed(seed, 12));
  return f;
}

void blend_grid_features(const BlockLayout& layout, const std::vector<TriPlaneGrid>& grids, const Vec3& x,
                         Real* out) {
  const size_t c = grids.front().channels;
  const auto cover = block_lookup(layout, x);
  if (cover.size() == 1) {
    triplane_sample(grids[cover[0].block], cover[0].x_unit, out);
    return;
  }
  std::fill(out, out + c, 0.0);
  std::vector<Real> tmp(c);
  for (const auto& bw : cover) {
    triplane_sample(grids[bw.block], bw.x_unit, tmp.data());
    for (size_t k = 0; k < c; ++k) out[k] += bw.weight * tmp[k];
  }
}

void blend_grid_backward(const BlockLayout& layout, const std::vector<TriPlaneGrid>& grids, const Vec3& x,
                         const Real* grad, std::vector<TriPlaneGrid>& grad_grids) {
  for (const auto& bw : block_lookup(layout, x))
    triplane_sample_backward(grids[bw.block], bw.x_unit, grad, grad_grids[bw.block], bw.weight);
}

namespace {

Tensor grid_feature_matrix(const BlockLayout& layout, const std::vector<TriPlaneGrid>& grids,
                           std::span<const Vec3> points) {
  const size_t c = grids.front().channels;
  Tensor g({points.size(), c});
  for (size_t i = 0; i < points.size(); ++i) blend_grid_features(layout, grids, points[i], g.data() + i * c);
  return g;
}

}  // namespace

void eval_content_density(const ContentField& field, std::span<const Vec3> points, ContentSamples& s) {
  s.grid_features = grid_feature_matrix(field.layout, field.grids, points);
  const Tensor out = mlp_forward(field.trunk, s.grid_features, &s.trunk);
  s.sigma.resize(points.size());
  for (size_t i = 0; i < points.size(); ++i) s.sigma[i] = softplus(out.at(i, 0));
}

void eval_content_features(const ContentField& field, const Vec3& dir, size_t n, ContentSamples& s) {
  const Tensor& trunk_out = s.trunk.output;
  require(n <= trunk_out.rows(), ErrorKind::Dimension, "feature row count exceeds evaluated samples");
  const size_t geo = trunk_out.cols() - 1;
  const double d[3] = {dir[0], dir[1], dir[2]};
  const std::vector<Real> pe = positional_encoding(d, field.n_freq);
  const size_t width = geo + pe.size();
  require(width == field.head.in_dim(), ErrorKind::Dimension, "content head input width mismatch");
  Tensor in({n, width});
  for (size_t i = 0; i < n; ++i) {
    Real* row = in.data() + i * width;
    std::copy_n(trunk_out.data() + i * (geo + 1) + 1, geo, row);
    std::copy(pe.begin(), pe.end(), row + geo);
  }
  s.features = mlp_forward(field.head, in, &s.head);
}

Tensor content_backward(const ContentField& field, const ContentSamples& s, std::span<const Real> grad_sigma,
                        const Tensor& grad_features, ContentField& grad) {
  const size_t n = grad_features.rows();
  require(grad_sigma.size() == n, ErrorKind::Dimension, "density gradient length mismatch");
  const size_t k_all = s.trunk.output.rows();
  const size_t width = s.trunk.output.cols();
  const size_t geo = width - 1;

  Tensor grad_trunk({k_all, width});
  if (n > 0) {
    require(s.features.rows() >= n, ErrorKind::Dimension, "content features were evaluated for fewer rows");
    Tensor grad_head_in;
    if (s.features.rows() == n) {
      mlp_backward(field.head, s.head, grad_features, &grad.head, &grad_head_in);
    } else {
      Tensor padded({s.features.rows(), s.features.cols()});
      std::copy(grad_features.vec().begin(), grad_features.vec().end(), padded.vec().begin());
      mlp_backward(field.head, s.head, padded, &grad.head, &grad_head_in);
    }
    const size_t head_w = grad_head_in.cols();
    for (size_t i = 0; i < n; ++i) {
      std::copy_n(grad_head_in.data() + i * head_w, geo, grad_trunk.data() + i * width + 1);
      grad_trunk.at(i, 0) = grad_sigma[i] * sigmoid(s.trunk.output.at(i, 0));
    }
  }
  Tensor grad_grid;
  mlp_backward(field.trunk, s.trunk, grad_trunk, &grad.trunk, &grad_grid);
  Tensor out({n, grad_grid.cols()});
  std::copy_n(grad_grid.data(), out.size(), out.data());
  return out;
}

void eval_semantic(const SemanticField& field, std::span<const Vec3> points, SemanticSamples& s) {
  s.grid_features = grid_feature_matrix(field.layout, field.grids, points);
  s.features = mlp_forward(field.head, s.grid_features, &s.head);
}

Tensor semantic_backward(const SemanticField& field, const SemanticSamples& s, const Tensor& grad_features,
                         SemanticField& grad) {
  Tensor grad_grid;
  mlp_backward(field.head, s.head, grad_features, &grad.head, &grad_grid);
  return grad_grid;
}

void scatter_grid_gradient(const BlockLayout& layout, const std::vector<TriPlaneGrid>& grids,
                           std::span<const Vec3> points, const Tensor& grad_grid_features,
                           std::vector<TriPlaneGrid>& grad_grids) {
  const size_t c = grad_grid_features.cols();
  for (size_t i = 0; i < grad_grid_features.rows(); ++i)
    blend_grid_backward(layout, grids, points[i], grad_grid_features.data() + i * c, grad_grids);
}

ContentQuery content_query(const ContentField& field, const Vec3& x, const Vec3& d) {
  require(std::abs(d.norm() - 1.0) <= 1e-4, ErrorKind::Domain, "view direction must be unit length");
  ContentSamples s;
  const Vec3 pts[1] = {x};
  eval_content_density(field, pts, s);
  eval_content_features(field, d, 1, s);
  return {s.sigma[0], std::vector<Real>(s.features.vec().begin(), s.features.vec().end())};
}

std::vector<Real> semantic_query(const SemanticField& field, const Vec3& x) {
  SemanticSamples s;
  const Vec3 pts[1] = {x};
  eval_semantic(field, pts, s);
  return s.features.vec();
}

}  // namespace fprf
