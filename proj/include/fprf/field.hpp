#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "fprf/block_layout.hpp"
#include "fprf/mlp.hpp"
#include "fprf/triplane.hpp"

namespace fprf {

struct ContentFieldShape {
  std::array<size_t, 3> grid_resolution{64, 64, 64};
  size_t grid_channels = 16;
  size_t hidden = 32;        // trunk and head hidden width
  size_t trunk_width = 32;   // trunk output; column 0 is the raw density
  size_t feature_dim = 32;   // content feature width
  int n_freq = 4;            // direction encoding frequencies
  Real density_bias = -5.0;  // initial raw density, keeps a fresh field near-empty
};

struct SemanticFieldShape {
  std::array<size_t, 3> grid_resolution{64, 64, 64};
  size_t grid_channels = 16;
  size_t hidden = 32;
  size_t feature_dim = 16;
};

// Density + view-conditioned content feature. The trunk maps the blended
// grid feature to [raw density | geometry features]; the head sees the
// geometry features concatenated with the encoded view direction.
struct ContentField {
  BlockLayout layout;
  std::vector<TriPlaneGrid> grids;  // one per block
  MlpParams trunk;
  MlpParams head;
  int n_freq = 4;

  size_t grid_channels() const { return grids.front().channels; }
  size_t feature_dim() const { return head.out_dim(); }

  std::vector<Tensor*> grid_tensors();
  std::vector<Tensor*> mlp_tensors();
  std::vector<Tensor*> tensors();
  std::vector<const Tensor*> tensors() const;
  ContentField zeros_like() const;
};

// View-independent semantic feature: blended grid feature -> head.
struct SemanticField {
  BlockLayout layout;
  std::vector<TriPlaneGrid> grids;
  MlpParams head;

  size_t grid_channels() const { return grids.front().channels; }
  size_t feature_dim() const { return head.out_dim(); }

  std::vector<Tensor*> grid_tensors();
  std::vector<Tensor*> mlp_tensors();
  std::vector<Tensor*> tensors();
  std::vector<const Tensor*> tensors() const;
  SemanticField zeros_like() const;
};

ContentField make_content_field(const BlockLayout& layout, const ContentFieldShape& shape, uint64_t seed);
SemanticField make_semantic_field(const BlockLayout& layout, const SemanticFieldShape& shape, uint64_t seed);

// Weighted sum of per-block tri-plane samples.
void blend_grid_features(const BlockLayout& layout, const std::vector<TriPlaneGrid>& grids, const Vec3& x,
                         Real* out);
void blend_grid_backward(const BlockLayout& layout, const std::vector<TriPlaneGrid>& grids, const Vec3& x,
                         const Real* grad, std::vector<TriPlaneGrid>& grad_grids);

// Batched evaluation along one ray (or any point list sharing a direction).
struct ContentSamples {
  Tensor grid_features;  // [K x Cg]
  MlpCache trunk;
  std::vector<Real> sigma;  // [K]
  MlpCache head;
  Tensor features;  // [n x C_V], rows for the first n samples
};

// Grid lookup, trunk and density for every point.
void eval_content_density(const ContentField& field, std::span<const Vec3> points, ContentSamples& s);
// Content features for the first n points (n <= K) viewed along dir.
void eval_content_features(const ContentField& field, const Vec3& dir, size_t n, ContentSamples& s);
// Accumulates MLP gradients into grad.trunk / grad.head and returns dL/d(grid
// features) for the first n rows, where n = grad_features.rows().
Tensor content_backward(const ContentField& field, const ContentSamples& s, std::span<const Real> grad_sigma,
                        const Tensor& grad_features, ContentField& grad);

struct SemanticSamples {
  Tensor grid_features;
  MlpCache head;
  Tensor features;  // [K x C_D]
};
void eval_semantic(const SemanticField& field, std::span<const Vec3> points, SemanticSamples& s);
Tensor semantic_backward(const SemanticField& field, const SemanticSamples& s, const Tensor& grad_features,
                         SemanticField& grad);

// Pushes per-point grid-feature gradients into dense plane gradients.
void scatter_grid_gradient(const BlockLayout& layout, const std::vector<TriPlaneGrid>& grids,
                           std::span<const Vec3> points, const Tensor& grad_grid_features,
                           std::vector<TriPlaneGrid>& grad_grids);

struct ContentQuery {
  Real sigma;
  std::vector<Real> feature;
};

// Single-point queries. d must be unit length within 1e-4.
ContentQuery content_query(const ContentField& field, const Vec3& x_world, const Vec3& d);
std::vector<Real> semantic_query(const SemanticField& field, const Vec3& x_world);

}  // namespace fprf
