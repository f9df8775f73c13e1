#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "fprf/adam.hpp"
#include "fprf/dataset.hpp"
#include "fprf/decoder.hpp"
#include "fprf/field.hpp"
#include "fprf/render.hpp"

namespace fprf {

struct TrainConfig {
  size_t steps = 600;
  size_t rays_per_batch = 512;
  size_t samples = 48;
  Real lr_grid = 5e-3;
  Real lr_mlp = 1e-3;
  Real beta1 = 0.9, beta2 = 0.999, adam_eps = 1e-8;
  Real lambda_rgb = 1.0;
  Real lambda_reg = 1e-3;
  Real lambda_semantic = 1.0;
  Real ema_decay = 0.99;
  uint64_t seed = 0;
  Real early_stop = 1e-4;
  bool stratified = true;
  size_t eval_every = 200;  // 0 disables periodic evaluation
  size_t eval_samples = 64;
  bool learn_decoder = false;  // ablation: decoder trained with the scene
  bool train_semantic = true;

  std::array<int, 3> blocks{1, 1, 1};
  Real overlap = 0.1;
  ContentFieldShape content;
  SemanticFieldShape semantic;

  EncoderSpec style_encoder = EncoderSpec::style_default();
  EncoderSpec semantic_encoder = EncoderSpec::semantic_default();
  UpsampleParams upsample;

  std::string cache_dir;  // per-view targets are cached here when set

  void validate() const;
};

// Pixel-resolution supervision for one view, rows in raster order.
struct ViewTargets {
  Tensor color;     // [HW x 3]
  Tensor content;   // [HW x C_V]
  Tensor semantic;  // [HW x C_D], empty when semantics are not trained
};

struct SceneTargets {
  std::vector<ViewTargets> views;
  // Features of an all-black image. The transmittance left at the end of a
  // ray is composited with these, just as colors composite onto black.
  std::vector<Real> background_content;
  std::vector<Real> background_semantic;
};

SceneTargets compute_targets(const SceneDataset& dataset, const TrainConfig& config);

struct RayBatch {
  std::vector<Ray> rays;
  Tensor color;     // [B x 3]
  Tensor content;   // [B x C_V]
  Tensor semantic;  // [B x C_D]
  std::vector<Real> background_content;
  std::vector<Real> background_semantic;
  uint64_t seed = 0;  // stratified sampling stream
};

RayBatch sample_batch(const SceneDataset& dataset, const SceneTargets& targets, const std::vector<size_t>& views,
                      size_t rays, uint64_t seed);

struct LossBreakdown {
  Real feature = 0.0;   // mean over rays of |F - F_hat|^2
  Real color = 0.0;     // mean over rays of |C - C_hat|^2 (before lambda_rgb)
  Real semantic = 0.0;  // mean over rays of |S - S_hat|_1
  Real tv_content = 0.0;
  Real tv_semantic = 0.0;
  Real content_total = 0.0;   // feature + lambda_rgb color + lambda_reg tv_content
  Real semantic_total = 0.0;  // lambda_semantic semantic + lambda_reg tv_semantic
  Tensor rendered_content;    // [B x C_V]
  Tensor rendered_color;      // [B x 3]
  Tensor rendered_semantic;   // [B x C_D]
};

// Mean squared difference of axis-adjacent values, averaged over the planes
// of every block. Gradients are accumulated into grad when given.
Real tv_regularizer(const std::vector<TriPlaneGrid>& grids, std::vector<TriPlaneGrid>* grad);

// Content objective with gradients to the content field (and the decoder
// when decoder_grad is non-null). Decoder parameters are never modified.
Real content_loss(const RayBatch& batch, const ContentField& field, const ColorDecoder& decoder,
                  const TrainConfig& config, ContentField* grad, MlpParams* decoder_grad = nullptr,
                  LossBreakdown* breakdown = nullptr);

// Semantic objective. Density comes from the content field but receives no
// gradient; content_grad, when given, is left untouched.
Real semantic_loss(const RayBatch& batch, const SemanticField& field, const ContentField& content,
                   const TrainConfig& config, SemanticField* grad, LossBreakdown* breakdown = nullptr);

// Both objectives in one pass over the batch (shared density evaluation).
LossBreakdown scene_losses(const RayBatch& batch, const ContentField& content, const SemanticField* semantic,
                           const ColorDecoder& decoder, const TrainConfig& config, ContentField* content_grad,
                           SemanticField* semantic_grad, MlpParams* decoder_grad);

struct TrainState {
  ContentField content;
  SemanticField semantic;
  ContentStats stats;
  std::vector<AdamState> adam;  // grids, MLPs, decoder
  uint64_t step = 0;
  std::optional<ColorDecoder> decoder;  // learned copy in the ablation
};

TrainState init_train_state(const SceneDataset& dataset, const TrainConfig& config);

struct TrainRecord {
  uint64_t step = 0;
  Real loss = 0.0;
  Real content_loss = 0.0;
  Real semantic_loss = 0.0;
  std::optional<Real> psnr;
  double wall_time = 0.0;

  std::string to_json() const;
};

struct TrainResult {
  TrainState state;
  std::vector<TrainRecord> records;  // one per step
  Real final_psnr = 0.0;             // mean over held-out views
  double seconds = 0.0;
};

// Runs config.steps optimization steps, continuing from resume when given.
// on_record sees every record as soon as it is produced.
TrainResult train_scene(const SceneDataset& dataset, const ColorDecoder& decoder, const TrainConfig& config,
                        std::optional<TrainState> resume = std::nullopt,
                        const std::function<void(const TrainRecord&)>& on_record = {});

// Mean PSNR of color renders over the given views.
Real evaluate_psnr(const SceneDataset& dataset, const std::vector<size_t>& views, const ContentField& content,
                   const ColorDecoder& decoder, size_t samples);

std::vector<size_t> training_views(const SceneDataset& dataset);
std::vector<size_t> holdout_views(const SceneDataset& dataset);

}  // namespace fprf
