#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "fprf/camera.hpp"
#include "fprf/checkpoint.hpp"
#include "fprf/decoder.hpp"
#include "fprf/error.hpp"
#include "fprf/field.hpp"
#include "fprf/rng.hpp"
#include "fprf/synthetic.hpp"
#include "fprf/tensor.hpp"
#include "fprf/train.hpp"

namespace fprf::test {

Tensor random_tensor(std::vector<size_t> shape, uint64_t seed, Real lo = -1.0, Real hi = 1.0);

Real max_abs_diff(const Tensor& a, const Tensor& b);  // throws on a size mismatch

// Single-channel guided filter evaluated window by window from the definitions.
Tensor naive_guided_filter(const Tensor& guide, const Tensor& p, int r, Real eps);

// |a - b| / max(|a|, |b|, floor). The floor keeps entries whose true
// gradient is ~0 from turning finite-difference round-off into a failure.
inline constexpr Real kGradientFloor = 1e-6;
Real relative_error(Real a, Real b, Real floor = kGradientFloor);

// Central differences of loss() over every entry of params, compared with
// the matching entries of analytic. Returns the largest relative error.
Real finite_difference_check(const std::vector<Tensor*>& params, const std::vector<const Tensor*>& analytic,
                             const std::function<Real()>& loss, Real h = 1e-4);

struct GradientCheck {
  std::string name;
  Real max_rel_error = 0.0;
  size_t entries = 0;
};

// Every differentiable path on seeded micro instances.
std::vector<GradientCheck> run_gradient_suite();

// Micro scene: a tiny field, random targets and a handful of rays.
struct MicroScene {
  TrainConfig config;
  ContentField content;
  SemanticField semantic;
  ColorDecoder decoder;
  RayBatch batch;
};
MicroScene make_micro_scene(uint64_t seed, std::array<int, 3> blocks = {1, 1, 1});

// Decoder pretrained with the default settings, cached on disk between test
// binaries (pretraining is deterministic, so the cache only saves time).
const ColorDecoder& shared_decoder();
const DecoderPretrainResult& shared_pretraining();

std::string scratch_dir(const std::string& name);

// Standard fixtures: the three-object toy scene and the two-region scene,
// 32 views at 64x64.
const SceneDataset& toy_dataset();
const SceneDataset& two_region_dataset();
// Two-region training: oracle semantics, 300 steps.
TrainConfig two_region_config();

struct TrainedScene {
  SceneCheckpoint checkpoint;  // as read back from disk
  Real final_psnr = 0.0;
  double seconds = 0.0;  // wall time of the run that produced it
  std::vector<Real> loss;  // per step
};

// Trains on the shared decoder, or loads the run cached under name. retrain
// forces a fresh run and replaces the cache.
TrainedScene trained_scene(const std::string& name, const SceneDataset& dataset, const TrainConfig& config,
                           bool retrain = false);

// Kind of the fprf::Error thrown by fn, nullopt when it returns normally.
std::optional<ErrorKind> thrown_kind(const std::function<void()>& fn);

// Square-pixel pinhole with focal length = width and the principal point at the center.
CameraModel pinhole(size_t w, size_t h, const Mat4& pose);

}  // namespace fprf::test
