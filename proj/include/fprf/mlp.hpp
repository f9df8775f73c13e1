#pragma once

#include <cstdint>
#include <vector>

#include "fprf/tensor.hpp"

namespace fprf {

enum class OutputActivation { Identity, Sigmoid };

struct DenseLayer {
  Tensor weight;  // [out x in]
  Tensor bias;    // [out]

  size_t in_dim() const { return weight.dim(1); }
  size_t out_dim() const { return weight.dim(0); }
};

// Fully connected stack: ReLU after every hidden layer, configurable
// activation on the last one.
struct MlpParams {
  std::vector<DenseLayer> layers;
  OutputActivation output = OutputActivation::Identity;

  size_t in_dim() const { return layers.front().in_dim(); }
  size_t out_dim() const { return layers.back().out_dim(); }
  size_t parameter_count() const;

  std::vector<Tensor*> tensors();
  std::vector<const Tensor*> tensors() const;

  // Same architecture, all parameters zero. Used as a gradient accumulator.
  MlpParams zeros_like() const;
};

// widths = {in, hidden..., out}. Weights are He-uniform (bound sqrt(6/in)),
// biases zero.
MlpParams make_mlp(const std::vector<size_t>& widths, OutputActivation output, uint64_t seed);

struct MlpCache {
  std::vector<Tensor> inputs;  // input to each layer (post-activation of the previous one)
  std::vector<Tensor> preact;  // pre-activation of each layer
  Tensor output;
};

// x is [n x in]. Throws ErrorKind::Dimension naming the offending layer.
Tensor mlp_forward(const MlpParams& params, const Tensor& x, MlpCache* cache = nullptr);

// Reverse-mode pass. Parameter gradients are accumulated into grad_params
// (when given), input gradient written to grad_x (when given). The ReLU
// subgradient at exactly zero is 0.
void mlp_backward(const MlpParams& params, const MlpCache& cache, const Tensor& grad_y,
                  MlpParams* grad_params, Tensor* grad_x);

struct MlpGrads {
  MlpParams params;
  Tensor x;
};
MlpGrads mlp_backward(const MlpParams& params, const MlpCache& cache, const Tensor& grad_y);

}  // namespace fprf
