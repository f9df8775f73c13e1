#pragma once

#include <cstdint>
#include <vector>

#include "fprf/tensor.hpp"

namespace fprf {

struct AdamConfig {
  Real lr = 1e-3;
  Real beta1 = 0.9;
  Real beta2 = 0.999;
  Real eps = 1e-8;
};

struct AdamState {
  std::vector<Tensor> m;
  std::vector<Tensor> v;
  uint64_t step = 0;
};

// One bias-corrected Adam update. The state is sized on first use; later
// calls must pass tensors of the same shapes in the same order.
void adam_step(const std::vector<Tensor*>& params, const std::vector<const Tensor*>& grads, AdamState& state,
               const AdamConfig& config);

}  // namespace fprf
