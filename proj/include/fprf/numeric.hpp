#pragma once

#include <cstdint>
#include <vector>

#include "fprf/tensor.hpp"

namespace fprf {

inline constexpr Real kVarianceEpsilon = 1e-8;

struct ChannelStats {
  Tensor mean;  // [C]
  Tensor std;   // [C], sqrt(population variance + kVarianceEpsilon)
};

// Column statistics of an [n x C] matrix (any tensor is viewed as rows over
// its last axis). Two-pass: mean first, then centered squares.
ChannelStats channel_stats(const Tensor& features);

// Gradient of L w.r.t. the features given dL/dmean and dL/dstd.
Tensor channel_stats_backward(const Tensor& features, const ChannelStats& stats, const Tensor& grad_mean,
                              const Tensor& grad_std);

// Row-wise softmax with max subtraction. Throws on non-finite input.
Tensor softmax_rows(const Tensor& logits);

// For v in R^d returns 2*d*n_freq values ordered frequency-major:
// for j in [0, n_freq): for i in [0, d): sin(2^j pi v_i), cos(2^j pi v_i).
std::vector<Real> positional_encoding(std::span<const Real> v, int n_freq);

Real softplus(Real x);
Real sigmoid(Real x);

}  // namespace fprf
