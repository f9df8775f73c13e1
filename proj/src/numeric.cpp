#include "fprf/numeric.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "fprf/error.hpp"

namespace fprf {

ChannelStats channel_stats(const Tensor& features) {
  const size_t n = features.rows(), c = features.cols();
  require(n >= 1 && c >= 1, ErrorKind::Domain, "channel_stats needs at least one row");
  ChannelStats s{Tensor({c}), Tensor({c})};
  for (size_t r = 0; r < n; ++r) {
    const Real* row = features.data() + r * c;
    for (size_t k = 0; k < c; ++k) s.mean[k] += row[k];
  }
  for (size_t k = 0; k < c; ++k) s.mean[k] /= static_cast<Real>(n);
  for (size_t r = 0; r < n; ++r) {
    const Real* row = features.data() + r * c;
    for (size_t k = 0; k < c; ++k) {
      const Real d = row[k] - s.mean[k];
      s.std[k] += d * d;
    }
  }
  for (size_t k = 0; k < c; ++k) s.std[k] = std::sqrt(s.std[k] / static_cast<Real>(n) + kVarianceEpsilon);
  return s;
}

Tensor channel_stats_backward(const Tensor& features, const ChannelStats& stats, const Tensor& grad_mean,
                              const Tensor& grad_std) {
  const size_t n = features.rows(), c = features.cols();
  Tensor g = Tensor::zeros_like(features);
  const Real inv_n = 1.0 / static_cast<Real>(n);
  for (size_t r = 0; r < n; ++r) {
    const Real* row = features.data() + r * c;
    Real* gr = g.data() + r * c;
    for (size_t k = 0; k < c; ++k) {
      // d std / d x = (x - mean) / (n std); the mean term of the variance
      // derivative cancels because centered values sum to zero.
      gr[k] = grad_mean[k] * inv_n + grad_std[k] * (row[k] - stats.mean[k]) * inv_n / stats.std[k];
    }
  }
  return g;
}

Tensor softmax_rows(const Tensor& logits) {
  require(logits.all_finite(), ErrorKind::Numeric, "softmax_rows received non-finite logits");
  Tensor out = logits;
  const size_t rows = out.rows(), cols = out.cols();
  for (size_t r = 0; r < rows; ++r) {
    Real* row = out.data() + r * cols;
    const Real mx = *std::max_element(row, row + cols);
    Real sum = 0.0;
    for (size_t k = 0; k < cols; ++k) {
      row[k] = std::exp(row[k] - mx);
      sum += row[k];
    }
    for (size_t k = 0; k < cols; ++k) row[k] /= sum;
  }
  return out;
}

std::vector<Real> positional_encoding(std::span<const Real> v, int n_freq) {
  require(n_freq >= 1, ErrorKind::Domain, "positional_encoding needs n_freq >= 1");
  std::vector<Real> out;
  out.reserve(2 * v.size() * static_cast<size_t>(n_freq));
  for (int j = 0; j < n_freq; ++j) {
    const Real scale = std::ldexp(std::numbers::pi, j);
    for (Real x : v) {
      out.push_back(std::sin(scale * x));
      out.push_back(std::cos(scale * x));
    }
  }
  return out;
}

Real softplus(Real x) { return x > 30.0 ? x : std::log1p(std::exp(x)); }

Real sigmoid(Real x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace fprf
