#include "fprf/adam.hpp"

#include <cmath>

#include "fprf/error.hpp"

namespace fprf {

void adam_step(const std::vector<Tensor*>& params, const std::vector<const Tensor*>& grads, AdamState& state,
               const AdamConfig& config) {
  require(params.size() == grads.size(), ErrorKind::Dimension, "adam: parameter and gradient counts differ");
  if (state.m.empty()) {
    for (const Tensor* p : params) {
      state.m.push_back(Tensor::zeros_like(*p));
      state.v.push_back(Tensor::zeros_like(*p));
    }
  }
  require(state.m.size() == params.size(), ErrorKind::Dimension, "adam: state does not match parameter list");
  for (size_t i = 0; i < params.size(); ++i) {
    require(params[i]->shape() == grads[i]->shape() && state.m[i].shape() == params[i]->shape(),
            ErrorKind::Dimension, "adam: shape mismatch at tensor " + std::to_string(i));
  }
  ++state.step;
  const Real t = static_cast<Real>(state.step);
  const Real c1 = 1.0 - std::pow(config.beta1, t);
  const Real c2 = 1.0 - std::pow(config.beta2, t);
  for (size_t i = 0; i < params.size(); ++i) {
    Real* p = params[i]->data();
    const Real* g = grads[i]->data();
    Real* m = state.m[i].data();
    Real* v = state.v[i].data();
    const size_t n = params[i]->size();
    for (size_t j = 0; j < n; ++j) {
      m[j] = config.beta1 * m[j] + (1.0 - config.beta1) * g[j];
      v[j] = config.beta2 * v[j] + (1.0 - config.beta2) * g[j] * g[j];
      const Real mhat = m[j] / c1;
      const Real vhat = v[j] / c2;
      p[j] -= config.lr * mhat / (std::sqrt(vhat) + config.eps);
    }
  }
}

}  // namespace fprf
