#include "fprf/mlp.hpp"

#include <cmath>

#include "fprf/error.hpp"
#include "fprf/rng.hpp"

namespace fprf {

size_t MlpParams::parameter_count() const {
  size_t n = 0;
  for (const auto& l : layers) n += l.weight.size() + l.bias.size();
  return n;
}

std::vector<Tensor*> MlpParams::tensors() {
  std::vector<Tensor*> out;
  for (auto& l : layers) {
    out.push_back(&l.weight);
    out.push_back(&l.bias);
  }
  return out;
}

std::vector<const Tensor*> MlpParams::tensors() const {
  std::vector<const Tensor*> out;
  for (const auto& l : layers) {
    out.push_back(&l.weight);
    out.push_back(&l.bias);
  }
  return out;
}

MlpParams MlpParams::zeros_like() const {
  MlpParams z;
  z.output = output;
  for (const auto& l : layers) z.layers.push_back({Tensor::zeros_like(l.weight), Tensor::zeros_like(l.bias)});
  return z;
}

MlpParams make_mlp(const std::vector<size_t>& widths, OutputActivation output, uint64_t seed) {
  require(widths.size() >= 2, ErrorKind::Domain, "mlp needs at least input and output widths");
  Rng rng(seed);
  MlpParams p;
  p.output = output;
  for (size_t l = 0; l + 1 < widths.size(); ++l) {
    const size_t in = widths[l], out = widths[l + 1];
    DenseLayer layer{Tensor({out, in}), Tensor({out})};
    const double bound = std::sqrt(6.0 / static_cast<double>(in));
    for (auto& w : layer.weight.vec()) w = rng.uniform(-bound, bound);
    p.layers.push_back(std::move(layer));
  }
  return p;
}

namespace {

Tensor transpose(const Tensor& w) {
  const size_t r = w.dim(0), c = w.dim(1);
  Tensor t({c, r});
  for (size_t i = 0; i < r; ++i)
    for (size_t j = 0; j < c; ++j) t[j * r + i] = w[i * c + j];
  return t;
}

inline Real sigmoid(Real z) { return 1.0 / (1.0 + std::exp(-z)); }

}  // namespace

Tensor mlp_forward(const MlpParams& params, const Tensor& x, MlpCache* cache) {
  require(!params.layers.empty(), ErrorKind::Domain, "mlp has no layers");
  require(x.rank() == 2, ErrorKind::Dimension, "mlp input must be a matrix, got " + shape_string(x.shape()));
  const size_t n = x.dim(0);
  if (cache) {
    cache->inputs.resize(params.layers.size());
    cache->preact.resize(params.layers.size());
  }
  Tensor cur = x;
  for (size_t l = 0; l < params.layers.size(); ++l) {
    const DenseLayer& layer = params.layers[l];
    const size_t in = layer.in_dim(), out = layer.out_dim();
    require(cur.dim(1) == in, ErrorKind::Dimension,
            "mlp layer " + std::to_string(l) + " expects input width " + std::to_string(in) + ", got " +
                std::to_string(cur.dim(1)));
    require(layer.bias.size() == out, ErrorKind::Dimension, "mlp layer " + std::to_string(l) + " bias size mismatch");
    const Tensor wt = transpose(layer.weight);
    Tensor z({n, out});
    for (size_t r = 0; r < n; ++r) {
      Real* zr = z.data() + r * out;
      const Real* xr = cur.data() + r * in;
      for (size_t o = 0; o < out; ++o) zr[o] = layer.bias[o];
      for (size_t i = 0; i < in; ++i) {
        const Real xi = xr[i];
        if (xi == 0.0) continue;
        const Real* wi = wt.data() + i * out;
        for (size_t o = 0; o < out; ++o) zr[o] += wi[o] * xi;
      }
    }
    const bool last = l + 1 == params.layers.size();
    Tensor a = z;
    if (!last) {
      for (auto& v : a.vec()) v = v > 0.0 ? v : 0.0;
    } else if (params.output == OutputActivation::Sigmoid) {
      for (auto& v : a.vec()) v = sigmoid(v);
    }
    if (cache) {
      cache->inputs[l] = std::move(cur);
      cache->preact[l] = std::move(z);
    }
    cur = std::move(a);
  }
  if (cache) cache->output = cur;
  return cur;
}

void mlp_backward(const MlpParams& params, const MlpCache& cache, const Tensor& grad_y, MlpParams* grad_params,
                  Tensor* grad_x) {
  const size_t depth = params.layers.size();
  require(cache.inputs.size() == depth && cache.preact.size() == depth, ErrorKind::Dimension,
          "mlp cache does not match network depth");
  require(grad_y.shape() == cache.output.shape(), ErrorKind::Dimension,
          "mlp output gradient shape " + shape_string(grad_y.shape()) + " does not match output " +
              shape_string(cache.output.shape()));
  if (grad_params)
    require(grad_params->layers.size() == depth, ErrorKind::Dimension, "gradient accumulator depth mismatch");

  // g holds dL/dz for the current layer.
  Tensor g = grad_y;
  if (params.output == OutputActivation::Sigmoid) {
    const auto& y = cache.output.vec();
    for (size_t k = 0; k < g.size(); ++k) g[k] *= y[k] * (1.0 - y[k]);
  }
  for (size_t l = depth; l-- > 0;) {
    const DenseLayer& layer = params.layers[l];
    const Tensor& in_act = cache.inputs[l];
    const size_t n = in_act.dim(0), in = layer.in_dim(), out = layer.out_dim();
    if (grad_params) {
      DenseLayer& gl = grad_params->layers[l];
      for (size_t r = 0; r < n; ++r) {
        const Real* gr = g.data() + r * out;
        const Real* xr = in_act.data() + r * in;
        for (size_t o = 0; o < out; ++o) {
          const Real go = gr[o];
          if (go == 0.0) continue;
          gl.bias[o] += go;
          Real* gw = gl.weight.data() + o * in;
          for (size_t i = 0; i < in; ++i) gw[i] += go * xr[i];
        }
      }
    }
    const bool need_input_grad = l > 0 || grad_x != nullptr;
    if (!need_input_grad) break;
    Tensor gin({n, in});
    for (size_t r = 0; r < n; ++r) {
      const Real* gr = g.data() + r * out;
      Real* gi = gin.data() + r * in;
      for (size_t o = 0; o < out; ++o) {
        const Real go = gr[o];
        if (go == 0.0) continue;
        const Real* w = layer.weight.data() + o * in;
        for (size_t i = 0; i < in; ++i) gi[i] += go * w[i];
      }
    }
    if (l == 0) {
      *grad_x = std::move(gin);
      break;
    }
    // Through the ReLU feeding this layer.
    const Tensor& prev_z = cache.preact[l - 1];
    for (size_t k = 0; k < gin.size(); ++k)
      if (!(prev_z[k] > 0.0)) gin[k] = 0.0;
    g = std::move(gin);
  }
}

MlpGrads mlp_backward(const MlpParams& params, const MlpCache& cache, const Tensor& grad_y) {
  MlpGrads out{params.zeros_like(), {}};
  mlp_backward(params, cache, grad_y, &out.params, &out.x);
  return out;
}

}  // namespace fprf
