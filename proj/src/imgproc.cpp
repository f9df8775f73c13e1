#include "fprf/imgproc.hpp"

#include <algorithm>
#include <cmath>

#include "fprf/error.hpp"

namespace fprf {

namespace {

void require_image(const Tensor& t, const char* what) {
  require(t.rank() == 3, ErrorKind::Dimension, std::string(what) + " must be [H x W x C], got " + shape_string(t.shape()));
}

// Box sum over truncated windows via a summed-area table, per channel.
Tensor box_sum(const Tensor& img, int r, bool normalize) {
  const size_t h = img.dim(0), w = img.dim(1), c = img.dim(2);
  const size_t sw = w + 1;
  std::vector<Real> sat((h + 1) * sw * c, 0.0);
  for (size_t y = 0; y < h; ++y) {
    for (size_t x = 0; x < w; ++x) {
      for (size_t k = 0; k < c; ++k) {
        sat[((y + 1) * sw + x + 1) * c + k] = img.at(y, x, k) + sat[(y * sw + x + 1) * c + k] +
                                              sat[((y + 1) * sw + x) * c + k] - sat[(y * sw + x) * c + k];
      }
    }
  }
  Tensor out(img.shape());
  const long hh = static_cast<long>(h), ww = static_cast<long>(w);
  for (long y = 0; y < hh; ++y) {
    const size_t y0 = static_cast<size_t>(std::max(0L, y - r));
    const size_t y1 = static_cast<size_t>(std::min(hh - 1, y + r)) + 1;
    for (long x = 0; x < ww; ++x) {
      const size_t x0 = static_cast<size_t>(std::max(0L, x - r));
      const size_t x1 = static_cast<size_t>(std::min(ww - 1, x + r)) + 1;
      const Real count = static_cast<Real>((y1 - y0) * (x1 - x0));
      for (size_t k = 0; k < c; ++k) {
        Real s = sat[(y1 * sw + x1) * c + k] - sat[(y0 * sw + x1) * c + k] - sat[(y1 * sw + x0) * c + k] +
                 sat[(y0 * sw + x0) * c + k];
        out.at(static_cast<size_t>(y), static_cast<size_t>(x), k) = normalize ? s / count : s;
      }
    }
  }
  return out;
}

Tensor window_counts(size_t h, size_t w, int r) {
  Tensor ones({h, w, 1}, 1.0);
  return box_sum(ones, r, false);
}

}  // namespace

Tensor box_mean(const Tensor& img, int radius) {
  require_image(img, "box_mean input");
  require(radius >= 0, ErrorKind::Domain, "box radius must be >= 0");
  return box_sum(img, radius, true);
}

Tensor box_mean_adjoint(const Tensor& grad, int radius) {
  require_image(grad, "box_mean_adjoint input");
  // Windows are symmetric, so J^T g = box_sum(g / count).
  const size_t h = grad.dim(0), w = grad.dim(1), c = grad.dim(2);
  const Tensor counts = window_counts(h, w, radius);
  Tensor scaled = grad;
  for (size_t p = 0; p < h * w; ++p)
    for (size_t k = 0; k < c; ++k) scaled[p * c + k] /= counts[p];
  return box_sum(scaled, radius, false);
}

Tensor to_gray(const Tensor& img) {
  require_image(img, "to_gray input");
  const size_t h = img.dim(0), w = img.dim(1), c = img.dim(2);
  Tensor g({h, w, 1});
  for (size_t p = 0; p < h * w; ++p) {
    Real s = 0.0;
    for (size_t k = 0; k < c; ++k) s += img[p * c + k];
    g[p] = s / static_cast<Real>(c);
  }
  return g;
}

namespace {

struct GuideTerms {
  Tensor gray;    // I
  Tensor mean_i;  // box(I)
  Tensor denom;   // var(I) + eps
};

GuideTerms guide_terms(const Tensor& guide, int radius, Real eps) {
  GuideTerms t;
  t.gray = to_gray(guide);
  t.mean_i = box_sum(t.gray, radius, true);
  Tensor sq = t.gray;
  for (auto& v : sq.vec()) v *= v;
  const Tensor mean_ii = box_sum(sq, radius, true);
  t.denom = Tensor(t.gray.shape());
  for (size_t p = 0; p < sq.size(); ++p) t.denom[p] = mean_ii[p] - t.mean_i[p] * t.mean_i[p] + eps;
  return t;
}

void check_filter_args(const Tensor& guide, const Tensor& input, int radius, Real eps) {
  require_image(guide, "guided_filter guide");
  require_image(input, "guided_filter input");
  require(guide.dim(0) == input.dim(0) && guide.dim(1) == input.dim(1), ErrorKind::Dimension,
          "guided_filter guide " + shape_string(guide.shape()) + " and input " + shape_string(input.shape()) +
              " differ in H, W");
  require(radius >= 1, ErrorKind::Domain, "guided_filter radius must be >= 1");
  require(eps > 0.0, ErrorKind::Domain, "guided_filter eps must be > 0");
}

}  // namespace

Tensor guided_filter(const Tensor& guide, const Tensor& input, int radius, Real eps) {
  check_filter_args(guide, input, radius, eps);
  const size_t hw = input.dim(0) * input.dim(1), c = input.dim(2);
  const GuideTerms g = guide_terms(guide, radius, eps);

  Tensor ip = input;
  for (size_t p = 0; p < hw; ++p)
    for (size_t k = 0; k < c; ++k) ip[p * c + k] *= g.gray[p];
  const Tensor mean_p = box_sum(input, radius, true);
  const Tensor corr_ip = box_sum(ip, radius, true);

  Tensor a(input.shape()), b(input.shape());
  for (size_t p = 0; p < hw; ++p) {
    for (size_t k = 0; k < c; ++k) {
      const size_t q = p * c + k;
      const Real cov = corr_ip[q] - g.mean_i[p] * mean_p[q];
      a[q] = cov / g.denom[p];
      b[q] = mean_p[q] - a[q] * g.mean_i[p];
    }
  }
  const Tensor mean_a = box_sum(a, radius, true);
  const Tensor mean_b = box_sum(b, radius, true);
  Tensor out(input.shape());
  for (size_t p = 0; p < hw; ++p)
    for (size_t k = 0; k < c; ++k) out[p * c + k] = mean_a[p * c + k] * g.gray[p] + mean_b[p * c + k];
  return out;
}

Tensor guided_filter_adjoint(const Tensor& guide, const Tensor& grad_output, int radius, Real eps) {
  check_filter_args(guide, grad_output, radius, eps);
  const size_t hw = grad_output.dim(0) * grad_output.dim(1), c = grad_output.dim(2);
  const GuideTerms g = guide_terms(guide, radius, eps);

  Tensor g_mean_a = grad_output;
  for (size_t p = 0; p < hw; ++p)
    for (size_t k = 0; k < c; ++k) g_mean_a[p * c + k] *= g.gray[p];
  const Tensor g_a_box = box_mean_adjoint(g_mean_a, radius);
  const Tensor g_b = box_mean_adjoint(grad_output, radius);

  // b = mean_p - a mean_I, a = (corr - mean_I mean_p) / denom
  Tensor g_corr(grad_output.shape()), g_mean_p(grad_output.shape());
  for (size_t p = 0; p < hw; ++p) {
    for (size_t k = 0; k < c; ++k) {
      const size_t q = p * c + k;
      const Real ga = g_a_box[q] - g_b[q] * g.mean_i[p];
      g_corr[q] = ga / g.denom[p];
      g_mean_p[q] = g_b[q] - ga * g.mean_i[p] / g.denom[p];
    }
  }
  const Tensor from_corr = box_mean_adjoint(g_corr, radius);
  Tensor grad_input = box_mean_adjoint(g_mean_p, radius);
  for (size_t p = 0; p < hw; ++p)
    for (size_t k = 0; k < c; ++k) grad_input[p * c + k] += from_corr[p * c + k] * g.gray[p];
  return grad_input;
}

namespace {

struct Tap {
  size_t i0, i1;
  Real t;
};

Tap axis_tap(size_t pixel, int stride, size_t n) {
  Real f = static_cast<Real>(pixel) / static_cast<Real>(stride);
  f = std::min(f, static_cast<Real>(n - 1));
  const size_t i0 = static_cast<size_t>(std::floor(f));
  const size_t i1 = std::min(i0 + 1, n - 1);
  return {i0, i1, f - static_cast<Real>(i0)};
}

}  // namespace

Tensor upsample_bilinear(const Tensor& fmap, int stride, size_t out_h, size_t out_w) {
  require_image(fmap, "upsample input");
  require(stride >= 1, ErrorKind::Domain, "stride must be >= 1");
  const size_t h = fmap.dim(0), w = fmap.dim(1), c = fmap.dim(2);
  Tensor out({out_h, out_w, c});
  for (size_t y = 0; y < out_h; ++y) {
    const Tap ty = axis_tap(y, stride, h);
    for (size_t x = 0; x < out_w; ++x) {
      const Tap tx = axis_tap(x, stride, w);
      const Real w00 = (1 - ty.t) * (1 - tx.t), w01 = (1 - ty.t) * tx.t, w10 = ty.t * (1 - tx.t), w11 = ty.t * tx.t;
      for (size_t k = 0; k < c; ++k) {
        out.at(y, x, k) = w00 * fmap.at(ty.i0, tx.i0, k) + w01 * fmap.at(ty.i0, tx.i1, k) +
                          w10 * fmap.at(ty.i1, tx.i0, k) + w11 * fmap.at(ty.i1, tx.i1, k);
      }
    }
  }
  return out;
}

Tensor upsample_bilinear_adjoint(const Tensor& grad, int stride, size_t in_h, size_t in_w) {
  require_image(grad, "upsample adjoint input");
  const size_t out_h = grad.dim(0), out_w = grad.dim(1), c = grad.dim(2);
  Tensor g({in_h, in_w, c});
  for (size_t y = 0; y < out_h; ++y) {
    const Tap ty = axis_tap(y, stride, in_h);
    for (size_t x = 0; x < out_w; ++x) {
      const Tap tx = axis_tap(x, stride, in_w);
      const Real w00 = (1 - ty.t) * (1 - tx.t), w01 = (1 - ty.t) * tx.t, w10 = ty.t * (1 - tx.t), w11 = ty.t * tx.t;
      for (size_t k = 0; k < c; ++k) {
        const Real v = grad.at(y, x, k);
        g.at(ty.i0, tx.i0, k) += w00 * v;
        g.at(ty.i0, tx.i1, k) += w01 * v;
        g.at(ty.i1, tx.i0, k) += w10 * v;
        g.at(ty.i1, tx.i1, k) += w11 * v;
      }
    }
  }
  return g;
}

void sample_bilinear(const Tensor& img, Real x, Real y, Real* out) {
  const size_t h = img.dim(0), w = img.dim(1), c = img.dim(2);
  x = std::clamp(x, 0.0, static_cast<Real>(w - 1));
  y = std::clamp(y, 0.0, static_cast<Real>(h - 1));
  const size_t x0 = static_cast<size_t>(std::floor(x)), y0 = static_cast<size_t>(std::floor(y));
  const size_t x1 = std::min(x0 + 1, w - 1), y1 = std::min(y0 + 1, h - 1);
  const Real tx = x - static_cast<Real>(x0), ty = y - static_cast<Real>(y0);
  for (size_t k = 0; k < c; ++k) {
    out[k] = (1 - ty) * ((1 - tx) * img.at(y0, x0, k) + tx * img.at(y0, x1, k)) +
             ty * ((1 - tx) * img.at(y1, x0, k) + tx * img.at(y1, x1, k));
  }
}

}  // namespace fprf
