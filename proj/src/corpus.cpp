#include "fprf/corpus.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <filesystem>
#include <numbers>

#include "fprf/error.hpp"
#include "fprf/image_io.hpp"
#include "fprf/rng.hpp"

namespace fprf {

namespace {

using Color = std::array<Real, 3>;

Color random_color(Rng& rng) { return {rng.uniform(), rng.uniform(), rng.uniform()}; }

Real smooth(Real t) { return t * t * (3 - 2 * t); }

// Bilinear-smoothstep interpolated lattice noise, one lattice per octave.
Tensor value_noise(Rng& rng, size_t size) {
  Tensor img({size, size, 3});
  const int octaves = 3;
  Real amp_total = 0.0;
  for (int o = 0; o < octaves; ++o) {
    const size_t cells = size_t{2} << o;  // 2, 4, 8 lattice cells
    const Real amp = 1.0 / static_cast<Real>(1 << o);
    amp_total += amp;
    std::vector<Color> lattice((cells + 1) * (cells + 1));
    for (auto& c : lattice) c = random_color(rng);
    for (size_t y = 0; y < size; ++y) {
      const Real fy = static_cast<Real>(y) / static_cast<Real>(size) * static_cast<Real>(cells);
      const size_t y0 = static_cast<size_t>(fy);
      const Real ty = smooth(fy - static_cast<Real>(y0));
      for (size_t x = 0; x < size; ++x) {
        const Real fx = static_cast<Real>(x) / static_cast<Real>(size) * static_cast<Real>(cells);
        const size_t x0 = static_cast<size_t>(fx);
        const Real tx = smooth(fx - static_cast<Real>(x0));
        for (size_t k = 0; k < 3; ++k) {
          const Real a = lattice[y0 * (cells + 1) + x0][k], b = lattice[y0 * (cells + 1) + x0 + 1][k];
          const Real c = lattice[(y0 + 1) * (cells + 1) + x0][k], d = lattice[(y0 + 1) * (cells + 1) + x0 + 1][k];
          img.at(y, x, k) += amp * ((1 - ty) * ((1 - tx) * a + tx * b) + ty * ((1 - tx) * c + tx * d));
        }
      }
    }
  }
  for (auto& v : img.vec()) v /= amp_total;
  // stretch contrast around the mean so colors span more of the cube
  Real mean[3] = {0, 0, 0};
  const size_t n = size * size;
  for (size_t p = 0; p < n; ++p)
    for (size_t k = 0; k < 3; ++k) mean[k] += img[p * 3 + k] / static_cast<Real>(n);
  const Real gain = rng.uniform(1.5, 2.5);
  for (size_t p = 0; p < n; ++p)
    for (size_t k = 0; k < 3; ++k) img[p * 3 + k] = std::clamp(mean[k] + gain * (img[p * 3 + k] - mean[k]), 0.0, 1.0);
  return img;
}

}  // namespace

Tensor procedural_image(uint64_t seed, size_t size, PatternKind kind) {
  Rng rng(seed);
  if (kind == PatternKind::ValueNoise) return value_noise(rng, size);
  Tensor img({size, size, 3});
  const Color a = random_color(rng), b = random_color(rng);
  const Real angle = rng.uniform(0.0, std::numbers::pi);
  const Real period = rng.uniform(6.0, 24.0);
  const Real ca = std::cos(angle), sa = std::sin(angle);
  for (size_t y = 0; y < size; ++y) {
    for (size_t x = 0; x < size; ++x) {
      const Real u = ca * static_cast<Real>(x) + sa * static_cast<Real>(y);
      const Real v = -sa * static_cast<Real>(x) + ca * static_cast<Real>(y);
      Real t = 0.0;
      switch (kind) {
        case PatternKind::Stripes:
          t = 0.5 + 0.5 * std::sin(2.0 * std::numbers::pi * u / period);
          break;
        case PatternKind::Checkers:
          t = (static_cast<long>(std::floor(u / period)) + static_cast<long>(std::floor(v / period))) % 2 == 0 ? 0.0
                                                                                                             : 1.0;
          break;
        case PatternKind::Gradient:
          t = std::clamp(u / (static_cast<Real>(size) * 1.4142) + 0.5, 0.0, 1.0);
          break;
        default:
          break;
      }
      for (size_t k = 0; k < 3; ++k) img.at(y, x, k) = (1 - t) * a[k] + t * b[k];
    }
  }
  return img;
}

std::vector<Tensor> procedural_corpus(size_t n, size_t size, uint64_t seed) {
  constexpr PatternKind kinds[] = {PatternKind::ValueNoise, PatternKind::Stripes, PatternKind::ValueNoise,
                                   PatternKind::Checkers, PatternKind::ValueNoise, PatternKind::Gradient};
  std::vector<Tensor> out;
  out.reserve(n);
  for (size_t i = 0; i < n; ++i) out.push_back(procedural_image(mix_seed(seed, i), size, kinds[i % 6]));
  return out;
}

std::vector<Tensor> load_image_corpus(const std::string& dir) {
  namespace fs = std::filesystem;
  require(fs::is_directory(dir), ErrorKind::Data, "image corpus directory " + dir + " does not exist");
  std::vector<std::string> files;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_regular_file() && e.path().extension() == ".png") files.push_back(e.path().string());
  std::sort(files.begin(), files.end());
  require(!files.empty(), ErrorKind::Data, "image corpus " + dir + " contains no PNG files");
  std::vector<Tensor> out;
  for (const auto& f : files) out.push_back(read_png_rgb(f));
  return out;
}

}  // namespace fprf
