#include "fprf/block_layout.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "fprf/error.hpp"

namespace fprf {

void BlockLayout::validate() const {
  for (int a = 0; a < 3; ++a) {
    require(blocks[a] >= 1, ErrorKind::Config, "block count per axis must be >= 1");
    require(scene.max[a] > scene.min[a], ErrorKind::Config, "scene box must have positive extent");
  }
  require(overlap_frac >= 0.0 && overlap_frac < 0.5, ErrorKind::Config, "overlap_frac must be in [0, 0.5)");
}

Aabb BlockLayout::block_bounds(size_t index) const {
  const int bz = static_cast<int>(index % static_cast<size_t>(blocks[2]));
  const int by = static_cast<int>((index / static_cast<size_t>(blocks[2])) % static_cast<size_t>(blocks[1]));
  const int bx = static_cast<int>(index / static_cast<size_t>(blocks[2] * blocks[1]));
  const int b[3] = {bx, by, bz};
  Aabb box;
  for (int a = 0; a < 3; ++a) {
    const double width = (scene.max[a] - scene.min[a]) / blocks[a];
    const double lo = std::max(0.0, b[a] - overlap_frac);
    const double hi = std::min(static_cast<double>(blocks[a]), b[a] + 1 + overlap_frac);
    box.min[a] = scene.min[a] + lo * width;
    box.max[a] = scene.min[a] + hi * width;
  }
  return box;
}

namespace {

struct AxisCover {
  int count = 0;
  int block[2];
  double weight[2];
  double unit[2];
};

AxisCover cover_axis(double s, int nblocks, double m) {
  AxisCover c;
  int k = static_cast<int>(std::floor(s));
  k = std::clamp(k, 0, nblocks - 1);
  const double f = s - k;
  auto push = [&](int b, double w) {
    if (w <= 0.0) return;
    const double lo = std::max(0.0, b - m);
    const double hi = std::min(static_cast<double>(nblocks), b + 1 + m);
    c.block[c.count] = b;
    c.weight[c.count] = w;
    c.unit[c.count] = std::clamp((s - lo) / (hi - lo), 0.0, 1.0);
    ++c.count;
  };
  if (m > 0.0 && f < m && k > 0) {
    const double wk = (f + m) / (2 * m);
    push(k - 1, 1.0 - wk);
    push(k, wk);
  } else if (m > 0.0 && f > 1.0 - m && k < nblocks - 1) {
    const double wn = (f - 1.0 + m) / (2 * m);
    push(k, 1.0 - wn);
    push(k + 1, wn);
  } else {
    push(k, 1.0);
  }
  return c;
}

}  // namespace

std::vector<BlockWeight> block_lookup(const BlockLayout& layout, const Vec3& x) {
  if (!layout.scene.contains(x)) {
    std::ostringstream os;
    os << "point (" << x[0] << ", " << x[1] << ", " << x[2] << ") is outside the scene box";
    fail(ErrorKind::Domain, os.str());
  }
  AxisCover axes[3];
  for (int a = 0; a < 3; ++a) {
    const double width = (layout.scene.max[a] - layout.scene.min[a]) / layout.blocks[a];
    const double s = (x[a] - layout.scene.min[a]) / width;
    axes[a] = cover_axis(s, layout.blocks[a], layout.overlap_frac);
  }
  std::vector<BlockWeight> out;
  out.reserve(static_cast<size_t>(axes[0].count * axes[1].count * axes[2].count));
  for (int i = 0; i < axes[0].count; ++i)
    for (int j = 0; j < axes[1].count; ++j)
      for (int k = 0; k < axes[2].count; ++k) {
        out.push_back({layout.block_index(axes[0].block[i], axes[1].block[j], axes[2].block[k]),
                       axes[0].weight[i] * axes[1].weight[j] * axes[2].weight[k],
                       Vec3(axes[0].unit[i], axes[1].unit[j], axes[2].unit[k])});
      }
  return out;
}

}  // namespace fprf
