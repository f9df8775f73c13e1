#pragma once

#include <array>
#include <vector>

#include "fprf/geometry.hpp"

namespace fprf {

// Regular tiling of the scene box into blocks whose extents are grown by
// overlap_frac of a block width on each interior side. Inside an overlap the
// two neighbours are blended with a linear ramp, so weights always sum to 1.
struct BlockLayout {
  Aabb scene;
  std::array<int, 3> blocks{1, 1, 1};
  double overlap_frac = 0.0;

  size_t block_count() const { return static_cast<size_t>(blocks[0] * blocks[1] * blocks[2]); }
  size_t block_index(int bx, int by, int bz) const {
    return static_cast<size_t>((bx * blocks[1] + by) * blocks[2] + bz);
  }
  // Extended (overlap-inclusive) bounds of one block in world units.
  Aabb block_bounds(size_t index) const;
  void validate() const;
};

struct BlockWeight {
  size_t block;
  double weight;
  Vec3 x_unit;  // position normalized to the block's extended bounds
};

// 1-8 covering blocks with positive weight. Throws ErrorKind::Domain for
// points outside the scene box.
std::vector<BlockWeight> block_lookup(const BlockLayout& layout, const Vec3& x_world);

}  // namespace fprf
