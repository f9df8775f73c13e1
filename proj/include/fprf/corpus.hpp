#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fprf/tensor.hpp"

namespace fprf {

enum class PatternKind { ValueNoise, Stripes, Checkers, Gradient };

// Seeded procedural RGB image in [0, 1], [size x size x 3].
Tensor procedural_image(uint64_t seed, size_t size, PatternKind kind);

// n images cycling through the pattern kinds.
std::vector<Tensor> procedural_corpus(size_t n, size_t size, uint64_t seed);

// All *.png files in a directory, sorted by name. Throws ErrorKind::Data when
// the directory is missing or holds no PNG.
std::vector<Tensor> load_image_corpus(const std::string& dir);

}  // namespace fprf
