#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "fprf/encoder.hpp"
#include "fprf/numeric.hpp"

namespace fprf {

struct StyleEntry {
  std::vector<Real> key;   // semantic centroid [C_D]
  std::vector<Real> mean;  // local style mean [C_V]
  std::vector<Real> std;   // local style std [C_V], > 0
  uint32_t reference = 0;
  uint32_t cluster = 0;
  uint64_t pixels = 0;  // style-grid locations in the cluster
};

struct StyleDictionary {
  std::vector<StyleEntry> entries;
  double build_seconds = 0.0;  // not serialized

  size_t size() const { return entries.size(); }
  size_t key_dim() const { return entries.front().key.size(); }
  size_t value_dim() const { return entries.front().mean.size(); }

  Tensor keys() const;   // [T x C_D]
  Tensor means() const;  // [T x C_V]
  Tensor stds() const;   // [T x C_V]
  void validate() const;
};

struct DictionaryEncoders {
  EncoderSpec style = EncoderSpec::style_default();
  EncoderSpec semantic = EncoderSpec::semantic_default();
};

// Clusters with fewer locations are folded into the nearest other cluster.
inline constexpr size_t kMinClusterLocations = 4;

// Clusters one reference into at most M entries. Every style-grid location
// takes the semantic vector of its nearest semantic-grid location; k-means
// runs on those vectors. Values are stored at tensor-file precision.
std::vector<StyleEntry> cluster_reference(const Tensor& image, size_t m, const DictionaryEncoders& encoders,
                                          uint64_t seed, const LabelMap* labels = nullptr, uint32_t reference = 0);

// Ordered concatenation over references; labels may be empty or one per image.
StyleDictionary build_dictionary(const std::vector<Tensor>& references, size_t m, const DictionaryEncoders& encoders,
                                 uint64_t seed, const std::vector<const LabelMap*>& labels = {});

// Global style statistics of one image, at the same precision as dictionary values.
ChannelStats global_style_stats(const Tensor& image, const EncoderSpec& style);

void write_dictionary(std::ostream& out, const StyleDictionary& dict);
StyleDictionary read_dictionary(std::istream& in);
std::string dictionary_json(const StyleDictionary& dict);

}  // namespace fprf
