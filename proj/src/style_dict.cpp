#include "fprf/style_dict.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>

#include "fprf/binary_io.hpp"
#include "fprf/error.hpp"
#include "fprf/kmeans.hpp"
#include "fprf/parallel.hpp"
#include "fprf/rng.hpp"
#include "json.hpp"

namespace fprf {

namespace {

Tensor stack(const std::vector<StyleEntry>& entries, std::vector<Real> StyleEntry::*member) {
  require(!entries.empty(), ErrorKind::Data, "style dictionary is empty");
  const size_t c = (entries.front().*member).size();
  Tensor t({entries.size(), c});
  for (size_t i = 0; i < entries.size(); ++i) {
    const auto& v = entries[i].*member;
    require(v.size() == c, ErrorKind::Dimension, "style dictionary entries differ in width");
    std::copy(v.begin(), v.end(), t.data() + i * c);
  }
  return t;
}

std::vector<Real> to_vector(const Tensor& t) { return t.vec(); }

std::vector<Real> rounded(std::vector<Real> v) {
  for (Real& x : v) x = static_cast<Real>(static_cast<float>(x));
  return v;
}

// Nearest semantic-grid index for a style-grid index.
size_t nearest_index(size_t i, int style_stride, int sem_stride, size_t sem_extent) {
  const long idx = std::lround(static_cast<double>(style_stride) * static_cast<double>(i) / sem_stride);
  return static_cast<size_t>(std::clamp<long>(idx, 0, static_cast<long>(sem_extent) - 1));
}

}  // namespace

Tensor StyleDictionary::keys() const { return stack(entries, &StyleEntry::key); }
Tensor StyleDictionary::means() const { return stack(entries, &StyleEntry::mean); }
Tensor StyleDictionary::stds() const { return stack(entries, &StyleEntry::std); }

void StyleDictionary::validate() const {
  require(!entries.empty(), ErrorKind::Data, "style dictionary is empty");
  const size_t kd = key_dim(), vd = value_dim();
  for (const StyleEntry& e : entries) {
    require(e.key.size() == kd && e.mean.size() == vd && e.std.size() == vd, ErrorKind::Data,
            "style dictionary entries differ in width");
    for (Real s : e.std) require(s > 0.0 && std::isfinite(s), ErrorKind::Data, "style std must be positive");
    for (Real k : e.key) require(std::isfinite(k), ErrorKind::Data, "style key is not finite");
    for (Real m : e.mean) require(std::isfinite(m), ErrorKind::Data, "style mean is not finite");
  }
}

ChannelStats global_style_stats(const Tensor& image, const EncoderSpec& style) {
  const FeatureImage f = encode_style(style, image);
  ChannelStats s = channel_stats(f.data);
  round_to_storage(s.mean);
  round_to_storage(s.std);
  return s;
}

std::vector<StyleEntry> cluster_reference(const Tensor& image, size_t m, const DictionaryEncoders& encoders,
                                          uint64_t seed, const LabelMap* labels, uint32_t reference) {
  require(m >= 1, ErrorKind::Config, "clusters per reference must be >= 1");
  require(image.rank() == 3 && image.dim(0) > 0 && image.dim(1) > 0, ErrorKind::Data, "reference image is empty");
  const FeatureImage style = encode_style(encoders.style, image);
  const FeatureImage sem = encode_semantic(encoders.semantic, image, labels);
  const size_t h = style.height(), w = style.width(), n = h * w;
  const size_t cv = style.channels(), cd = sem.channels();
  require(m <= n, ErrorKind::Config,
          "M = " + std::to_string(m) + " exceeds the " + std::to_string(n) + " feature locations of the reference");

  Tensor sem_points({n, cd});
  for (size_t y = 0; y < h; ++y) {
    const size_t sy = nearest_index(y, style.stride, sem.stride, sem.height());
    for (size_t x = 0; x < w; ++x) {
      const size_t sx = nearest_index(x, style.stride, sem.stride, sem.width());
      std::copy_n(sem.data.data() + (sy * sem.width() + sx) * cd, cd, sem_points.data() + (y * w + x) * cd);
    }
  }

  KMeansResult km = kmeans(sem_points, m, seed);
  std::vector<uint32_t>& assign = km.assignments;
  std::vector<size_t> count(m, 0);
  for (uint32_t a : assign) ++count[a];

  // Fold tiny clusters (smallest first) into the nearest surviving centroid.
  std::vector<bool> alive(m);
  for (size_t j = 0; j < m; ++j) alive[j] = count[j] > 0;
  while (true) {
    size_t worst = m;
    size_t alive_n = 0;
    for (size_t j = 0; j < m; ++j) {
      if (!alive[j]) continue;
      ++alive_n;
      if (count[j] < kMinClusterLocations && (worst == m || count[j] < count[worst])) worst = j;
    }
    if (worst == m || alive_n <= 1) break;
    size_t target = m;
    Real best = std::numeric_limits<Real>::infinity();
    for (size_t j = 0; j < m; ++j) {
      if (!alive[j] || j == worst) continue;
      const Real d = squared_distance(km.centroids.data() + worst * cd, km.centroids.data() + j * cd, cd);
      if (d < best) {
        best = d;
        target = j;
      }
    }
    for (uint32_t& a : assign)
      if (a == worst) a = static_cast<uint32_t>(target);
    count[target] += count[worst];
    count[worst] = 0;
    alive[worst] = false;
  }

  std::vector<StyleEntry> entries;
  uint32_t next_cluster = 0;
  for (size_t j = 0; j < m; ++j) {
    if (!alive[j]) continue;
    Tensor style_rows({count[j], cv});
    Tensor sem_rows({count[j], cd});
    size_t r = 0;
    for (size_t i = 0; i < n; ++i) {
      if (assign[i] != j) continue;
      std::copy_n(style.data.data() + i * cv, cv, style_rows.data() + r * cv);
      std::copy_n(sem_points.data() + i * cd, cd, sem_rows.data() + r * cd);
      ++r;
    }
    const ChannelStats vs = channel_stats(style_rows);
    const ChannelStats ks = channel_stats(sem_rows);
    StyleEntry e;
    e.key = rounded(to_vector(ks.mean));
    e.mean = rounded(to_vector(vs.mean));
    e.std = rounded(to_vector(vs.std));
    e.reference = reference;
    e.cluster = next_cluster++;
    e.pixels = count[j];
    entries.push_back(std::move(e));
  }
  return entries;
}

StyleDictionary build_dictionary(const std::vector<Tensor>& references, size_t m, const DictionaryEncoders& encoders,
                                 uint64_t seed, const std::vector<const LabelMap*>& labels) {
  require(!references.empty(), ErrorKind::Data, "style dictionary needs at least one reference image");
  require(labels.empty() || labels.size() == references.size(), ErrorKind::Data,
          "label maps must be given for every reference or none");
  const auto start = std::chrono::steady_clock::now();
  std::vector<std::vector<StyleEntry>> per_ref(references.size());
  parallel_for(references.size(), [&](size_t i) {
    per_ref[i] = cluster_reference(references[i], m, encoders, seed, labels.empty() ? nullptr : labels[i],
                                   static_cast<uint32_t>(i));
  });
  StyleDictionary dict;
  for (auto& entries : per_ref)
    for (auto& e : entries) dict.entries.push_back(std::move(e));
  dict.build_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return dict;
}

void write_dictionary(std::ostream& out, const StyleDictionary& dict) {
  dict.validate();
  put_u32(out, static_cast<uint32_t>(dict.size()));
  for (const StyleEntry& e : dict.entries) {
    put_u32(out, e.reference);
    put_u32(out, e.cluster);
    put_u64(out, e.pixels);
    write_fpt(out, Tensor({e.key.size()}, e.key));
    write_fpt(out, Tensor({e.mean.size()}, e.mean));
    write_fpt(out, Tensor({e.std.size()}, e.std));
  }
}

StyleDictionary read_dictionary(std::istream& in) {
  StyleDictionary dict;
  const uint32_t n = get_u32(in);
  require(n >= 1 && n < (1u << 20), ErrorKind::Data, "style dictionary entry count out of range");
  for (uint32_t i = 0; i < n; ++i) {
    StyleEntry e;
    e.reference = get_u32(in);
    e.cluster = get_u32(in);
    e.pixels = get_u64(in);
    e.key = read_fpt(in).vec();
    e.mean = read_fpt(in).vec();
    e.std = read_fpt(in).vec();
    dict.entries.push_back(std::move(e));
  }
  dict.validate();
  return dict;
}

std::string dictionary_json(const StyleDictionary& dict) {
  nlohmann::json j;
  j["entries"] = nlohmann::json::array();
  for (const StyleEntry& e : dict.entries) {
    j["entries"].push_back({{"reference", e.reference},
                            {"cluster", e.cluster},
                            {"pixels", e.pixels},
                            {"key", e.key},
                            {"mean", e.mean},
                            {"std", e.std}});
  }
  j["size"] = dict.size();
  return j.dump(2);
}

}  // namespace fprf
