#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "fprf/decoder.hpp"
#include "fprf/render.hpp"
#include "fprf/stylize.hpp"
#include "fprf/synthetic.hpp"
#include "fprf/train.hpp"

namespace fprf {

// INI-style settings shared by every command:
//
//   # comment            ; comment
//   [section]
//   key = value
//
// Keys live in sections and are addressed as "section.key". Unknown sections
// or keys are rejected with the offending line number.
class Config {
 public:
  static Config parse(const std::string& text, const std::string& origin = "config");
  static Config load(const std::string& path);

  // Override from the command line: "section.key=value".
  void set_override(const std::string& assignment);
  void set(const std::string& key, const std::string& value);

  bool has(const std::string& key) const { return values_.count(key) > 0; }
  std::string get_string(const std::string& key, const std::string& fallback) const;
  int64_t get_int(const std::string& key, int64_t fallback) const;
  uint64_t get_u64(const std::string& key, uint64_t fallback) const;
  double get_real(const std::string& key, double fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;

  const std::map<std::string, std::string>& values() const { return values_; }

  // Every accepted "section.key" with a one-line description.
  static const std::vector<std::pair<std::string, std::string>>& known_keys();

 private:
  std::map<std::string, std::string> values_;
};

std::string default_config_text();

DecoderPretrainConfig decoder_config(const Config& c);
EncoderSpec style_encoder_spec(const Config& c);
EncoderSpec semantic_encoder_spec(const Config& c);
UpsampleParams upsample_params(const Config& c);
TrainConfig train_config(const Config& c);
RenderOptions render_options(const Config& c);
StylizeOptions stylize_options(const Config& c);

struct SceneGenConfig {
  SyntheticSceneSpec spec;
  size_t views = 32;
  size_t width = 64, height = 64;
};
SceneGenConfig scene_config(const Config& c);

}  // namespace fprf
