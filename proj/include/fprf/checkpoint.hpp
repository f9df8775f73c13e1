#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "fprf/adam.hpp"
#include "fprf/decoder.hpp"
#include "fprf/field.hpp"
#include "fprf/style_dict.hpp"

namespace fprf {

// Binary container: "FPRF", u32 version, u32 section count, then per section
// a 4-byte tag, u64 length and payload, then an FNV-1a 64 checksum of every
// preceding byte. All integers little-endian; tensors use the FPT1 format.
class Container {
 public:
  static constexpr uint32_t kVersion = 1;

  void add(const std::string& tag, std::string payload);
  bool has(const std::string& tag) const;
  // Throws ErrorKind::Data when the section is missing.
  const std::string& get(const std::string& tag) const;
  const std::vector<std::pair<std::string, std::string>>& sections() const { return sections_; }

  std::string serialize() const;
  static Container parse(const std::string& bytes, const std::string& origin);

  // Writes to a temporary file next to path, then renames it into place.
  void save(const std::string& path) const;
  static Container load(const std::string& path);

 private:
  std::vector<std::pair<std::string, std::string>> sections_;
};

uint64_t fnv1a64(const std::string& bytes);

// Section payload codecs. Values are stored as 32-bit floats.
std::string encode_mlp(const MlpParams& mlp);
MlpParams decode_mlp(const std::string& bytes);
std::string encode_content_field(const ContentField& field);
ContentField decode_content_field(const std::string& bytes);
std::string encode_semantic_field(const SemanticField& field);
SemanticField decode_semantic_field(const std::string& bytes);
std::string encode_content_stats(const ContentStats& stats);
ContentStats decode_content_stats(const std::string& bytes);
std::string encode_decoder(const ColorDecoder& decoder);
ColorDecoder decode_decoder(const std::string& bytes);
std::string encode_adam(const std::vector<AdamState>& groups);
std::vector<AdamState> decode_adam(const std::string& bytes);
std::string encode_dictionary(const StyleDictionary& dict);
StyleDictionary decode_dictionary(const std::string& bytes);

// Everything a trained scene needs. META holds free-form JSON (encoders,
// config, step).
struct SceneCheckpoint {
  std::string meta_json = "{}";
  ContentField content;
  std::optional<SemanticField> semantic;
  std::optional<ContentStats> stats;
  std::optional<ColorDecoder> decoder;
  std::vector<AdamState> adam;  // empty when not saved
  uint64_t step = 0;
};

void save_scene_checkpoint(const std::string& path, const SceneCheckpoint& ckpt);
SceneCheckpoint load_scene_checkpoint(const std::string& path);

void save_decoder_file(const std::string& path, const ColorDecoder& decoder, const std::string& meta_json);
ColorDecoder load_decoder_file(const std::string& path, std::string* meta_json = nullptr);

void save_dictionary_file(const std::string& path, const StyleDictionary& dict, const std::string& meta_json);
StyleDictionary load_dictionary_file(const std::string& path, std::string* meta_json = nullptr);

// Rounds every parameter to its stored precision, so an in-memory model
// equals what a checkpoint round trip would produce.
void round_to_storage(ContentField& field);
void round_to_storage(SemanticField& field);
void round_to_storage(MlpParams& mlp);

}  // namespace fprf
