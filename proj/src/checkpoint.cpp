#include "fprf/checkpoint.hpp"

#include <bit>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "fprf/binary_io.hpp"
#include "fprf/error.hpp"
#include "json.hpp"

namespace fprf {

namespace {

constexpr char kMagic[4] = {'F', 'P', 'R', 'F'};

std::istringstream reader(const std::string& bytes) { return std::istringstream(bytes, std::ios::binary); }

void expect_end(std::istream& in, const char* what) {
  in.peek();
  require(in.eof(), ErrorKind::Data, std::string(what) + " section has trailing bytes");
}

void put_f64(std::ostream& out, double v) { put_u64(out, std::bit_cast<uint64_t>(v)); }
double get_f64(std::istream& in) { return std::bit_cast<double>(get_u64(in)); }

void write_layout(std::ostream& out, const BlockLayout& l) {
  for (int a = 0; a < 3; ++a) put_f64(out, l.scene.min[a]);
  for (int a = 0; a < 3; ++a) put_f64(out, l.scene.max[a]);
  for (int a = 0; a < 3; ++a) put_u32(out, static_cast<uint32_t>(l.blocks[a]));
  put_f64(out, l.overlap_frac);
}

BlockLayout read_layout(std::istream& in) {
  BlockLayout l;
  for (int a = 0; a < 3; ++a) l.scene.min[a] = get_f64(in);
  for (int a = 0; a < 3; ++a) l.scene.max[a] = get_f64(in);
  for (int a = 0; a < 3; ++a) l.blocks[a] = static_cast<int>(get_u32(in));
  l.overlap_frac = get_f64(in);
  try {
    l.validate();
  } catch (const Error& e) {
    fail(ErrorKind::Data, std::string("invalid block layout in checkpoint: ") + e.what());
  }
  return l;
}

void write_mlp(std::ostream& out, const MlpParams& mlp) {
  put_u32(out, static_cast<uint32_t>(mlp.layers.size()));
  put_u32(out, mlp.output == OutputActivation::Sigmoid ? 1u : 0u);
  for (const DenseLayer& l : mlp.layers) {
    write_fpt(out, l.weight);
    write_fpt(out, l.bias);
  }
}

MlpParams read_mlp(std::istream& in) {
  MlpParams m;
  const uint32_t n = get_u32(in);
  require(n >= 1 && n <= 64, ErrorKind::Data, "MLP layer count out of range");
  const uint32_t act = get_u32(in);
  require(act <= 1, ErrorKind::Data, "unknown MLP output activation");
  m.output = act == 1 ? OutputActivation::Sigmoid : OutputActivation::Identity;
  for (uint32_t i = 0; i < n; ++i) {
    DenseLayer l;
    l.weight = read_fpt(in);
    l.bias = read_fpt(in);
    require(l.weight.rank() == 2 && l.bias.rank() == 1 && l.bias.dim(0) == l.weight.dim(0), ErrorKind::Data,
            "malformed MLP layer " + std::to_string(i));
    if (i > 0)
      require(l.in_dim() == m.layers.back().out_dim(), ErrorKind::Data,
              "MLP layer " + std::to_string(i) + " does not chain");
    m.layers.push_back(std::move(l));
  }
  return m;
}

void write_grids(std::ostream& out, const std::vector<TriPlaneGrid>& grids) {
  put_u32(out, static_cast<uint32_t>(grids.size()));
  for (const TriPlaneGrid& g : grids) {
    for (size_t r : g.resolution) put_u32(out, static_cast<uint32_t>(r));
    put_u32(out, static_cast<uint32_t>(g.channels));
    write_fpt(out, g.xy);
    write_fpt(out, g.xz);
    write_fpt(out, g.yz);
  }
}

std::vector<TriPlaneGrid> read_grids(std::istream& in, size_t expected) {
  const uint32_t n = get_u32(in);
  require(n == expected, ErrorKind::Data, "grid count does not match the block layout");
  std::vector<TriPlaneGrid> grids(n);
  for (TriPlaneGrid& g : grids) {
    for (size_t& r : g.resolution) r = get_u32(in);
    g.channels = get_u32(in);
    g.xy = read_fpt(in);
    g.xz = read_fpt(in);
    g.yz = read_fpt(in);
    const auto [rx, ry, rz] = g.resolution;
    const size_t c = g.channels;
    require(g.xy.shape() == std::vector<size_t>{rx, ry, c} && g.xz.shape() == std::vector<size_t>{rx, rz, c} &&
                g.yz.shape() == std::vector<size_t>{ry, rz, c},
            ErrorKind::Data, "tri-plane shapes do not match the stored resolution");
  }
  return grids;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), ErrorKind::Data, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

uint64_t fnv1a64(const std::string& bytes) {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

void Container::add(const std::string& tag, std::string payload) {
  require(tag.size() == 4, ErrorKind::Config, "section tags are 4 characters: '" + tag + "'");
  require(!has(tag), ErrorKind::Config, "duplicate section " + tag);
  sections_.emplace_back(tag, std::move(payload));
}

bool Container::has(const std::string& tag) const {
  for (const auto& s : sections_)
    if (s.first == tag) return true;
  return false;
}

const std::string& Container::get(const std::string& tag) const {
  for (const auto& s : sections_)
    if (s.first == tag) return s.second;
  fail(ErrorKind::Data, "checkpoint has no " + tag + " section");
}

std::string Container::serialize() const {
  std::ostringstream out(std::ios::binary);
  out.write(kMagic, 4);
  put_u32(out, kVersion);
  put_u32(out, static_cast<uint32_t>(sections_.size()));
  for (const auto& [tag, payload] : sections_) {
    out.write(tag.data(), 4);
    put_u64(out, payload.size());
    out.write(payload.data(), static_cast<std::streamsize>(payload.size()));
  }
  std::string bytes = out.str();
  std::ostringstream tail(std::ios::binary);
  put_u64(tail, fnv1a64(bytes));
  return bytes + tail.str();
}

Container Container::parse(const std::string& bytes, const std::string& origin) {
  const std::string where = origin.empty() ? std::string("container") : origin;
  require(bytes.size() >= 20 && bytes.compare(0, 4, kMagic, 4) == 0, ErrorKind::Data,
          where + ": not an FPRF container (bad magic)");
  const std::string body = bytes.substr(0, bytes.size() - 8);
  auto tail = reader(bytes.substr(bytes.size() - 8));
  require(get_u64(tail) == fnv1a64(body), ErrorKind::Data, where + ": checksum mismatch (file is corrupt)");
  auto in = reader(body);
  in.ignore(4);
  const uint32_t version = get_u32(in);
  require(version == kVersion, ErrorKind::Data, where + ": unsupported container version " + std::to_string(version));
  const uint32_t n = get_u32(in);
  Container c;
  for (uint32_t i = 0; i < n; ++i) {
    char tag[4];
    in.read(tag, 4);
    require(in.gcount() == 4, ErrorKind::Data, where + ": truncated section header");
    const uint64_t len = get_u64(in);
    require(len <= body.size(), ErrorKind::Data, where + ": section length out of range");
    std::string payload(len, '\0');
    in.read(payload.data(), static_cast<std::streamsize>(len));
    require(static_cast<uint64_t>(in.gcount()) == len, ErrorKind::Data, where + ": truncated section");
    c.add(std::string(tag, 4), std::move(payload));
  }
  expect_end(in, "container");
  return c;
}

void Container::save(const std::string& path) const {
  namespace fs = std::filesystem;
  const fs::path target(path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    require(out.good(), ErrorKind::Data, "cannot write " + tmp);
    const std::string bytes = serialize();
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    require(out.good(), ErrorKind::Data, "write failed for " + tmp);
  }
  fs::rename(tmp, target);
}

Container Container::load(const std::string& path) { return parse(read_file(path), path); }

std::string encode_mlp(const MlpParams& mlp) {
  std::ostringstream out(std::ios::binary);
  write_mlp(out, mlp);
  return out.str();
}

MlpParams decode_mlp(const std::string& bytes) {
  auto in = reader(bytes);
  MlpParams m = read_mlp(in);
  expect_end(in, "MLP");
  return m;
}

std::string encode_content_field(const ContentField& field) {
  std::ostringstream out(std::ios::binary);
  write_layout(out, field.layout);
  put_u32(out, static_cast<uint32_t>(field.n_freq));
  write_grids(out, field.grids);
  write_mlp(out, field.trunk);
  write_mlp(out, field.head);
  return out.str();
}

ContentField decode_content_field(const std::string& bytes) {
  auto in = reader(bytes);
  ContentField f;
  f.layout = read_layout(in);
  f.n_freq = static_cast<int>(get_u32(in));
  f.grids = read_grids(in, f.layout.block_count());
  f.trunk = read_mlp(in);
  f.head = read_mlp(in);
  expect_end(in, "CFLD");
  require(f.trunk.in_dim() == f.grid_channels(), ErrorKind::Data, "content trunk does not match grid channels");
  require(f.head.in_dim() == f.trunk.out_dim() - 1 + 6 * static_cast<size_t>(f.n_freq), ErrorKind::Data,
          "content head does not match trunk width and direction encoding");
  return f;
}

std::string encode_semantic_field(const SemanticField& field) {
  std::ostringstream out(std::ios::binary);
  write_layout(out, field.layout);
  write_grids(out, field.grids);
  write_mlp(out, field.head);
  return out.str();
}

SemanticField decode_semantic_field(const std::string& bytes) {
  auto in = reader(bytes);
  SemanticField f;
  f.layout = read_layout(in);
  f.grids = read_grids(in, f.layout.block_count());
  f.head = read_mlp(in);
  expect_end(in, "SFLD");
  require(f.head.in_dim() == f.grid_channels(), ErrorKind::Data, "semantic head does not match grid channels");
  return f;
}

std::string encode_content_stats(const ContentStats& stats) {
  std::ostringstream out(std::ios::binary);
  put_u32(out, stats.initialized ? 1u : 0u);
  put_f64(out, stats.decay);
  write_fpt(out, stats.mean);
  write_fpt(out, stats.std);
  return out.str();
}

ContentStats decode_content_stats(const std::string& bytes) {
  auto in = reader(bytes);
  ContentStats s;
  s.initialized = get_u32(in) != 0;
  s.decay = get_f64(in);
  s.mean = read_fpt(in);
  s.std = read_fpt(in);
  expect_end(in, "CSTA");
  require(s.mean.size() == s.std.size(), ErrorKind::Data, "content stats mean/std widths differ");
  for (Real v : s.std.vec()) require(!s.initialized || v > 0.0, ErrorKind::Data, "content stats std must be > 0");
  return s;
}

std::string encode_decoder(const ColorDecoder& decoder) {
  std::ostringstream out(std::ios::binary);
  put_u32(out, decoder.frozen ? 1u : 0u);
  write_mlp(out, decoder.mlp);
  return out.str();
}

ColorDecoder decode_decoder(const std::string& bytes) {
  auto in = reader(bytes);
  ColorDecoder d;
  d.frozen = get_u32(in) != 0;
  d.mlp = read_mlp(in);
  expect_end(in, "DVGG");
  require(d.mlp.out_dim() == 3 && d.mlp.output == OutputActivation::Sigmoid, ErrorKind::Data,
          "decoder must map to 3 sigmoid outputs");
  return d;
}

std::string encode_adam(const std::vector<AdamState>& groups) {
  std::ostringstream out(std::ios::binary);
  put_u32(out, static_cast<uint32_t>(groups.size()));
  for (const AdamState& g : groups) {
    put_u64(out, g.step);
    put_u32(out, static_cast<uint32_t>(g.m.size()));
    for (size_t i = 0; i < g.m.size(); ++i) {
      write_fpt(out, g.m[i]);
      write_fpt(out, g.v[i]);
    }
  }
  return out.str();
}

std::vector<AdamState> decode_adam(const std::string& bytes) {
  auto in = reader(bytes);
  std::vector<AdamState> groups(get_u32(in));
  for (AdamState& g : groups) {
    g.step = get_u64(in);
    const uint32_t n = get_u32(in);
    for (uint32_t i = 0; i < n; ++i) {
      g.m.push_back(read_fpt(in));
      g.v.push_back(read_fpt(in));
    }
  }
  expect_end(in, "ADAM");
  return groups;
}

std::string encode_dictionary(const StyleDictionary& dict) {
  std::ostringstream out(std::ios::binary);
  write_dictionary(out, dict);
  return out.str();
}

StyleDictionary decode_dictionary(const std::string& bytes) {
  auto in = reader(bytes);
  StyleDictionary d = read_dictionary(in);
  expect_end(in, "SDIC");
  return d;
}

void save_scene_checkpoint(const std::string& path, const SceneCheckpoint& ckpt) {
  nlohmann::json meta = nlohmann::json::parse(ckpt.meta_json);
  meta["step"] = ckpt.step;
  Container c;
  c.add("META", meta.dump());
  std::ostringstream layout(std::ios::binary);
  write_layout(layout, ckpt.content.layout);
  c.add("LAYO", layout.str());
  c.add("CFLD", encode_content_field(ckpt.content));
  if (ckpt.semantic) c.add("SFLD", encode_semantic_field(*ckpt.semantic));
  if (ckpt.stats) c.add("CSTA", encode_content_stats(*ckpt.stats));
  if (ckpt.decoder) c.add("DVGG", encode_decoder(*ckpt.decoder));
  if (!ckpt.adam.empty()) c.add("ADAM", encode_adam(ckpt.adam));
  c.save(path);
}

SceneCheckpoint load_scene_checkpoint(const std::string& path) {
  const Container c = Container::load(path);
  SceneCheckpoint k;
  try {
    const nlohmann::json meta = nlohmann::json::parse(c.get("META"));
    k.step = meta.value("step", uint64_t{0});
    k.meta_json = meta.dump();
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::Data, path + ": malformed META section: " + e.what());
  }
  k.content = decode_content_field(c.get("CFLD"));
  if (c.has("SFLD")) k.semantic = decode_semantic_field(c.get("SFLD"));
  if (c.has("CSTA")) k.stats = decode_content_stats(c.get("CSTA"));
  if (c.has("DVGG")) k.decoder = decode_decoder(c.get("DVGG"));
  if (c.has("ADAM")) k.adam = decode_adam(c.get("ADAM"));
  return k;
}

void save_decoder_file(const std::string& path, const ColorDecoder& decoder, const std::string& meta_json) {
  Container c;
  c.add("META", meta_json);
  c.add("DVGG", encode_decoder(decoder));
  c.save(path);
}

ColorDecoder load_decoder_file(const std::string& path, std::string* meta_json) {
  const Container c = Container::load(path);
  if (meta_json && c.has("META")) *meta_json = c.get("META");
  return decode_decoder(c.get("DVGG"));
}

void save_dictionary_file(const std::string& path, const StyleDictionary& dict, const std::string& meta_json) {
  Container c;
  c.add("META", meta_json);
  c.add("SDIC", encode_dictionary(dict));
  c.save(path);
}

StyleDictionary load_dictionary_file(const std::string& path, std::string* meta_json) {
  const Container c = Container::load(path);
  if (meta_json && c.has("META")) *meta_json = c.get("META");
  return decode_dictionary(c.get("SDIC"));
}

void round_to_storage(MlpParams& mlp) {
  for (Tensor* t : mlp.tensors()) round_to_storage(*t);
}

void round_to_storage(ContentField& field) {
  for (Tensor* t : field.tensors()) round_to_storage(*t);
}

void round_to_storage(SemanticField& field) {
  for (Tensor* t : field.tensors()) round_to_storage(*t);
}

}  // namespace fprf
