#include "fprf/config.hpp"

#include <algorithm>
#include <cerrno>
#include <charconv>
#include <fstream>
#include <sstream>

#include "fprf/error.hpp"

namespace fprf {

const std::vector<std::pair<std::string, std::string>>& Config::known_keys() {
  static const std::vector<std::pair<std::string, std::string>> keys = {
      {"encoder.style_seed", "seed of the style/content random conv encoder"},
      {"encoder.style_channels", "content feature channels C_V"},
      {"encoder.style_stride", "style encoder stride (1 or 2)"},
      {"encoder.semantic_kind", "random_conv | oracle_semantic"},
      {"encoder.semantic_seed", "seed of the semantic encoder"},
      {"encoder.semantic_channels", "semantic feature channels C_D"},
      {"encoder.semantic_stride", "semantic encoder stride (random_conv: 2 or 4)"},
      {"encoder.semantic_radius", "box radius of the oracle semantic encoder"},
      {"encoder.guided_radius", "guided filter radius for feature upsampling"},
      {"encoder.guided_eps", "guided filter epsilon"},
      {"decoder.steps", "pretraining steps"},
      {"decoder.lr", "pretraining Adam learning rate"},
      {"decoder.lambda_s", "style loss weight"},
      {"decoder.seed", "pretraining seed"},
      {"decoder.hidden", "hidden width of the color decoder"},
      {"decoder.content_dir", "directory of content PNGs (empty: procedural)"},
      {"decoder.style_dir", "directory of style PNGs (empty: procedural)"},
      {"decoder.procedural_fallback", "use procedural images when a directory is missing"},
      {"decoder.corpus_size", "procedural images per corpus"},
      {"decoder.image_size", "procedural image size"},
      {"scene.preset", "toy | two_region | street"},
      {"scene.seed", "camera orbit seed"},
      {"scene.views", "number of views (>= 2)"},
      {"scene.width", "image width"},
      {"scene.height", "image height"},
      {"train.steps", "optimization steps"},
      {"train.rays", "rays per batch"},
      {"train.samples", "samples per ray"},
      {"train.lr_grid", "Adam learning rate of the tri-planes"},
      {"train.lr_mlp", "Adam learning rate of the MLPs"},
      {"train.beta1", "Adam beta1"},
      {"train.beta2", "Adam beta2"},
      {"train.adam_eps", "Adam epsilon"},
      {"train.lambda_rgb", "color loss weight"},
      {"train.lambda_reg", "total variation weight"},
      {"train.lambda_semantic", "semantic loss weight"},
      {"train.ema_decay", "content statistics moving-average decay"},
      {"train.seed", "training seed"},
      {"train.early_stop", "transmittance below which samples are skipped"},
      {"train.stratified", "jitter samples within their bins"},
      {"train.eval_every", "held-out PSNR period in steps (0: only at the end)"},
      {"train.eval_samples", "samples per ray for evaluation renders"},
      {"train.learn_decoder", "train a copy of the decoder with the scene"},
      {"train.train_semantic", "train the semantic field"},
      {"train.grid_resolution", "content tri-plane resolution"},
      {"train.semantic_resolution", "semantic tri-plane resolution"},
      {"train.grid_channels", "tri-plane channels"},
      {"train.blocks", "blocks per axis, e.g. 2,1,2"},
      {"train.overlap", "block overlap fraction"},
      {"train.cache_dir", "directory for cached per-view targets"},
      {"render.samples", "samples per ray"},
      {"render.early_stop", "transmittance below which samples are skipped"},
      {"dict.clusters", "clusters per reference M"},
      {"dict.seed", "k-means seed"},
      {"stylize.tau", "attention temperature"},
      {"stylize.skip_weight", "total weight of skipped samples per ray"},
      {"eval.tau_frac", "warp depth tolerance as a fraction of the box diagonal"},
  };
  return keys;
}

namespace {

std::string trim(const std::string& s) {
  const size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

bool is_known(const std::string& key) {
  for (const auto& [k, _] : Config::known_keys())
    if (k == key) return true;
  return false;
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value, const char* expected) {
  fail(ErrorKind::Config, "config key " + key + " = '" + value + "' is not " + expected);
}

std::array<size_t, 3> parse_triple(const std::string& key, const std::string& v) {
  std::array<size_t, 3> out{};
  std::istringstream in(v);
  std::string part;
  size_t i = 0;
  while (std::getline(in, part, ',')) {
    part = trim(part);
    size_t x = 0;
    const auto r = std::from_chars(part.data(), part.data() + part.size(), x);
    if (i >= 3 || r.ec != std::errc() || r.ptr != part.data() + part.size()) bad_value(key, v, "three integers");
    out[i++] = x;
  }
  if (i == 1) out = {out[0], out[0], out[0]};
  else if (i != 3) bad_value(key, v, "one or three integers");
  return out;
}

}  // namespace

Config Config::parse(const std::string& text, const std::string& origin) {
  Config c;
  std::istringstream in(text);
  std::string line, section;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string where = origin + ":" + std::to_string(lineno) + ": ";
    const size_t hash = line.find_first_of("#;");
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      require(line.back() == ']', ErrorKind::Config, where + "unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      const bool known = std::any_of(known_keys().begin(), known_keys().end(),
                                     [&](const auto& k) { return k.first.rfind(section + ".", 0) == 0; });
      require(known, ErrorKind::Config, where + "unknown section [" + section + "]");
      continue;
    }
    const size_t eq = line.find('=');
    require(eq != std::string::npos, ErrorKind::Config, where + "expected key = value");
    require(!section.empty(), ErrorKind::Config, where + "key outside of a [section]");
    const std::string key = section + "." + trim(line.substr(0, eq));
    require(is_known(key), ErrorKind::Config, where + "unknown key " + key);
    c.values_[key] = trim(line.substr(eq + 1));
  }
  return c;
}

Config Config::load(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), ErrorKind::Config, "cannot read config file " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str(), path);
}

void Config::set(const std::string& key, const std::string& value) {
  require(is_known(key), ErrorKind::Config, "unknown config key " + key);
  values_[key] = value;
}

void Config::set_override(const std::string& assignment) {
  const size_t eq = assignment.find('=');
  require(eq != std::string::npos, ErrorKind::Config, "override must look like section.key=value: " + assignment);
  set(trim(assignment.substr(0, eq)), trim(assignment.substr(eq + 1)));
}

std::string Config::get_string(const std::string& key, const std::string& fallback) const {
  const auto it = values_.find(key);
  return it == values_.end() ? fallback : it->second;
}

int64_t Config::get_int(const std::string& key, int64_t fallback) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  int64_t v = 0;
  const std::string& s = it->second;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc() || r.ptr != s.data() + s.size()) bad_value(key, s, "an integer");
  return v;
}

uint64_t Config::get_u64(const std::string& key, uint64_t fallback) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  uint64_t v = 0;
  const std::string& s = it->second;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc() || r.ptr != s.data() + s.size()) bad_value(key, s, "a non-negative integer");
  return v;
}

double Config::get_real(const std::string& key, double fallback) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  const std::string& s = it->second;
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size() || errno != 0) bad_value(key, s, "a number");
  return v;
}

bool Config::get_bool(const std::string& key, bool fallback) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  const std::string& s = it->second;
  if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
  if (s == "false" || s == "0" || s == "no" || s == "off") return false;
  bad_value(key, s, "a boolean");
}

std::string default_config_text() {
  const TrainConfig t;
  const DecoderPretrainConfig d;
  std::ostringstream os;
  os << "# fprf settings. Every key is optional; command-line flags win.\n\n"
     << "[encoder]\nstyle_seed = 1234\nstyle_channels = 32\nstyle_stride = 2\n"
     << "semantic_kind = random_conv\nsemantic_seed = 4321\nsemantic_channels = 16\nsemantic_stride = 4\n"
     << "semantic_radius = 1\nguided_radius = 4\nguided_eps = 0.001\n\n"
     << "[decoder]\nsteps = " << d.steps << "\nlr = " << d.lr << "\nlambda_s = " << d.lambda_s << "\nseed = 0\n"
     << "hidden = " << d.hidden << "\ncontent_dir =\nstyle_dir =\nprocedural_fallback = true\n"
     << "corpus_size = 256\nimage_size = 64\n\n"
     << "[scene]\npreset = toy\nseed = 0\nviews = 32\nwidth = 64\nheight = 64\n\n"
     << "[train]\nsteps = " << t.steps << "\nrays = " << t.rays_per_batch << "\nsamples = " << t.samples
     << "\nlr_grid = " << t.lr_grid << "\nlr_mlp = " << t.lr_mlp << "\nlambda_rgb = " << t.lambda_rgb
     << "\nlambda_reg = " << t.lambda_reg << "\nlambda_semantic = " << t.lambda_semantic
     << "\nema_decay = " << t.ema_decay << "\nseed = 0\nearly_stop = " << t.early_stop
     << "\nstratified = true\neval_every = " << t.eval_every << "\ngrid_resolution = "
     << t.content.grid_resolution[0] << "\nsemantic_resolution = " << t.semantic.grid_resolution[0]
     << "\ngrid_channels = " << t.content.grid_channels << "\nblocks = 1,1,1\noverlap = " << t.overlap
     << "\n\n"
     << "[render]\nsamples = 64\nearly_stop = 0.0001\n\n"
     << "[dict]\nclusters = 10\nseed = 0\n\n"
     << "[stylize]\ntau = 1\nskip_weight = 0.000001\n\n"
     << "[eval]\ntau_frac = 0.01\n";
  return os.str();
}

EncoderSpec style_encoder_spec(const Config& c) {
  EncoderSpec s = EncoderSpec::style_default();
  s.seed = c.get_u64("encoder.style_seed", s.seed);
  s.channels = c.get_u64("encoder.style_channels", s.channels);
  s.stride = static_cast<int>(c.get_int("encoder.style_stride", s.stride));
  require(s.stride == 1 || s.stride == 2, ErrorKind::Config, "encoder.style_stride must be 1 or 2");
  require(s.channels >= 1, ErrorKind::Config, "encoder.style_channels must be >= 1");
  return s;
}

EncoderSpec semantic_encoder_spec(const Config& c) {
  const std::string kind = c.get_string("encoder.semantic_kind", "random_conv");
  EncoderSpec s = kind == "oracle_semantic" ? EncoderSpec::oracle_semantic() : EncoderSpec::semantic_default();
  if (kind != "oracle_semantic" && kind != "random_conv")
    fail(ErrorKind::Config, "encoder.semantic_kind must be random_conv or oracle_semantic");
  s.seed = c.get_u64("encoder.semantic_seed", s.seed);
  s.channels = c.get_u64("encoder.semantic_channels", s.channels);
  s.radius = static_cast<int>(c.get_int("encoder.semantic_radius", s.radius));
  if (s.kind == EncoderKind::RandomConv) {
    s.stride = static_cast<int>(c.get_int("encoder.semantic_stride", s.stride));
    require(s.stride == 2 || s.stride == 4, ErrorKind::Config, "encoder.semantic_stride must be 2 or 4");
  }
  require(s.channels >= 1, ErrorKind::Config, "encoder.semantic_channels must be >= 1");
  require(s.radius >= 0, ErrorKind::Config, "encoder.semantic_radius must be >= 0");
  return s;
}

UpsampleParams upsample_params(const Config& c) {
  UpsampleParams p;
  p.radius = static_cast<int>(c.get_int("encoder.guided_radius", p.radius));
  p.eps = c.get_real("encoder.guided_eps", p.eps);
  require(p.radius >= 1 && p.eps > 0.0, ErrorKind::Config, "guided filter needs radius >= 1 and eps > 0");
  return p;
}

DecoderPretrainConfig decoder_config(const Config& c) {
  DecoderPretrainConfig d;
  d.steps = c.get_u64("decoder.steps", d.steps);
  d.lr = c.get_real("decoder.lr", d.lr);
  d.lambda_s = c.get_real("decoder.lambda_s", d.lambda_s);
  d.seed = c.get_u64("decoder.seed", d.seed);
  d.hidden = c.get_u64("decoder.hidden", d.hidden);
  d.style_encoder = style_encoder_spec(c);
  d.upsample = upsample_params(c);
  require(d.steps >= 1 && d.lr > 0.0, ErrorKind::Config, "decoder.steps must be >= 1 and decoder.lr > 0");
  require(d.lambda_s >= 0.0, ErrorKind::Config, "decoder.lambda_s must be >= 0");
  return d;
}

TrainConfig train_config(const Config& c) {
  TrainConfig t;
  t.steps = c.get_u64("train.steps", t.steps);
  t.rays_per_batch = c.get_u64("train.rays", t.rays_per_batch);
  t.samples = c.get_u64("train.samples", t.samples);
  t.lr_grid = c.get_real("train.lr_grid", t.lr_grid);
  t.lr_mlp = c.get_real("train.lr_mlp", t.lr_mlp);
  t.beta1 = c.get_real("train.beta1", t.beta1);
  t.beta2 = c.get_real("train.beta2", t.beta2);
  t.adam_eps = c.get_real("train.adam_eps", t.adam_eps);
  t.lambda_rgb = c.get_real("train.lambda_rgb", t.lambda_rgb);
  t.lambda_reg = c.get_real("train.lambda_reg", t.lambda_reg);
  t.lambda_semantic = c.get_real("train.lambda_semantic", t.lambda_semantic);
  t.ema_decay = c.get_real("train.ema_decay", t.ema_decay);
  t.seed = c.get_u64("train.seed", t.seed);
  t.early_stop = c.get_real("train.early_stop", t.early_stop);
  t.stratified = c.get_bool("train.stratified", t.stratified);
  t.eval_every = c.get_u64("train.eval_every", t.eval_every);
  t.eval_samples = c.get_u64("train.eval_samples", t.eval_samples);
  t.learn_decoder = c.get_bool("train.learn_decoder", t.learn_decoder);
  t.train_semantic = c.get_bool("train.train_semantic", t.train_semantic);
  if (c.has("train.grid_resolution"))
    t.content.grid_resolution = parse_triple("train.grid_resolution", c.get_string("train.grid_resolution", ""));
  if (c.has("train.semantic_resolution"))
    t.semantic.grid_resolution =
        parse_triple("train.semantic_resolution", c.get_string("train.semantic_resolution", ""));
  t.content.grid_channels = t.semantic.grid_channels = c.get_u64("train.grid_channels", t.content.grid_channels);
  if (c.has("train.blocks")) {
    const auto b = parse_triple("train.blocks", c.get_string("train.blocks", ""));
    for (int a = 0; a < 3; ++a) t.blocks[a] = static_cast<int>(b[a]);
  }
  t.overlap = c.get_real("train.overlap", t.overlap);
  t.cache_dir = c.get_string("train.cache_dir", "");
  t.style_encoder = style_encoder_spec(c);
  t.semantic_encoder = semantic_encoder_spec(c);
  t.upsample = upsample_params(c);
  t.content.feature_dim = t.style_encoder.channels;
  t.semantic.feature_dim = t.semantic_encoder.channels;
  for (size_t r : t.content.grid_resolution) require(r >= 2, ErrorKind::Config, "grid resolution must be >= 2");
  for (size_t r : t.semantic.grid_resolution) require(r >= 2, ErrorKind::Config, "grid resolution must be >= 2");
  t.validate();
  return t;
}

RenderOptions render_options(const Config& c) {
  RenderOptions r;
  r.samples = c.get_u64("render.samples", r.samples);
  r.early_stop = c.get_real("render.early_stop", r.early_stop);
  require(r.samples >= 1, ErrorKind::Config, "render.samples must be >= 1");
  require(r.early_stop >= 0.0 && r.early_stop < 1.0, ErrorKind::Config, "render.early_stop must be in [0, 1)");
  return r;
}

StylizeOptions stylize_options(const Config& c) {
  StylizeOptions s;
  s.render = render_options(c);
  s.tau = c.get_real("stylize.tau", s.tau);
  s.skip_weight = c.get_real("stylize.skip_weight", s.skip_weight);
  require(s.tau > 0.0, ErrorKind::Config, "stylize.tau must be > 0");
  require(s.skip_weight >= 0.0, ErrorKind::Config, "stylize.skip_weight must be >= 0");
  return s;
}

SceneGenConfig scene_config(const Config& c) {
  SceneGenConfig g;
  g.spec = SyntheticSceneSpec::preset(c.get_string("scene.preset", "toy"), c.get_u64("scene.seed", 0));
  g.views = c.get_u64("scene.views", g.views);
  g.width = c.get_u64("scene.width", g.width);
  g.height = c.get_u64("scene.height", g.height);
  require(g.views >= 2, ErrorKind::Config, "scene.views must be >= 2");
  require(g.width >= 8 && g.height >= 8, ErrorKind::Config, "scene images must be at least 8x8");
  return g;
}

}  // namespace fprf
