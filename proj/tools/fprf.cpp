// Command-line front end. Exit codes: 0 ok, 2 usage or configuration error,
// 3 data or checkpoint error, 4 numerical failure.

#include <cstdio>
#include <cstdlib>
#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "fprf/checkpoint.hpp"
#include "fprf/config.hpp"
#include "fprf/corpus.hpp"
#include "fprf/dataset.hpp"
#include "fprf/error.hpp"
#include "fprf/image_io.hpp"
#include "fprf/metrics.hpp"
#include "fprf/parallel.hpp"
#include "fprf/rng.hpp"
#include "fprf/stylize.hpp"
#include "fprf/synthetic.hpp"
#include "fprf/train.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace fprf;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitData = 3;
constexpr int kExitNumeric = 4;

struct Common {
  std::string config_path;
  std::vector<std::string> overrides;

  Config load() const {
    Config c = config_path.empty() ? Config() : Config::load(config_path);
    for (const std::string& o : overrides) c.set_override(o);
    return c;
  }
};

void add_common(CLI::App* cmd, Common& common) {
  cmd->add_option("-c,--config", common.config_path, "settings file ([section] key = value)");
  cmd->add_option("--set", common.overrides, "override a setting, e.g. --set train.steps=500")->take_all();
}

json spec_json(const EncoderSpec& s) {
  return {{"kind", to_string(s.kind)},
          {"seed", s.seed},
          {"channels", s.channels},
          {"radius", s.radius},
          {"stride", s.stride}};
}

EncoderSpec spec_from_json(const json& j) {
  EncoderSpec s;
  s.kind = encoder_kind_from_string(j.at("kind").get<std::string>());
  s.seed = j.at("seed");
  s.channels = j.at("channels");
  s.radius = j.at("radius");
  s.stride = j.at("stride");
  return s;
}

std::string write_text(const std::string& path, const std::string& text) {
  const fs::path p(path);
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(path, std::ios::binary);
  out << text;
  require(out.good(), ErrorKind::Data, "cannot write " + path);
  return path;
}

std::vector<size_t> parse_index_list(const std::string& s) {
  std::vector<size_t> out;
  std::istringstream in(s);
  std::string part;
  while (std::getline(in, part, ',')) {
    if (part.empty()) continue;
    try {
      size_t used = 0;
      const unsigned long v = std::stoul(part, &used);
      require(used == part.size(), ErrorKind::Config, "");
      out.push_back(v);
    } catch (const std::exception&) {
      fail(ErrorKind::Config, "bad view index '" + part + "'");
    }
  }
  return out;
}

CameraModel camera_from_file(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), ErrorKind::Config, "cannot read camera file " + path);
  const json j = json::parse(in);
  CameraModel c;
  const auto m = j.at("c2w").get<std::vector<double>>();
  require(m.size() == 16, ErrorKind::Config, "camera c2w needs 16 numbers");
  for (int r = 0; r < 4; ++r)
    for (int k = 0; k < 4; ++k) c.camera_to_world(r, k) = m[r * 4 + k];
  c.fx = j.at("fx");
  c.fy = j.at("fy");
  c.cx = j.at("cx");
  c.cy = j.at("cy");
  c.width = j.at("width");
  c.height = j.at("height");
  c.near = j.at("near");
  c.far = j.at("far");
  c.validate();
  return c;
}

// Cameras chosen by --camera, or by --dataset with --views / --all.
struct CameraSelection {
  std::string camera_file;
  std::string dataset_dir;
  std::string views;
  bool all = false;

  void add_to(CLI::App* cmd) {
    cmd->add_option("--camera", camera_file, "camera JSON (same fields as a poses.json frame)");
    cmd->add_option("--dataset", dataset_dir, "dataset directory supplying cameras");
    cmd->add_option("--views", views, "comma-separated dataset view indices");
    cmd->add_flag("--all", all, "every view of the dataset");
  }

  std::vector<std::pair<std::string, CameraModel>> resolve() const {
    std::vector<std::pair<std::string, CameraModel>> out;
    if (!camera_file.empty()) out.emplace_back("camera", camera_from_file(camera_file));
    if (!dataset_dir.empty()) {
      const SceneDataset ds = load_dataset(dataset_dir);
      std::vector<size_t> idx = parse_index_list(views);
      if (all || idx.empty())
        for (size_t i = 0; i < ds.views.size(); ++i) idx.push_back(i);
      for (size_t i : idx) {
        require(i < ds.views.size(), ErrorKind::Config, "view index " + std::to_string(i) + " out of range");
        out.emplace_back(view_name(i), ds.views[i].camera);
      }
    }
    require(!out.empty(), ErrorKind::Config, "no camera given (use --camera or --dataset)");
    return out;
  }
};

struct LoadedScene {
  SceneCheckpoint ckpt;
  json meta;
  EncoderSpec style = EncoderSpec::style_default();
  EncoderSpec semantic = EncoderSpec::semantic_default();
};

LoadedScene load_scene(const std::string& path) {
  LoadedScene s;
  s.ckpt = load_scene_checkpoint(path);
  s.meta = json::parse(s.ckpt.meta_json);
  try {
    if (s.meta.contains("style_encoder")) s.style = spec_from_json(s.meta["style_encoder"]);
    if (s.meta.contains("semantic_encoder")) s.semantic = spec_from_json(s.meta["semantic_encoder"]);
  } catch (const json::exception& e) {
    fail(ErrorKind::Data, path + ": malformed encoder description: " + e.what());
  }
  return s;
}

std::vector<Tensor> corpus_or_procedural(const std::string& dir, bool fallback, size_t n, size_t size,
                                         uint64_t seed, const char* what) {
  if (dir.empty()) return procedural_corpus(n, size, seed);
  if (!fs::is_directory(dir)) {
    require(fallback, ErrorKind::Config,
            std::string(what) + " directory " + dir + " not found and decoder.procedural_fallback is off");
    std::cerr << "warning: " << what << " directory " << dir << " not found, using procedural images\n";
    return procedural_corpus(n, size, seed);
  }
  return load_image_corpus(dir);
}

// ---- subcommands -----------------------------------------------------------

int cmd_pretrain(const Common& common, const std::string& out, std::optional<uint64_t> seed,
                 std::optional<size_t> steps) {
  Config c = common.load();
  if (seed) c.set("decoder.seed", std::to_string(*seed));
  if (steps) c.set("decoder.steps", std::to_string(*steps));
  const DecoderPretrainConfig cfg = decoder_config(c);
  const bool fallback = c.get_bool("decoder.procedural_fallback", true);
  const size_t n = c.get_u64("decoder.corpus_size", 256), size = c.get_u64("decoder.image_size", 64);
  const auto content = corpus_or_procedural(c.get_string("decoder.content_dir", ""), fallback, n, size,
                                            mix_seed(cfg.seed, 101), "content");
  const auto style =
      corpus_or_procedural(c.get_string("decoder.style_dir", ""), fallback, n, size, mix_seed(cfg.seed, 202), "style");
  const DecoderPretrainResult res = pretrain_decoder(content, style, cfg);
  ColorDecoder dec = res.decoder;
  round_to_storage(dec.mlp);
  const json meta = {{"kind", "decoder"},
                     {"style_encoder", spec_json(cfg.style_encoder)},
                     {"steps", cfg.steps},
                     {"seed", cfg.seed},
                     {"lambda_s", cfg.lambda_s}};
  save_decoder_file(out, dec, meta.dump());
  json curve = {{"loss", res.loss}, {"content_loss", res.content_loss}, {"style_loss", res.style_loss}};
  write_text(out + ".loss.json", curve.dump() + "\n");
  std::cout << "decoder written to " << out << " (" << cfg.steps << " steps, final loss " << res.loss.back()
            << ")\n";
  return 0;
}

int cmd_synth(const Common& common, const std::string& out, const std::string& preset, std::optional<size_t> views,
              std::optional<uint64_t> seed) {
  Config c = common.load();
  if (!preset.empty()) c.set("scene.preset", preset);
  if (views) c.set("scene.views", std::to_string(*views));
  if (seed) c.set("scene.seed", std::to_string(*seed));
  const SceneGenConfig g = scene_config(c);
  const SceneDataset ds = generate_synthetic_scene(g.spec, g.views, g.width, g.height);
  save_dataset(ds, out);
  std::cout << "wrote " << ds.views.size() << " views to " << out << "\n";
  return 0;
}

int cmd_validate(const std::string& dir) {
  const std::vector<std::string> problems = validate_dataset_dir(dir);
  if (problems.empty()) {
    std::cout << "ok: " << dir << "\n";
    return 0;
  }
  for (const std::string& p : problems) std::cerr << "invalid: " << p << "\n";
  return kExitData;
}

int cmd_train(const Common& common, const std::string& dataset_dir, const std::string& decoder_path,
              const std::string& out, std::string report, const std::string& resume, std::optional<size_t> steps,
              std::optional<uint64_t> seed) {
  Config c = common.load();
  if (steps) c.set("train.steps", std::to_string(*steps));
  if (seed) c.set("train.seed", std::to_string(*seed));
  const TrainConfig cfg = train_config(c);
  const SceneDataset ds = load_dataset(dataset_dir);
  std::string dec_meta;
  ColorDecoder decoder = load_decoder_file(decoder_path, &dec_meta);
  if (!dec_meta.empty()) {
    const json m = json::parse(dec_meta, nullptr, false);
    if (m.is_object() && m.contains("style_encoder"))
      require(spec_from_json(m["style_encoder"]) == cfg.style_encoder, ErrorKind::Config,
              "decoder was pretrained with a different style encoder than [encoder] describes");
  }

  std::optional<TrainState> state;
  if (!resume.empty()) {
    SceneCheckpoint k = load_scene_checkpoint(resume);
    require(k.semantic && k.stats, ErrorKind::Data, resume + ": checkpoint lacks semantic field or statistics");
    TrainState s;
    s.content = std::move(k.content);
    s.semantic = std::move(*k.semantic);
    s.stats = *k.stats;
    s.adam = std::move(k.adam);
    s.step = k.step;
    if (cfg.learn_decoder && k.decoder) s.decoder = *k.decoder;
    state = std::move(s);
  }

  if (report.empty()) report = out + ".report.jsonl";
  const fs::path rp(report);
  if (rp.has_parent_path()) fs::create_directories(rp.parent_path());
  std::ofstream rep(report, resume.empty() ? std::ios::trunc : std::ios::app);
  require(rep.good(), ErrorKind::Data, "cannot write report " + report);
  TrainResult res = train_scene(ds, decoder, cfg, std::move(state), [&](const TrainRecord& r) {
    rep << r.to_json() << "\n";
    if (r.psnr) std::cout << "step " << r.step << " loss " << r.loss << " psnr " << *r.psnr << std::endl;
  });
  rep << json{{"final_psnr", res.final_psnr}, {"step", res.state.step}, {"wall_time", res.seconds}}.dump() << "\n";

  SceneCheckpoint k;
  k.content = res.state.content;
  k.semantic = res.state.semantic;
  k.stats = res.state.stats;
  k.decoder = res.state.decoder ? *res.state.decoder : decoder;
  k.adam = res.state.adam;
  k.step = res.state.step;
  k.meta_json = json{{"kind", "scene"},
                     {"style_encoder", spec_json(cfg.style_encoder)},
                     {"semantic_encoder", spec_json(cfg.semantic_encoder)},
                     {"guided_radius", cfg.upsample.radius},
                     {"guided_eps", cfg.upsample.eps},
                     {"learn_decoder", cfg.learn_decoder},
                     {"final_psnr", res.final_psnr}}
                    .dump();
  save_scene_checkpoint(out, k);
  std::cout << "final held-out PSNR " << res.final_psnr << " dB after step " << res.state.step << "\n";
  return 0;
}

int cmd_build_dict(const Common& common, const std::vector<std::string>& images,
                   const std::vector<std::string>& label_files, std::optional<size_t> clusters,
                   std::optional<uint64_t> seed, const std::string& scene, const std::string& out,
                   const std::string& json_out) {
  Config c = common.load();
  if (clusters) c.set("dict.clusters", std::to_string(*clusters));
  if (seed) c.set("dict.seed", std::to_string(*seed));
  DictionaryEncoders enc{style_encoder_spec(c), semantic_encoder_spec(c)};
  if (!scene.empty()) {
    const LoadedScene s = load_scene(scene);
    enc = {s.style, s.semantic};
  }
  const size_t m = c.get_u64("dict.clusters", 10);
  require(m >= 1, ErrorKind::Config, "dict.clusters must be >= 1");
  require(label_files.empty() || label_files.size() == images.size(), ErrorKind::Config,
          "give one --labels file per reference or none");
  std::vector<Tensor> refs;
  for (const std::string& p : images) refs.push_back(read_png_rgb(p));
  std::vector<LabelMap> labels(label_files.size());
  std::vector<const LabelMap*> label_ptrs;
  for (size_t i = 0; i < label_files.size(); ++i) {
    labels[i].ids = read_png_channel(label_files[i], 0, labels[i].height, labels[i].width);
    label_ptrs.push_back(&labels[i]);
  }
  if (enc.semantic.kind == EncoderKind::OracleSemantic)
    require(!label_ptrs.empty(), ErrorKind::Config, "the oracle semantic encoder needs --labels");
  const StyleDictionary dict = build_dictionary(refs, m, enc, c.get_u64("dict.seed", 0), label_ptrs);
  const json meta = {{"kind", "dictionary"},
                     {"style_encoder", spec_json(enc.style)},
                     {"semantic_encoder", spec_json(enc.semantic)},
                     {"references", images},
                     {"clusters", m}};
  save_dictionary_file(out, dict, meta.dump());
  if (!json_out.empty()) write_text(json_out, dictionary_json(dict) + "\n");
  std::cout << "T = " << dict.size() << " entries from " << refs.size() << " reference(s)\n";
  std::printf("build time: %.3f s\n", dict.build_seconds);
  return 0;
}

void write_output(const std::string& dir, const std::string& name, const Tensor& img, RenderMode mode,
                  double far) {
  fs::create_directories(dir);
  const std::string base = (fs::path(dir) / name).string();
  if (mode == RenderMode::Color) {
    write_png(base + ".png", img);
  } else if (mode == RenderMode::Depth) {
    save_fpt(base + ".depth.fpt", img);
    Tensor vis = img;
    for (Real& v : vis.vec()) v = v > 0.0 ? 1.0 - v / far : 0.0;
    write_png(base + ".depth.png", vis);
  } else {
    save_fpt(base + ".features.fpt", img);
  }
}

int cmd_render(const Common& common, const std::string& ckpt_path, const CameraSelection& cams,
               const std::string& mode_name, const std::string& out, std::optional<size_t> samples) {
  Config c = common.load();
  if (samples) c.set("render.samples", std::to_string(*samples));
  const RenderMode mode = render_mode_from_string(mode_name);
  const RenderOptions opt = render_options(c);
  const LoadedScene s = load_scene(ckpt_path);
  const auto cameras = cams.resolve();
  if (mode == RenderMode::Color) require(s.ckpt.decoder.has_value(), ErrorKind::Data, "checkpoint has no decoder");
  if (mode == RenderMode::SemanticFeature)
    require(s.ckpt.semantic.has_value(), ErrorKind::Data, "checkpoint has no semantic field");
  for (const auto& [name, cam] : cameras) {
    const Tensor img = render_image(s.ckpt.content, s.ckpt.semantic ? &*s.ckpt.semantic : nullptr, cam, mode,
                                    s.ckpt.decoder ? &*s.ckpt.decoder : nullptr, opt);
    write_output(out, name, img, mode, cam.far);
  }
  std::cout << "rendered " << cameras.size() << " view(s) in " << to_string(mode) << " mode to " << out << "\n";
  return 0;
}

int cmd_stylize(const Common& common, const std::string& ckpt_path, const std::string& dict_path,
                const std::string& style_path, const CameraSelection& cams, const std::string& out) {
  Config c = common.load();
  const StylizeOptions opt = stylize_options(c);
  require(dict_path.empty() != style_path.empty(), ErrorKind::Config, "give exactly one of --dict or --style");
  const LoadedScene s = load_scene(ckpt_path);
  require(s.ckpt.stats && s.ckpt.stats->initialized, ErrorKind::Data,
          ckpt_path + ": checkpoint has no content statistics (CSTA)");
  require(s.ckpt.decoder.has_value(), ErrorKind::Data, ckpt_path + ": checkpoint has no decoder (DVGG)");
  const auto cameras = cams.resolve();
  std::optional<StyleDictionary> dict;
  std::optional<Tensor> style;
  if (!dict_path.empty()) {
    require(s.ckpt.semantic.has_value(), ErrorKind::Data, ckpt_path + ": checkpoint has no semantic field");
    dict = load_dictionary_file(dict_path);
  } else {
    style = read_png_rgb(style_path);
  }
  for (const auto& [name, cam] : cameras) {
    const Tensor img =
        dict ? render_stylized(s.ckpt.content, *s.ckpt.semantic, *dict, *s.ckpt.stats, *s.ckpt.decoder, cam, opt)
             : render_stylized_global(s.ckpt.content, *s.ckpt.stats, *s.ckpt.decoder, cam, *style, s.style, opt);
    write_output(out, name, img, RenderMode::Color, cam.far);
  }
  std::cout << "stylized " << cameras.size() << " view(s) to " << out << "\n";
  return 0;
}

std::vector<std::pair<size_t, size_t>> parse_pairs(const std::string& s, size_t n) {
  std::vector<std::pair<size_t, size_t>> out;
  if (s.empty()) {
    for (size_t i = 0; i + 1 < n; ++i) out.emplace_back(i, i + 1);
    return out;
  }
  std::istringstream in(s);
  std::string part;
  while (std::getline(in, part, ',')) {
    const size_t dash = part.find('-');
    require(dash != std::string::npos, ErrorKind::Config, "pairs look like 0-1,1-2");
    const auto a = parse_index_list(part.substr(0, dash)), b = parse_index_list(part.substr(dash + 1));
    require(a.size() == 1 && b.size() == 1 && a[0] < n && b[0] < n, ErrorKind::Config, "bad pair '" + part + "'");
    out.emplace_back(a[0], b[0]);
  }
  return out;
}

int cmd_eval(const Common& common, const std::string& metric, const std::string& a_dir, const std::string& b_dir,
             const std::string& dataset_dir, const std::string& ckpt_path, const std::string& pairs_arg,
             const std::string& out) {
  Config c = common.load();
  json report;
  report["metric"] = metric;
  json rows = json::array();
  double sum = 0.0;
  if (metric == "psnr") {
    require(!a_dir.empty() && !b_dir.empty(), ErrorKind::Config, "psnr needs --a and --b image directories");
    std::vector<std::string> names;
    for (const auto& e : fs::directory_iterator(a_dir))
      if (e.path().extension() == ".png") names.push_back(e.path().filename().string());
    std::sort(names.begin(), names.end());
    require(!names.empty(), ErrorKind::Data, "no PNG images in " + a_dir);
    for (const std::string& n : names) {
      const Real v = psnr(read_png_rgb((fs::path(a_dir) / n).string()), read_png_rgb((fs::path(b_dir) / n).string()));
      rows.push_back({{"image", n}, {"value", std::isinf(v) ? json("inf") : json(v)}});
      sum += v;
    }
    report["mean"] = std::isinf(sum) ? json("inf") : json(sum / static_cast<double>(names.size()));
  } else if (metric == "warp") {
    require(!dataset_dir.empty(), ErrorKind::Config, "warp needs --dataset for cameras (and depth)");
    const SceneDataset ds = load_dataset(dataset_dir);
    const std::string img_dir = a_dir.empty() ? (fs::path(dataset_dir) / "images").string() : a_dir;
    const Real tau = c.get_real("eval.tau_frac", 0.01) * ds.aabb.diagonal();
    std::optional<LoadedScene> scene;
    if (!ckpt_path.empty()) scene = load_scene(ckpt_path);
    else require(ds.has_depth(), ErrorKind::Data, "dataset has no depth maps; pass --ckpt to render depth");
    const RenderOptions opt = render_options(c);
    std::map<size_t, Tensor> depth_cache;
    auto depth_of = [&](size_t i) -> const Tensor& {
      auto it = depth_cache.find(i);
      if (it != depth_cache.end()) return it->second;
      Tensor d = scene ? render_depth_map(scene->ckpt.content, ds.views[i].camera, opt).depth : *ds.views[i].depth;
      return depth_cache.emplace(i, std::move(d)).first->second;
    };
    const auto pairs = parse_pairs(pairs_arg, ds.views.size());
    require(!pairs.empty(), ErrorKind::Config, "no view pairs to evaluate");
    for (const auto& [d, dp] : pairs) {
      const Tensor id = read_png_rgb((fs::path(img_dir) / (view_name(d) + ".png")).string());
      const Tensor idp = read_png_rgb((fs::path(img_dir) / (view_name(dp) + ".png")).string());
      const Real e = warp_error(id, idp, depth_of(d), depth_of(dp), ds.views[d].camera, ds.views[dp].camera, tau);
      rows.push_back({{"target", d}, {"source", dp}, {"value", e}});
      sum += e;
    }
    report["tau"] = tau;
    report["mean"] = sum / static_cast<double>(pairs.size());
  } else {
    fail(ErrorKind::Config, "unknown metric '" + metric + "' (psnr|warp)");
  }
  report["results"] = rows;
  const std::string text = report.dump(2) + "\n";
  if (out.empty()) std::cout << text;
  else write_text(out, text);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Feed-forward photorealistic style transfer for tri-plane radiance fields"};
  app.require_subcommand(1);
  int threads = 0;
  app.add_option("--threads", threads, "worker threads (default: FPRF_THREADS or 1)")->check(CLI::NonNegativeNumber);
  app.add_flag_callback("--print-config", [] {
    std::cout << default_config_text();
    std::exit(0);
  }, "print the default settings file and exit");

  Common common;
  std::string out, preset, dataset, decoder, report, resume, ckpt, mode = "color", dict, style, scene_ckpt,
                                                                  json_out, metric, a_dir, b_dir, pairs;
  std::optional<uint64_t> seed;
  std::optional<size_t> steps, views, clusters, samples;
  std::vector<std::string> images, labels;
  std::string validate_dir;
  CameraSelection cams;

  auto* pre = app.add_subcommand("pretrain-decoder", "pretrain the color decoder");
  add_common(pre, common);
  pre->add_option("-o,--out", out, "decoder checkpoint path")->required();
  pre->add_option("--seed", seed, "pretraining seed");
  pre->add_option("--steps", steps, "pretraining steps");

  auto* synth = app.add_subcommand("synth-scene", "generate a synthetic dataset");
  add_common(synth, common);
  synth->add_option("-o,--out", out, "output dataset directory")->required();
  synth->add_option("--preset", preset, "toy | two_region | street");
  synth->add_option("--views", views, "number of views (>= 2)");
  synth->add_option("--seed", seed, "camera orbit seed");

  auto* val = app.add_subcommand("validate-dataset", "check a dataset directory");
  val->add_option("dir", validate_dir, "dataset directory")->required();

  auto* train = app.add_subcommand("train", "train content and semantic fields");
  add_common(train, common);
  train->add_option("--dataset", dataset, "dataset directory")->required();
  train->add_option("--decoder", decoder, "pretrained decoder checkpoint")->required();
  train->add_option("-o,--out", out, "scene checkpoint path")->required();
  train->add_option("--report", report, "JSON-lines report (default: <out>.report.jsonl)");
  train->add_option("--resume", resume, "continue from a scene checkpoint");
  train->add_option("--steps", steps, "steps to run");
  train->add_option("--seed", seed, "training seed");

  auto* bd = app.add_subcommand("build-dict", "build a style dictionary from reference images");
  add_common(bd, common);
  bd->add_option("images", images, "reference PNG images")->required();
  bd->add_option("--labels", labels, "region-ID PNGs for the oracle semantic encoder");
  bd->add_option("-M,--clusters", clusters, "clusters per reference");
  bd->add_option("--seed", seed, "k-means seed");
  bd->add_option("--scene", scene_ckpt, "take encoder settings from a scene checkpoint");
  bd->add_option("-o,--out", out, "dictionary file")->required();
  bd->add_option("--json", json_out, "also write a JSON dump");

  auto* render = app.add_subcommand("render", "render views of a trained scene");
  add_common(render, common);
  render->add_option("--ckpt", ckpt, "scene checkpoint")->required();
  cams.add_to(render);
  render->add_option("--mode", mode, "color | content_feature | semantic_feature | depth");
  render->add_option("-o,--out", out, "output directory")->required();
  render->add_option("--samples", samples, "samples per ray");

  auto* sty = app.add_subcommand("stylize", "render stylized views");
  add_common(sty, common);
  sty->add_option("--ckpt", ckpt, "scene checkpoint")->required();
  sty->add_option("--dict", dict, "style dictionary file");
  sty->add_option("--style", style, "single style image (global AdaIN)");
  cams.add_to(sty);
  sty->add_option("-o,--out", out, "output directory")->required();

  auto* ev = app.add_subcommand("eval", "PSNR or warp-error report");
  add_common(ev, common);
  ev->add_option("--metric", metric, "psnr | warp")->required();
  ev->add_option("--a", a_dir, "images (psnr: first set; warp: views named NNNN.png)");
  ev->add_option("--b", b_dir, "second image set (psnr)");
  ev->add_option("--dataset", dataset, "dataset with cameras and depth (warp)");
  ev->add_option("--ckpt", ckpt, "scene checkpoint to render depth from (warp)");
  ev->add_option("--pairs", pairs, "target-source view pairs, e.g. 0-1,1-2 (default: adjacent)");
  ev->add_option("-o,--out", out, "report path (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (threads > 0) set_num_threads(threads);
    if (pre->parsed()) return cmd_pretrain(common, out, seed, steps);
    if (synth->parsed()) return cmd_synth(common, out, preset, views, seed);
    if (val->parsed()) return cmd_validate(validate_dir);
    if (train->parsed()) return cmd_train(common, dataset, decoder, out, report, resume, steps, seed);
    if (bd->parsed()) return cmd_build_dict(common, images, labels, clusters, seed, scene_ckpt, out, json_out);
    if (render->parsed()) return cmd_render(common, ckpt, cams, mode, out, samples);
    if (sty->parsed()) return cmd_stylize(common, ckpt, dict, style, cams, out);
    if (ev->parsed()) return cmd_eval(common, metric, a_dir, b_dir, dataset, ckpt, pairs, out);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    switch (e.kind()) {
      case ErrorKind::Config: return kExitUsage;
      case ErrorKind::Numeric: return kExitNumeric;
      default: return kExitData;
    }
  } catch (const json::exception& e) {
    std::cerr << "error: malformed JSON: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitUsage;
}
