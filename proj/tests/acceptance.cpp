// Acceptance run: one PASS/FAIL line per criterion, exit status 1 when any fails.
//
//   fprf_acceptance <path to the fprf executable> [criterion numbers...]

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <regex>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "fprf/corpus.hpp"
#include "fprf/decoder.hpp"
#include "fprf/imgproc.hpp"
#include "fprf/kmeans.hpp"
#include "fprf/metrics.hpp"
#include "fprf/numeric.hpp"
#include "fprf/stylize.hpp"
#include "fprf/volume.hpp"
#include "support.hpp"

using namespace fprf;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t).count();
}

std::string cli_path;

// ---------------------------------------------------------------- 1

Outcome gradient_suite() {
  const auto t0 = std::chrono::steady_clock::now();
  const std::vector<test::GradientCheck> checks = test::run_gradient_suite();
  const double secs = seconds_since(t0);
  Real worst = 0.0;
  std::string worst_name;
  for (const auto& c : checks)
    if (c.max_rel_error >= worst) {
      worst = c.max_rel_error;
      worst_name = c.name;
    }
  return {worst < 1e-5 && secs < 120.0,
          fmt("%zu paths, max relative error %.3g (%s), %.1f s", checks.size(), worst, worst_name.c_str(), secs)};
}

// ---------------------------------------------------------------- 2

Outcome adain_exactness() {
  const Tensor f = test::random_tensor({400, 16}, 1, -3.0, 5.0);
  const ChannelStats c = channel_stats(f);
  const Tensor mu_s = test::random_tensor({16}, 2), sd_s = test::random_tensor({16}, 3, 0.1, 2.0);
  const ChannelStats out = channel_stats(adain(f, c.mean, c.std, mu_s, sd_s));
  Real err = 0.0;
  for (size_t k = 0; k < 16; ++k) err = std::max({err, std::abs(out.mean[k] - mu_s[k]), std::abs(out.std[k] - sd_s[k])});
  const bool identity = adain(f, c.mean, c.std, c.mean, c.std).vec() == f.vec();
  return {err <= 1e-5 && identity, fmt("stats error %.3g, identity %s", err, identity ? "exact" : "NOT exact")};
}

// ---------------------------------------------------------------- 3

Outcome volume_conservation() {
  Rng rng(17);
  Real cons = 0.0;
  bool in_range = true;
  for (int trial = 0; trial < 2000; ++trial) {
    const size_t k = 1 + rng.below(64);
    std::vector<Real> sig(k), del(k);
    for (size_t i = 0; i < k; ++i) {
      sig[i] = rng.uniform() < 0.2 ? 0.0 : std::exp(rng.uniform(-6.0, 6.0));
      del[i] = rng.uniform(1e-3, 0.2);
    }
    const RenderWeights w = compute_weights(sig, del);
    Real sum = w.transmittance_end();
    for (Real x : w.weights) {
      in_range = in_range && x >= 0.0 && x <= 1.0;
      sum += x;
    }
    cons = std::max(cons, std::abs(sum - 1.0));
  }

  // Opaque first sample: the output is its value.
  Tensor values({3, 2});
  values.vec() = {0.25, 0.75, 0.1, 0.2, 0.9, 0.4};
  const VolumeRenderResult opaque = volume_render(values, std::vector<Real>{1e6, 3.0, 2.0}, std::vector<Real>{0.1, 0.1, 0.1});
  const Real opaque_err = std::max(std::abs(opaque.out[0] - 0.25), std::abs(opaque.out[1] - 0.75));

  // K = 2 closed form.
  const Real s0 = 1.3, s1 = 4.0, d0 = 0.2, d1 = 0.35;
  Tensor v2({2, 1});
  v2.vec() = {0.6, 0.2};
  const VolumeRenderResult two = volume_render(v2, std::vector<Real>{s0, s1}, std::vector<Real>{d0, d1});
  const Real a0 = 1.0 - std::exp(-s0 * d0), a1 = 1.0 - std::exp(-s1 * d1);
  const Real closed = a0 * 0.6 + (1.0 - a0) * a1 * 0.2;
  const Real k2_err = std::abs(two.out[0] - closed);
  return {in_range && cons <= 1e-6 && opaque_err <= 1e-6 && k2_err <= 1e-6,
          fmt("weights in [0,1]: %s, conservation %.3g, opaque %.3g, K=2 %.3g", in_range ? "yes" : "no", cons,
              opaque_err, k2_err)};
}

// ---------------------------------------------------------------- 4

Outcome reduction_property() {
  const test::TrainedScene toy = test::trained_scene("toy_default", test::toy_dataset(), TrainConfig{});
  const SceneCheckpoint& ck = toy.checkpoint;
  const Tensor style = procedural_image(41, 64, PatternKind::ValueNoise);
  const DictionaryEncoders enc;
  const StyleDictionary dict = build_dictionary({style}, 1, enc, 0);
  Real worst = 0.0;
  for (size_t v : {7u, 15u}) {
    const CameraModel& cam = test::toy_dataset().views[v].camera;
    const Tensor multi = render_stylized(ck.content, *ck.semantic, dict, *ck.stats, *ck.decoder, cam);
    const Tensor global = render_stylized_global(ck.content, *ck.stats, *ck.decoder, cam, style, enc.style);
    worst = std::max(worst, test::max_abs_diff(multi, global));
  }
  return {worst <= 1e-6, fmt("max per-pixel difference %.3g over 2 views", worst)};
}

// ---------------------------------------------------------------- 5

Outcome view_independence() {
  const test::TrainedScene scene =
      test::trained_scene("two_region_oracle", test::two_region_dataset(), test::two_region_config());
  const SceneCheckpoint& ck = scene.checkpoint;
  const DictionaryEncoders enc{EncoderSpec::style_default(), EncoderSpec::oracle_semantic()};
  // Region 1 on the left, region 2 on the right of each reference.
  LabelMap halves{64, 64, std::vector<uint8_t>(64 * 64, 1)};
  for (size_t y = 0; y < 64; ++y)
    for (size_t x = 32; x < 64; ++x) halves.ids[y * 64 + x] = 2;
  const StyleDictionary dict = build_dictionary(
      {procedural_image(1, 64, PatternKind::ValueNoise), procedural_image(2, 64, PatternKind::Stripes)}, 4, enc, 0,
      {&halves, &halves});

  // Eight directions spread over the sphere (Fibonacci lattice).
  std::vector<Vec3> dirs;
  for (int i = 0; i < 8; ++i) {
    const Real z = 1.0 - (2.0 * i + 1.0) / 8.0, r = std::sqrt(1.0 - z * z);
    const Real phi = i * std::numbers::pi * (3.0 - std::sqrt(5.0));
    dirs.emplace_back(r * std::cos(phi), z, r * std::sin(phi));
  }
  const std::vector<Vec3> probes = {Vec3(-0.35, 0.1, 0.0), Vec3(0.3, 0.05, 0.1), Vec3(0.0, -0.2, 0.3)};
  size_t compared = 0, mismatched = 0;
  for (const Vec3& p : probes) {
    const std::vector<Real> ref_sem = semantic_query(*ck.semantic, p);
    const Tensor ref_att = point_attention(*ck.semantic, dict, std::span<const Vec3>(&p, 1));
    const Real ref_sigma = content_query(ck.content, p, dirs[0]).sigma;
    for (size_t k = 0; k < dirs.size(); ++k) {
      // The probe sits inside a batch of samples along a ray with direction k.
      std::vector<Vec3> batch;
      for (int j = -4; j <= 4; ++j) batch.push_back(p + 0.05 * static_cast<Real>(j) * dirs[k]);
      const size_t at = 4;
      SemanticSamples s;
      eval_semantic(*ck.semantic, batch, s);
      const Tensor att = point_attention(*ck.semantic, dict, batch);
      ContentSamples cs;
      eval_content_density(ck.content, batch, cs);
      bool same = content_query(ck.content, p, dirs[k]).sigma == ref_sigma && cs.sigma[at] == ref_sigma;
      for (size_t c = 0; c < ref_sem.size(); ++c) same = same && s.features.at(at, c) == ref_sem[c];
      for (size_t t = 0; t < dict.size(); ++t) same = same && att.at(at, t) == ref_att.at(0, t);
      ++compared;
      mismatched += !same;
    }
  }
  return {mismatched == 0, fmt("%zu point/direction pairs, %zu not bitwise identical", compared, mismatched)};
}

// ---------------------------------------------------------------- 6

Outcome toy_reconstruction() {
  const TrainConfig frozen_cfg;
  const test::TrainedScene frozen = test::trained_scene("toy_default", test::toy_dataset(), frozen_cfg, true);
  TrainConfig learn_cfg;
  learn_cfg.learn_decoder = true;
  const test::TrainedScene learned = test::trained_scene("toy_learned_decoder", test::toy_dataset(), learn_cfg, true);
  const bool ok = frozen.final_psnr >= 22.0 && frozen.seconds <= 600.0 &&
                  std::abs(frozen.final_psnr - learned.final_psnr) <= 2.0;
  return {ok, fmt("frozen decoder %.2f dB in %.0f s; learnable decoder %.2f dB in %.0f s", frozen.final_psnr,
                  frozen.seconds, learned.final_psnr, learned.seconds)};
}

// ---------------------------------------------------------------- 7

// Reference image leaning towards one color, every pixel in one region.
Tensor tinted(uint64_t seed, const Vec3& color) {
  Tensor t = procedural_image(seed, 64, PatternKind::ValueNoise);
  for (size_t p = 0; p < 64 * 64; ++p)
    for (size_t c = 0; c < 3; ++c) t[p * 3 + c] = 0.3 * t[p * 3 + c] + 0.7 * color[c];
  return t;
}

Vec3 mean_color(const Tensor& img, const std::vector<uint8_t>* labels, uint8_t region) {
  Vec3 m = Vec3::Zero();
  size_t n = 0;
  const size_t pixels = img.dim(0) * img.dim(1);
  for (size_t p = 0; p < pixels; ++p) {
    if (labels && (*labels)[p] != region) continue;
    for (size_t c = 0; c < 3; ++c) m[c] += img[p * 3 + c];
    ++n;
  }
  return n ? Vec3(m / static_cast<Real>(n)) : m;
}

Outcome semantic_stylization() {
  const SceneDataset& data = test::two_region_dataset();
  const TrainConfig cfg = test::two_region_config();
  const test::TrainedScene scene = test::trained_scene("two_region_oracle", data, cfg);
  const SceneCheckpoint& ck = scene.checkpoint;
  const std::vector<Tensor> refs = {tinted(1, Vec3(0.9, 0.2, 0.1)), tinted(2, Vec3(0.1, 0.3, 0.9))};
  const LabelMap la{64, 64, std::vector<uint8_t>(64 * 64, 1)}, lb{64, 64, std::vector<uint8_t>(64 * 64, 2)};
  const DictionaryEncoders enc{cfg.style_encoder, cfg.semantic_encoder};
  const StyleDictionary dict = build_dictionary(refs, 1, enc, 0, {&la, &lb});
  const StylizeOptions opt;
  bool ok = dict.size() == 2;
  std::string detail = fmt("T=%zu;", dict.size());
  for (size_t v : holdout_views(data)) {
    const View& view = data.views[v];
    const Tensor plain = render_image(ck.content, &*ck.semantic, view.camera, RenderMode::Color, &*ck.decoder, opt.render);
    const Tensor styl = render_stylized(ck.content, *ck.semantic, dict, *ck.stats, *ck.decoder, view.camera, opt);
    for (uint8_t reg : {1, 2}) {
      const Vec3 target = mean_color(refs[reg - 1], nullptr, 0);
      const Real before = (mean_color(plain, &view.labels->ids, reg) - target).norm();
      const Real after = (mean_color(styl, &view.labels->ids, reg) - target).norm();
      ok = ok && after < before;
      detail += fmt(" v%zu/r%d %.3f->%.3f", v, reg, before, after);
    }
  }
  return {ok, detail};
}

// ---------------------------------------------------------------- 8

Outcome warp_consistency() {
  const SceneDataset& data = test::toy_dataset();
  const SceneCheckpoint ck = test::trained_scene("toy_default", data, TrainConfig{}).checkpoint;
  const Real tau = default_warp_tau(data.aabb.diagonal());
  const StylizeOptions opt;
  const std::vector<Tensor> styles = {procedural_image(7, 64, PatternKind::Gradient),
                                      procedural_image(8, 64, PatternKind::ValueNoise),
                                      procedural_image(9, 64, PatternKind::Stripes)};
  const StyleDictionary dict = build_dictionary(styles, 3, DictionaryEncoders{}, 0);
  const size_t n = 8;
  std::vector<Tensor> plain, global, multi, depth;
  for (size_t i = 0; i < n; ++i) {
    const CameraModel& cam = data.views[i].camera;
    plain.push_back(render_image(ck.content, &*ck.semantic, cam, RenderMode::Color, &*ck.decoder, opt.render));
    global.push_back(render_stylized_global(ck.content, *ck.stats, *ck.decoder, cam, styles[0], EncoderSpec::style_default(), opt));
    multi.push_back(render_stylized(ck.content, *ck.semantic, dict, *ck.stats, *ck.decoder, cam, opt));
    depth.push_back(render_depth_map(ck.content, cam, opt.render).depth);
  }
  Real gt = 0.0, gt_max = 0.0, e_plain = 0.0, e_global = 0.0, e_multi = 0.0;
  for (size_t i = 0; i + 1 < n; ++i) {
    const View &a = data.views[i], &b = data.views[i + 1];
    const Real g = warp_error(a.image, b.image, *a.depth, *b.depth, a.camera, b.camera, tau);
    gt += g;
    gt_max = std::max(gt_max, g);
    e_plain += warp_error(plain[i], plain[i + 1], depth[i], depth[i + 1], a.camera, b.camera, tau);
    e_global += warp_error(global[i], global[i + 1], depth[i], depth[i + 1], a.camera, b.camera, tau);
    e_multi += warp_error(multi[i], multi[i + 1], depth[i], depth[i + 1], a.camera, b.camera, tau);
  }
  const Real pairs = static_cast<Real>(n - 1);
  const Real r_global = e_global / e_plain, r_multi = e_multi / e_plain;
  return {r_global <= 1.25 && r_multi <= 1.25 && gt_max < 1e-3,
          fmt("stylized/unstylized: global %.3f, dictionary %.3f; ground truth mean %.3g, max %.3g", r_global,
              r_multi, gt / pairs, gt_max)};
}

// ---------------------------------------------------------------- 9

Outcome dictionary_speed() {
  const Tensor ref = procedural_image(5, 256, PatternKind::ValueNoise);
  const StyleDictionary d = build_dictionary({ref}, 10, DictionaryEncoders{}, 0);
  return {d.build_seconds < 1.0, fmt("256x256, M=10: %.3f s, T=%zu", d.build_seconds, d.size())};
}

// ---------------------------------------------------------------- 10

Outcome oracle_equivalences() {
  const Tensor guide = test::random_tensor({64, 64, 1}, 11, 0.0, 1.0);
  const Tensor input = test::random_tensor({64, 64, 1}, 12);
  const Real gf = test::max_abs_diff(guided_filter(guide, input, 4, 1e-3), test::naive_guided_filter(guide, input, 4, 1e-3));

  Tensor att = test::random_tensor({50, 7}, 13, 0.0, 1.0);
  for (size_t i = 0; i < 50; ++i) {
    Real s = 0.0;
    for (size_t t = 0; t < 7; ++t) s += att.at(i, t);
    for (size_t t = 0; t < 7; ++t) att.at(i, t) /= s;
  }
  const Tensor means = test::random_tensor({7, 9}, 14), stds = test::random_tensor({7, 9}, 15, 0.1, 2.0);
  const StyleCodes codes = weighted_style_codes(att, means, stds);
  Real wc = 0.0;
  for (size_t i = 0; i < 50; ++i)
    for (size_t c = 0; c < 9; ++c) {
      Real m = 0.0, s = 0.0;
      for (size_t t = 0; t < 7; ++t) {
        m += att.at(i, t) * means.at(t, c);
        s += att.at(i, t) * stds.at(t, c);
      }
      wc = std::max({wc, std::abs(codes.mean.at(i, c) - m), std::abs(codes.std.at(i, c) - s)});
    }

  const Tensor cloud = test::random_tensor({600, 8}, 16);
  const KMeansResult a = kmeans(cloud, 10, 3), b = kmeans(cloud, 10, 3);
  const bool same = a.centroids.vec() == b.centroids.vec() && a.assignments == b.assignments;
  bool monotone = true;
  for (size_t i = 1; i < a.inertia.size(); ++i) monotone = monotone && a.inertia[i] <= a.inertia[i - 1];
  return {gf <= 1e-6 && wc <= 1e-6 && same && monotone,
          fmt("guided filter %.3g, style codes %.3g, k-means deterministic %s, inertia non-increasing %s", gf, wc,
              same ? "yes" : "no", monotone ? "yes" : "no")};
}

// ---------------------------------------------------------------- 11

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

// Lines that report elapsed time are the only output allowed to differ.
std::string strip_timing(const std::string& text) {
  static const std::regex wall(R"("wall_time":[^,}]*)");
  std::istringstream in(text);
  std::string line, out;
  while (std::getline(in, line)) {
    if (line.find("build time") != std::string::npos) continue;
    out += std::regex_replace(line, wall, R"("wall_time":0)") + "\n";
  }
  return out;
}

// Runs every subcommand in dir with the given worker count; returns the
// commands that exited non-zero.
std::vector<std::string> run_pipeline(const fs::path& dir, int threads) {
  const std::string cli = cli_path + " --threads " + std::to_string(threads) + " ";
  const std::vector<std::string> steps = {
      "pretrain-decoder -o dec.fprf --seed 7 --steps 30 --set decoder.corpus_size=16 --set decoder.image_size=32",
      "synth-scene -o data --views 4 --seed 3 --set scene.width=24 --set scene.height=24",
      "validate-dataset data",
      "train --dataset data --decoder dec.fprf -o scene.fprf --steps 4 --seed 5 --set train.rays=64 "
      "--set train.samples=16 --set train.eval_every=2 --set train.grid_resolution=16 "
      "--set train.semantic_resolution=16",
      "build-dict data/images/0000.png data/images/0001.png -M 3 --seed 2 -o dict.fprf --json dict.json",
      "render --ckpt scene.fprf --dataset data --all --mode color -o color --samples 24",
      "render --ckpt scene.fprf --dataset data --views 0,2 --mode depth -o depth --samples 24",
      "render --ckpt scene.fprf --dataset data --views 1 --mode content_feature -o features --samples 24",
      "stylize --ckpt scene.fprf --dict dict.fprf --dataset data --views 0,1 -o styl_dict --set render.samples=24",
      "stylize --ckpt scene.fprf --style data/images/0002.png --dataset data --views 3 -o styl_global "
      "--set render.samples=24",
      "eval --metric psnr --a color --b data/images -o psnr.json",
      "eval --metric warp --a color --dataset data --ckpt scene.fprf -o warp.json --set render.samples=24"};
  std::vector<std::string> failed;
  for (size_t i = 0; i < steps.size(); ++i) {
    const std::string cmd = "cd '" + dir.string() + "' && " + cli + steps[i] + " > stdout_" + std::to_string(i) +
                            ".txt 2> stderr_" + std::to_string(i) + ".txt";
    if (std::system(cmd.c_str()) != 0) failed.push_back(steps[i].substr(0, steps[i].find(' ')));
  }
  return failed;
}

Outcome cli_determinism() {
  const fs::path a = test::scratch_dir("cli_threads_1"), b = test::scratch_dir("cli_threads_3");
  const std::vector<std::string> fa = run_pipeline(a, 1), fb = run_pipeline(b, 3);
  if (!fa.empty() || !fb.empty())
    return {false, fmt("command failed: %s", (fa.empty() ? fb : fa).front().c_str())};
  size_t files = 0;
  std::vector<std::string> differ;
  for (const auto& e : fs::recursive_directory_iterator(a)) {
    if (!e.is_regular_file()) continue;
    const fs::path rel = fs::relative(e.path(), a);
    if (rel.filename().string().rfind("stderr_", 0) == 0) continue;
    ++files;
    const fs::path other = b / rel;
    std::string x = read_file(e.path()), y = fs::exists(other) ? read_file(other) : std::string("\x01missing");
    if (rel.extension() == ".jsonl" || rel.filename().string().rfind("stdout_", 0) == 0) {
      x = strip_timing(x);
      y = strip_timing(y);
    }
    if (x != y) differ.push_back(rel.string());
  }
  return {differ.empty() && files > 0,
          differ.empty() ? fmt("%zu output files byte-identical at 1 and 3 threads", files)
                         : fmt("%zu of %zu files differ, first %s", differ.size(), files, differ.front().c_str())};
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::fprintf(stderr, "usage: %s <fprf executable> [criteria...]\n", argv[0]);
    return 2;
  }
  cli_path = fs::absolute(argv[1]).string();
  std::set<int> only;
  for (int i = 2; i < argc; ++i) only.insert(std::atoi(argv[i]));

  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"gradient suite", gradient_suite},
      {"AdaIN exactness", adain_exactness},
      {"volume rendering conservation", volume_conservation},
      {"single-entry dictionary reduction", reduction_property},
      {"view-independent semantics", view_independence},
      {"toy scene reconstruction", toy_reconstruction},
      {"semantic stylization", semantic_stylization},
      {"warp-error consistency", warp_consistency},
      {"dictionary build speed", dictionary_speed},
      {"oracle equivalences", oracle_equivalences},
      {"CLI determinism", cli_determinism}};

  int failures = 0;
  for (size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!only.empty() && !only.count(id)) continue;
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += !o.pass;
    std::printf("%s %2d %s: %s\n", o.pass ? "PASS" : "FAIL", id, criteria[i].first.c_str(), o.detail.c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
