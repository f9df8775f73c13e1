#include "support.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>

#include "fprf/checkpoint.hpp"
#include "fprf/corpus.hpp"
#include "fprf/encoder.hpp"
#include "fprf/error.hpp"
#include "fprf/imgproc.hpp"
#include "fprf/mlp.hpp"
#include "fprf/numeric.hpp"
#include "fprf/triplane.hpp"
#include "fprf/volume.hpp"
#include "json.hpp"

#ifndef FPRF_TEST_CACHE_DIR
#define FPRF_TEST_CACHE_DIR "test_cache"
#endif

namespace fs = std::filesystem;

namespace fprf::test {

Tensor random_tensor(std::vector<size_t> shape, uint64_t seed, Real lo, Real hi) {
  Tensor t(std::move(shape));
  Rng rng(seed);
  for (Real& v : t.vec()) v = rng.uniform(lo, hi);
  return t;
}

Real relative_error(Real a, Real b, Real floor) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
}

Real finite_difference_check(const std::vector<Tensor*>& params, const std::vector<const Tensor*>& analytic,
                             const std::function<Real()>& loss, Real h) {
  require(params.size() == analytic.size(), ErrorKind::Dimension, "parameter/gradient list mismatch");
  Real worst = 0.0;
  for (size_t p = 0; p < params.size(); ++p) {
    Tensor& t = *params[p];
    require(t.size() == analytic[p]->size(), ErrorKind::Dimension, "gradient shape mismatch");
    for (size_t i = 0; i < t.size(); ++i) {
      const Real x = t[i];
      const Real step = h * std::max<Real>(1.0, std::abs(x));
      t[i] = x + step;
      const Real up = loss();
      t[i] = x - step;
      const Real down = loss();
      t[i] = x;
      worst = std::max(worst, relative_error((*analytic[p])[i], (up - down) / (2.0 * step)));
    }
  }
  return worst;
}

namespace {

size_t count(const std::vector<Tensor*>& ts) {
  size_t n = 0;
  for (const Tensor* t : ts) n += t->size();
  return n;
}

std::vector<const Tensor*> const_view(const std::vector<Tensor*>& ts) { return {ts.begin(), ts.end()}; }

Real dot(const Tensor& a, const Tensor& b) {
  Real s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

GradientCheck check_mlp() {
  MlpParams net = make_mlp({2, 8, 8, 3}, OutputActivation::Sigmoid, 11);
  for (DenseLayer& l : net.layers) l.bias = random_tensor({l.out_dim()}, 12 + l.in_dim(), -0.2, 0.2);
  Tensor x = random_tensor({4, 2}, 13);
  const Tensor g = random_tensor({4, 3}, 14);
  MlpCache cache;
  mlp_forward(net, x, &cache);
  const MlpGrads grads = mlp_backward(net, cache, g);
  std::vector<Tensor*> params = net.tensors();
  MlpParams gp = grads.params;
  std::vector<const Tensor*> analytic = const_view(gp.tensors());
  params.push_back(&x);
  analytic.push_back(&grads.x);
  const Real err = finite_difference_check(params, analytic, [&] { return dot(mlp_forward(net, x), g); });
  return {"mlp", err, count(params)};
}

GradientCheck check_triplane() {
  TriPlaneGrid grid = make_triplane({4, 4, 4}, 2, 21, -1.0, 1.0);
  Rng rng(22);
  std::vector<Vec3> pts;
  for (int i = 0; i < 5; ++i) pts.emplace_back(rng.uniform(), rng.uniform(), rng.uniform());
  const Tensor g = random_tensor({5, 2}, 23);
  TriPlaneGrid grad = grid.zeros_like();
  for (size_t i = 0; i < pts.size(); ++i) triplane_sample_backward(grid, pts[i], g.row(i).data(), grad);
  auto loss = [&] {
    Real s = 0.0;
    for (size_t i = 0; i < pts.size(); ++i) {
      const std::vector<Real> v = triplane_sample(grid, pts[i]);
      for (size_t c = 0; c < v.size(); ++c) s += v[c] * g.at(i, c);
    }
    return s;
  };
  return {"triplane_sample", finite_difference_check(grid.tensors(), const_view(grad.tensors()), loss),
          count(grid.tensors())};
}

GradientCheck check_volume_render() {
  Tensor values = random_tensor({5, 3}, 31);
  Tensor sigmas = random_tensor({5}, 32, 0.1, 3.0);
  const Tensor deltas = random_tensor({5}, 33, 0.05, 0.5);
  const Tensor g = random_tensor({3}, 34);
  const VolumeRenderGrads grads = volume_render_backward(values, sigmas.span(), deltas.span(), g.span());
  const Tensor gs({5}, grads.sigmas);
  auto loss = [&] {
    const VolumeRenderResult r = volume_render(values, sigmas.span(), deltas.span());
    Real s = 0.0;
    for (size_t c = 0; c < 3; ++c) s += r.out[c] * g[c];
    return s;
  };
  const Real err = finite_difference_check({&values, &sigmas}, {&grads.values, &gs}, loss);
  return {"volume_render", err, values.size() + sigmas.size()};
}

GradientCheck check_tv() {
  std::vector<TriPlaneGrid> grids = {make_triplane({5, 4, 3}, 2, 41, -1.0, 1.0),
                                     make_triplane({3, 4, 5}, 2, 42, -1.0, 1.0)};
  std::vector<TriPlaneGrid> grad = {grids[0].zeros_like(), grids[1].zeros_like()};
  tv_regularizer(grids, &grad);
  std::vector<Tensor*> params;
  std::vector<const Tensor*> analytic;
  for (size_t b = 0; b < grids.size(); ++b) {
    for (Tensor* t : grids[b].tensors()) params.push_back(t);
    for (const Tensor* t : std::as_const(grad[b]).tensors()) analytic.push_back(t);
  }
  const Real err = finite_difference_check(params, analytic, [&] { return tv_regularizer(grids, nullptr); });
  return {"tv_regularizer", err, count(params)};
}

GradientCheck check_channel_stats() {
  Tensor f = random_tensor({12, 3}, 51);
  const Tensor gm = random_tensor({3}, 52), gs = random_tensor({3}, 53);
  const Tensor analytic = channel_stats_backward(f, channel_stats(f), gm, gs);
  auto loss = [&] {
    const ChannelStats s = channel_stats(f);
    return dot(s.mean, gm) + dot(s.std, gs);
  };
  return {"channel_stats", finite_difference_check({&f}, {&analytic}, loss), f.size()};
}

GradientCheck check_encoder() {
  EncoderSpec spec = EncoderSpec::style_default();
  spec.channels = 4;
  const ConvEncoder enc = ConvEncoder::style(spec);
  Tensor img = random_tensor({9, 9, 3}, 61, 0.0, 1.0);
  ConvEncoder::Cache cache;
  const Tensor out = enc.forward(img, &cache);
  const Tensor g = random_tensor(out.shape(), 62);
  const Tensor analytic = enc.backward_input(cache, g);
  const Real err = finite_difference_check({&img}, {&analytic}, [&] { return dot(enc.forward(img), g); });
  return {"encoder_input", err, img.size()};
}

GradientCheck check_guided_upsample() {
  const Tensor guide = random_tensor({10, 10, 3}, 71, 0.0, 1.0);
  Tensor fmap = random_tensor({5, 5, 2}, 72);
  const Tensor g = random_tensor({10, 10, 2}, 73);
  const int radius = 2;
  const Real eps = 0.01;
  const Tensor g_up = guided_filter_adjoint(guide, g, radius, eps);
  const Tensor analytic = upsample_bilinear_adjoint(g_up, 2, 5, 5);
  auto loss = [&] { return dot(guided_filter(guide, upsample_bilinear(fmap, 2, 10, 10), radius, eps), g); };
  return {"guided_upsample", finite_difference_check({&fmap}, {&analytic}, loss), fmap.size()};
}

GradientCheck check_semantic_query() {
  BlockLayout layout;
  layout.blocks = {2, 1, 1};
  layout.overlap_frac = 0.1;
  SemanticFieldShape shape;
  shape.grid_resolution = {6, 6, 6};
  shape.grid_channels = 3;
  shape.hidden = 6;
  shape.feature_dim = 2;
  SemanticField field = make_semantic_field(layout, shape, 81);
  Rng rng(82);
  std::vector<Vec3> pts;
  for (int i = 0; i < 6; ++i) pts.emplace_back(rng.uniform(-0.3, 0.3), rng.uniform(-1, 1), rng.uniform(-1, 1));
  const Tensor g = random_tensor({6, 2}, 83);
  SemanticSamples s;
  eval_semantic(field, pts, s);
  SemanticField grad = field.zeros_like();
  const Tensor gg = semantic_backward(field, s, g, grad);
  scatter_grid_gradient(field.layout, field.grids, pts, gg, grad.grids);
  auto loss = [&] {
    SemanticSamples q;
    eval_semantic(field, pts, q);
    return dot(q.features, g);
  };
  return {"semantic_query", finite_difference_check(field.tensors(), std::as_const(grad).tensors(), loss),
          count(field.tensors())};
}

GradientCheck check_content_loss(std::array<int, 3> blocks, const char* name) {
  MicroScene m = make_micro_scene(91, blocks);
  ContentField grad = m.content.zeros_like();
  content_loss(m.batch, m.content, m.decoder, m.config, &grad);
  auto loss = [&] { return content_loss(m.batch, m.content, m.decoder, m.config, nullptr); };
  return {name, finite_difference_check(m.content.tensors(), std::as_const(grad).tensors(), loss),
          count(m.content.tensors())};
}

GradientCheck check_decoder_in_loss() {
  MicroScene m = make_micro_scene(92);
  ContentField grad = m.content.zeros_like();
  MlpParams dgrad = m.decoder.mlp.zeros_like();
  content_loss(m.batch, m.content, m.decoder, m.config, &grad, &dgrad);
  auto loss = [&] { return content_loss(m.batch, m.content, m.decoder, m.config, nullptr); };
  return {"content_loss_decoder",
          finite_difference_check(m.decoder.mlp.tensors(), std::as_const(dgrad).tensors(), loss),
          count(m.decoder.mlp.tensors())};
}

GradientCheck check_semantic_loss() {
  MicroScene m = make_micro_scene(93, {2, 1, 1});
  SemanticField grad = m.semantic.zeros_like();
  semantic_loss(m.batch, m.semantic, m.content, m.config, &grad);
  auto loss = [&] { return semantic_loss(m.batch, m.semantic, m.content, m.config, nullptr); };
  return {"semantic_loss", finite_difference_check(m.semantic.tensors(), std::as_const(grad).tensors(), loss),
          count(m.semantic.tensors())};
}

}  // namespace

MicroScene make_micro_scene(uint64_t seed, std::array<int, 3> blocks) {
  MicroScene m;
  TrainConfig& c = m.config;
  c.samples = 4;
  c.early_stop = 0.0;  // the cut-off is a step function of the parameters
  c.stratified = true;
  c.lambda_reg = 0.1;
  c.blocks = blocks;
  c.content.grid_resolution = {8, 8, 8};
  c.content.grid_channels = 4;
  c.content.hidden = 8;
  c.content.trunk_width = 6;
  c.content.feature_dim = 5;
  c.content.n_freq = 2;
  c.content.density_bias = 0.0;
  c.semantic.grid_resolution = {8, 8, 8};
  c.semantic.grid_channels = 4;
  c.semantic.hidden = 8;
  c.semantic.feature_dim = 3;
  BlockLayout layout;
  layout.blocks = blocks;
  layout.overlap_frac = blocks == std::array<int, 3>{1, 1, 1} ? 0.0 : 0.1;
  m.content = make_content_field(layout, c.content, mix_seed(seed, 1));
  m.semantic = make_semantic_field(layout, c.semantic, mix_seed(seed, 2));
  m.decoder = make_color_decoder(c.content.feature_dim, mix_seed(seed, 3), 8);

  Rng rng(mix_seed(seed, 4));
  const size_t n = 4;
  for (size_t i = 0; i < n; ++i) {
    Ray r;
    const Vec3 target(rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5));
    const Vec3 from(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1));
    r.origin = target + 3.0 * from.normalized();
    r.dir = (target - r.origin).normalized();
    r.t_near = 0.0;
    r.t_far = 6.0;
    m.batch.rays.push_back(r);
  }
  m.batch.color = random_tensor({n, 3}, mix_seed(seed, 5), 0.0, 1.0);
  m.batch.content = random_tensor({n, c.content.feature_dim}, mix_seed(seed, 6));
  m.batch.semantic = random_tensor({n, c.semantic.feature_dim}, mix_seed(seed, 7));
  m.batch.background_content = random_tensor({c.content.feature_dim}, mix_seed(seed, 8)).vec();
  m.batch.background_semantic = random_tensor({c.semantic.feature_dim}, mix_seed(seed, 9)).vec();
  m.batch.seed = mix_seed(seed, 10);
  return m;
}

std::vector<GradientCheck> run_gradient_suite() {
  return {check_mlp(),
          check_triplane(),
          check_volume_render(),
          check_tv(),
          check_channel_stats(),
          check_encoder(),
          check_guided_upsample(),
          check_semantic_query(),
          check_content_loss({1, 1, 1}, "content_loss"),
          check_content_loss({2, 1, 1}, "content_loss_blocks"),
          check_decoder_in_loss(),
          check_semantic_loss()};
}

std::string scratch_dir(const std::string& name) {
  const fs::path p = fs::path(FPRF_TEST_CACHE_DIR) / "scratch" / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p.string();
}

const DecoderPretrainResult& shared_pretraining() {
  static const DecoderPretrainResult result = [] {
    const fs::path dir(FPRF_TEST_CACHE_DIR);
    const fs::path dec_path = dir / "decoder_default.fprf", curve_path = dir / "decoder_default.json";
    DecoderPretrainResult r;
    if (fs::exists(dec_path) && fs::exists(curve_path)) {
      try {
        r.decoder = load_decoder_file(dec_path.string());
        std::ifstream in(curve_path);
        const nlohmann::json j = nlohmann::json::parse(in);
        r.loss = j.at("loss").get<std::vector<Real>>();
        r.content_loss = j.at("content_loss").get<std::vector<Real>>();
        r.style_loss = j.at("style_loss").get<std::vector<Real>>();
        return r;
      } catch (const std::exception&) {
        // stale or partial cache: rebuild below
      }
    }
    const DecoderPretrainConfig cfg;
    const auto content = procedural_corpus(256, 64, mix_seed(cfg.seed, 101));
    const auto style = procedural_corpus(256, 64, mix_seed(cfg.seed, 202));
    r = pretrain_decoder(content, style, cfg);
    round_to_storage(r.decoder.mlp);
    fs::create_directories(dir);
    save_decoder_file(dec_path.string(), r.decoder, "{}");
    const nlohmann::json j = {{"loss", r.loss}, {"content_loss", r.content_loss}, {"style_loss", r.style_loss}};
    std::ofstream(curve_path) << j.dump();
    return r;
  }();
  return result;
}

const ColorDecoder& shared_decoder() { return shared_pretraining().decoder; }

const SceneDataset& toy_dataset() {
  static const SceneDataset d = generate_synthetic_scene(SyntheticSceneSpec::toy(), 32, 64, 64);
  return d;
}

const SceneDataset& two_region_dataset() {
  static const SceneDataset d = generate_synthetic_scene(SyntheticSceneSpec::two_region(), 32, 64, 64);
  return d;
}

TrainConfig two_region_config() {
  TrainConfig c;
  c.steps = 300;
  c.semantic_encoder = EncoderSpec::oracle_semantic();
  return c;
}

TrainedScene trained_scene(const std::string& name, const SceneDataset& dataset, const TrainConfig& config,
                           bool retrain) {
  const fs::path path = fs::path(FPRF_TEST_CACHE_DIR) / (name + ".fprf");
  TrainedScene out;
  if (!retrain && fs::exists(path)) {
    try {
      out.checkpoint = load_scene_checkpoint(path.string());
      const nlohmann::json meta = nlohmann::json::parse(out.checkpoint.meta_json);
      out.final_psnr = meta.at("final_psnr").get<Real>();
      out.seconds = meta.at("seconds").get<double>();
      out.loss = meta.at("loss").get<std::vector<Real>>();
      return out;
    } catch (const std::exception&) {
      // stale or partial cache: retrain below
    }
  }
  const ColorDecoder& decoder = shared_decoder();
  TrainResult r = train_scene(dataset, decoder, config);
  SceneCheckpoint ck;
  ck.content = std::move(r.state.content);
  ck.semantic = std::move(r.state.semantic);
  ck.stats = r.state.stats;
  ck.decoder = r.state.decoder ? *r.state.decoder : decoder;
  ck.step = r.state.step;
  for (const TrainRecord& rec : r.records) out.loss.push_back(rec.loss);
  ck.meta_json = nlohmann::json{{"final_psnr", r.final_psnr}, {"seconds", r.seconds}, {"loss", out.loss}}.dump();
  fs::create_directories(path.parent_path());
  save_scene_checkpoint(path.string(), ck);
  out.checkpoint = load_scene_checkpoint(path.string());
  out.final_psnr = r.final_psnr;
  out.seconds = r.seconds;
  return out;
}

namespace {

// Box mean over the clipped window, evaluated pixel by pixel.
Real window_mean(const Tensor& img, size_t y, size_t x, size_t c, int r) {
  const long h = static_cast<long>(img.dim(0)), w = static_cast<long>(img.dim(1));
  Real s = 0.0;
  int n = 0;
  for (long yy = static_cast<long>(y) - r; yy <= static_cast<long>(y) + r; ++yy)
    for (long xx = static_cast<long>(x) - r; xx <= static_cast<long>(x) + r; ++xx)
      if (yy >= 0 && yy < h && xx >= 0 && xx < w) {
        s += img.at(yy, xx, c);
        ++n;
      }
  return s / n;
}

}  // namespace

Tensor naive_guided_filter(const Tensor& guide, const Tensor& p, int r, Real eps) {
  const size_t h = guide.dim(0), w = guide.dim(1);
  Tensor a({h, w, 1}), b({h, w, 1}), q({h, w, 1});
  for (size_t y = 0; y < h; ++y)
    for (size_t x = 0; x < w; ++x) {
      Real si = 0, sp = 0, sii = 0, sip = 0;
      int n = 0;
      for (long yy = static_cast<long>(y) - r; yy <= static_cast<long>(y) + r; ++yy)
        for (long xx = static_cast<long>(x) - r; xx <= static_cast<long>(x) + r; ++xx) {
          if (yy < 0 || xx < 0 || yy >= static_cast<long>(h) || xx >= static_cast<long>(w)) continue;
          const Real I = guide.at(yy, xx, 0), P = p.at(yy, xx, 0);
          si += I;
          sp += P;
          sii += I * I;
          sip += I * P;
          ++n;
        }
      const Real mi = si / n, mp = sp / n;
      const Real var = sii / n - mi * mi, cov = sip / n - mi * mp;
      a.at(y, x, 0) = cov / (var + eps);
      b.at(y, x, 0) = mp - a.at(y, x, 0) * mi;
    }
  for (size_t y = 0; y < h; ++y)
    for (size_t x = 0; x < w; ++x) q.at(y, x, 0) = window_mean(a, y, x, 0, r) * guide.at(y, x, 0) + window_mean(b, y, x, 0, r);
  return q;
}

Real max_abs_diff(const Tensor& a, const Tensor& b) {
  require(a.size() == b.size(), ErrorKind::Dimension, "max_abs_diff: size mismatch");
  Real m = 0.0;
  for (size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

std::optional<ErrorKind> thrown_kind(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  return std::nullopt;
}

CameraModel pinhole(size_t w, size_t h, const Mat4& pose) {
  CameraModel c;
  c.width = w;
  c.height = h;
  c.fx = c.fy = static_cast<double>(w);
  c.cx = static_cast<double>(w) / 2.0;
  c.cy = static_cast<double>(h) / 2.0;
  c.camera_to_world = pose;
  c.near = 0.1;
  c.far = 10.0;
  return c;
}

}  // namespace fprf::test
