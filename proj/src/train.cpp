#include "fprf/train.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <sstream>

#include "fprf/checkpoint.hpp"
#include "fprf/error.hpp"
#include "fprf/metrics.hpp"
#include "fprf/parallel.hpp"
#include "fprf/rng.hpp"
#include "json.hpp"

namespace fprf {

namespace {

// Fixed so gradient sums do not depend on the thread count.
constexpr size_t kGradChunks = 8;

Tensor flatten_rows(Tensor t) {
  const size_t c = t.dim(2);
  t.reshape({t.dim(0) * t.dim(1), c});
  return t;
}

std::vector<Real> constant_feature(const FeatureImage& f) {
  const size_t c = f.channels();
  return std::vector<Real>(f.data.data(), f.data.data() + c);
}

bool all_finite(const std::vector<Tensor*>& ts) {
  for (const Tensor* t : ts)
    if (!t->all_finite()) return false;
  return true;
}

void add_into(std::vector<Tensor*> dst, std::vector<Tensor*> src) {
  for (size_t i = 0; i < dst.size(); ++i) {
    Real* d = dst[i]->data();
    const Real* s = src[i]->data();
    for (size_t k = 0; k < dst[i]->size(); ++k) d[k] += s[k];
  }
}

std::string spec_key(const EncoderSpec& s) {
  std::ostringstream os;
  os << to_string(s.kind) << '_' << s.seed << '_' << s.channels << '_' << s.radius << '_' << s.stride;
  return os.str();
}

}  // namespace

void TrainConfig::validate() const {
  require(steps >= 1, ErrorKind::Config, "train.steps must be >= 1");
  require(rays_per_batch >= 1, ErrorKind::Config, "train.rays must be >= 1");
  require(samples >= 1, ErrorKind::Config, "train.samples must be >= 1");
  require(lr_grid > 0.0 && lr_mlp > 0.0, ErrorKind::Config, "learning rates must be positive");
  require(beta1 >= 0.0 && beta1 < 1.0 && beta2 >= 0.0 && beta2 < 1.0 && adam_eps > 0.0, ErrorKind::Config,
          "Adam betas must be in [0, 1) and eps > 0");
  require(lambda_rgb >= 0.0 && lambda_reg >= 0.0 && lambda_semantic >= 0.0, ErrorKind::Config,
          "loss weights must be >= 0");
  require(ema_decay >= 0.0 && ema_decay < 1.0, ErrorKind::Config, "EMA decay must be in [0, 1)");
  require(early_stop >= 0.0 && early_stop < 1.0, ErrorKind::Config, "early_stop must be in [0, 1)");
  require(content.feature_dim == style_encoder.channels, ErrorKind::Config,
          "content feature width must equal the style encoder channels");
  require(semantic.feature_dim == semantic_encoder.channels, ErrorKind::Config,
          "semantic feature width must equal the semantic encoder channels");
  for (int b : blocks) require(b >= 1, ErrorKind::Config, "block counts must be >= 1");
  require(overlap >= 0.0 && overlap < 0.5, ErrorKind::Config, "overlap must be in [0, 0.5)");
}

std::vector<size_t> training_views(const SceneDataset& dataset) {
  std::vector<size_t> v;
  for (size_t i = 0; i < dataset.views.size(); ++i)
    if (!is_holdout_view(i)) v.push_back(i);
  return v;
}

std::vector<size_t> holdout_views(const SceneDataset& dataset) {
  std::vector<size_t> v;
  for (size_t i = 0; i < dataset.views.size(); ++i)
    if (is_holdout_view(i)) v.push_back(i);
  return v;
}

SceneTargets compute_targets(const SceneDataset& dataset, const TrainConfig& config) {
  dataset.validate();
  const bool sem = config.train_semantic;
  if (sem && config.semantic_encoder.kind == EncoderKind::OracleSemantic)
    require(dataset.has_labels(), ErrorKind::Data, "oracle semantic targets need label maps for every view");
  namespace fs = std::filesystem;
  const bool cache = !config.cache_dir.empty();
  if (cache) fs::create_directories(config.cache_dir);

  SceneTargets t;
  t.views.resize(dataset.views.size());
  parallel_for(dataset.views.size(), [&](size_t i) {
    const View& v = dataset.views[i];
    ViewTargets& vt = t.views[i];
    vt.color = flatten_rows(v.image);
    const std::string stem = config.cache_dir + "/" + view_name(i) + "_" +
                             std::to_string(fnv1a64(std::string(reinterpret_cast<const char*>(v.image.data()),
                                                                v.image.size() * sizeof(Real))));
    const std::string content_path = stem + "_c_" + spec_key(config.style_encoder) + ".fpt";
    const std::string semantic_path = stem + "_s_" + spec_key(config.semantic_encoder) + ".fpt";
    if (cache && fs::exists(content_path)) {
      vt.content = load_fpt(content_path);
    } else {
      vt.content = flatten_rows(upsample_to_pixels(encode_style(config.style_encoder, v.image), v.image,
                                                   config.upsample)
                                    .data);
      round_to_storage(vt.content);
      if (cache) save_fpt(content_path, vt.content);
    }
    if (!sem) return;
    if (cache && fs::exists(semantic_path)) {
      vt.semantic = load_fpt(semantic_path);
    } else {
      const LabelMap* labels = v.labels ? &*v.labels : nullptr;
      vt.semantic = flatten_rows(
          upsample_to_pixels(encode_semantic(config.semantic_encoder, v.image, labels), v.image, config.upsample)
              .data);
      round_to_storage(vt.semantic);
      if (cache) save_fpt(semantic_path, vt.semantic);
    }
  });

  const size_t probe = 16;
  const Tensor black({probe, probe, 3});
  const FeatureImage bg = encode_style(config.style_encoder, black);
  t.background_content = constant_feature(bg);
  if (sem) {
    const LabelMap empty{probe, probe, std::vector<uint8_t>(probe * probe, 0)};
    t.background_semantic = constant_feature(encode_semantic(config.semantic_encoder, black, &empty));
  }
  for (Real& x : t.background_content) x = static_cast<Real>(static_cast<float>(x));
  for (Real& x : t.background_semantic) x = static_cast<Real>(static_cast<float>(x));
  return t;
}

RayBatch sample_batch(const SceneDataset& dataset, const SceneTargets& targets, const std::vector<size_t>& views,
                      size_t rays, uint64_t seed) {
  require(!views.empty(), ErrorKind::Data, "no training views");
  Rng rng(seed);
  const size_t h = dataset.height(), w = dataset.width();
  const size_t cv = targets.views.front().content.cols();
  const bool sem = !targets.views.front().semantic.empty();
  const size_t cd = sem ? targets.views.front().semantic.cols() : 0;
  RayBatch b;
  b.rays.reserve(rays);
  b.color = Tensor({rays, 3});
  b.content = Tensor({rays, cv});
  if (sem) b.semantic = Tensor({rays, cd});
  for (size_t r = 0; r < rays; ++r) {
    const size_t vi = views[rng.below(views.size())];
    const size_t p = rng.below(h * w);
    b.rays.push_back(generate_ray(dataset.views[vi].camera, p % w, p / w));
    const ViewTargets& vt = targets.views[vi];
    std::copy_n(vt.color.data() + p * 3, 3, b.color.data() + r * 3);
    std::copy_n(vt.content.data() + p * cv, cv, b.content.data() + r * cv);
    if (sem) std::copy_n(vt.semantic.data() + p * cd, cd, b.semantic.data() + r * cd);
  }
  b.background_content = targets.background_content;
  b.background_semantic = targets.background_semantic;
  b.seed = mix_seed(seed, 0x5eed);
  return b;
}

Real tv_regularizer(const std::vector<TriPlaneGrid>& grids, std::vector<TriPlaneGrid>* grad) {
  size_t planes = 0;
  for (const TriPlaneGrid& g : grids) planes += g.tensors().size();
  if (planes == 0) return 0.0;
  const Real plane_weight = 1.0 / static_cast<Real>(planes);
  Real total = 0.0;
  for (size_t gi = 0; gi < grids.size(); ++gi) {
    const auto ps = grids[gi].tensors();
    for (size_t pi = 0; pi < ps.size(); ++pi) {
      const Tensor& p = *ps[pi];
      const size_t a = p.dim(0), b = p.dim(1), c = p.dim(2);
      const size_t pairs = (a - 1) * b * c + a * (b - 1) * c;
      if (pairs == 0) continue;
      const Real scale = plane_weight / static_cast<Real>(pairs);
      Real* g = grad ? (*grad)[gi].tensors()[pi]->data() : nullptr;
      Real sum = 0.0;
      for (size_t i = 0; i < a; ++i)
        for (size_t j = 0; j < b; ++j)
          for (size_t k = 0; k < c; ++k) {
            const size_t idx = (i * b + j) * c + k;
            if (i + 1 < a) {
              const size_t nb = idx + b * c;
              const Real d = p[nb] - p[idx];
              sum += d * d;
              if (g) {
                g[nb] += 2.0 * d * scale;
                g[idx] -= 2.0 * d * scale;
              }
            }
            if (j + 1 < b) {
              const size_t nb = idx + c;
              const Real d = p[nb] - p[idx];
              sum += d * d;
              if (g) {
                g[nb] += 2.0 * d * scale;
                g[idx] -= 2.0 * d * scale;
              }
            }
          }
      total += sum * scale;
    }
  }
  return total;
}

namespace {

struct ChunkResult {
  Real feature = 0.0, color = 0.0, semantic = 0.0;
  std::optional<ContentField> content_grad;
  std::optional<SemanticField> semantic_grad;
  std::optional<MlpParams> decoder_grad;
};

// decoder == nullptr skips the content terms, semantic == nullptr the semantic term.
LossBreakdown losses_impl(const RayBatch& batch, const ContentField& content, const SemanticField* semantic,
                          const ColorDecoder* decoder, const TrainConfig& config, ContentField* content_grad,
                          SemanticField* semantic_grad, MlpParams* decoder_grad) {
  const size_t nrays = batch.rays.size();
  require(nrays > 0, ErrorKind::Data, "empty ray batch");
  const size_t cv = content.feature_dim();
  const bool do_content = decoder != nullptr;
  const bool do_sem = semantic != nullptr;
  if (do_content) {
    require(batch.content.rows() == nrays && batch.content.cols() == cv && batch.color.rows() == nrays,
            ErrorKind::Data, "content targets missing or mismatched");
    require(batch.background_content.size() == cv, ErrorKind::Data, "background content feature missing");
  }
  size_t cd = 0;
  if (do_sem) {
    cd = semantic->feature_dim();
    require(batch.semantic.rows() == nrays && batch.semantic.cols() == cd, ErrorKind::Data,
            "semantic targets missing or mismatched");
    require(batch.background_semantic.size() == cd, ErrorKind::Data, "background semantic feature missing");
  }
  const Real inv_b = 1.0 / static_cast<Real>(nrays);

  LossBreakdown out;
  if (do_content) {
    out.rendered_content = Tensor({nrays, cv});
    out.rendered_color = Tensor({nrays, 3});
  }
  if (do_sem) out.rendered_semantic = Tensor({nrays, cd});

  const size_t chunks = std::min(kGradChunks, nrays);
  std::vector<ChunkResult> results(chunks);
  parallel_for(chunks, [&](size_t ci) {
    ChunkResult& res = results[ci];
    if (content_grad && do_content) res.content_grad = content.zeros_like();
    if (semantic_grad && do_sem) res.semantic_grad = semantic->zeros_like();
    if (decoder_grad && do_content) res.decoder_grad = decoder->mlp.zeros_like();
    const size_t begin = ci * nrays / chunks, end = (ci + 1) * nrays / chunks;
    RayTrace trace;
    SemanticSamples sem;
    MlpCache dec_cache;
    for (size_t r = begin; r < end; ++r) {
      RenderOptions opt{config.samples, config.early_stop, config.stratified, mix_seed(batch.seed, r)};
      const bool hit = trace_density(content, batch.rays[r], opt, trace);
      const size_t n = hit ? trace.active : 0;
      const Real t_end = hit ? trace.weights.transmittance[n] : 1.0;
      const std::span<const Vec3> pts = hit ? std::span<const Vec3>(trace.samples.points).first(n)
                                            : std::span<const Vec3>();
      std::vector<Real> grad_sigma(n, 0.0);

      if (do_content) {
        std::vector<Real> f_hat(cv), c_hat(3, 0.0);
        for (size_t a = 0; a < cv; ++a) f_hat[a] = t_end * batch.background_content[a];
        Tensor rgb;
        if (n > 0) {
          eval_content_features(content, batch.rays[r].dir, n, trace.content);
          rgb = mlp_forward(decoder->mlp, trace.content.features, &dec_cache);
          const std::vector<Real> acc = accumulate(trace.content.features, trace.weights);
          for (size_t a = 0; a < cv; ++a) f_hat[a] += acc[a];
          c_hat = accumulate(rgb, trace.weights);
        }
        std::vector<Real> g_f(cv), g_c(3);
        for (size_t a = 0; a < cv; ++a) {
          const Real d = f_hat[a] - batch.content.at(r, a);
          res.feature += d * d;
          g_f[a] = 2.0 * d * inv_b;
          out.rendered_content.at(r, a) = f_hat[a];
        }
        for (size_t a = 0; a < 3; ++a) {
          const Real d = c_hat[a] - batch.color.at(r, a);
          res.color += d * d;
          g_c[a] = 2.0 * config.lambda_rgb * d * inv_b;
          out.rendered_color.at(r, a) = c_hat[a];
        }
        if (n > 0 && (res.content_grad || res.decoder_grad)) {
          const auto& w = trace.weights.weights;
          Tensor grad_rgb({n, 3});
          for (size_t i = 0; i < n; ++i)
            for (size_t a = 0; a < 3; ++a) grad_rgb.at(i, a) = w[i] * g_c[a];
          Tensor grad_f;
          mlp_backward(decoder->mlp, dec_cache, grad_rgb, res.decoder_grad ? &*res.decoder_grad : nullptr,
                       res.content_grad ? &grad_f : nullptr);
          if (res.content_grad) {
            for (size_t i = 0; i < n; ++i)
              for (size_t a = 0; a < cv; ++a) grad_f.at(i, a) += w[i] * g_f[a];
            accumulate_sigma_grad(trace.content.features, trace.weights, trace.samples.delta, g_f, grad_sigma);
            accumulate_sigma_grad(rgb, trace.weights, trace.samples.delta, g_c, grad_sigma);
            Real bg_dot = 0.0;
            for (size_t a = 0; a < cv; ++a) bg_dot += batch.background_content[a] * g_f[a];
            for (size_t i = 0; i < n; ++i) grad_sigma[i] -= trace.samples.delta[i] * t_end * bg_dot;
            const Tensor gg = content_backward(content, trace.content, grad_sigma, grad_f, *res.content_grad);
            scatter_grid_gradient(content.layout, content.grids, pts, gg, res.content_grad->grids);
          }
        }
      }

      if (do_sem) {
        std::vector<Real> s_hat(cd);
        for (size_t a = 0; a < cd; ++a) s_hat[a] = t_end * batch.background_semantic[a];
        if (n > 0) {
          eval_semantic(*semantic, pts, sem);
          const std::vector<Real> acc = accumulate(sem.features, trace.weights);
          for (size_t a = 0; a < cd; ++a) s_hat[a] += acc[a];
        }
        std::vector<Real> g_s(cd);
        for (size_t a = 0; a < cd; ++a) {
          const Real d = s_hat[a] - batch.semantic.at(r, a);
          res.semantic += std::abs(d);
          out.rendered_semantic.at(r, a) = s_hat[a];
          g_s[a] = config.lambda_semantic * (d > 0.0 ? 1.0 : (d < 0.0 ? -1.0 : 0.0)) * inv_b;
        }
        if (n > 0 && res.semantic_grad) {
          Tensor grad_s({n, cd});
          for (size_t i = 0; i < n; ++i)
            for (size_t a = 0; a < cd; ++a) grad_s.at(i, a) = trace.weights.weights[i] * g_s[a];
          const Tensor gg = semantic_backward(*semantic, sem, grad_s, *res.semantic_grad);
          scatter_grid_gradient(semantic->layout, semantic->grids, pts, gg, res.semantic_grad->grids);
        }
      }
    }
  });

  for (const ChunkResult& res : results) {
    out.feature += res.feature;
    out.color += res.color;
    out.semantic += res.semantic;
  }
  out.feature *= inv_b;
  out.color *= inv_b;
  out.semantic *= inv_b;
  for (ChunkResult& res : results) {
    if (res.content_grad) add_into(content_grad->tensors(), res.content_grad->tensors());
    if (res.semantic_grad) add_into(semantic_grad->tensors(), res.semantic_grad->tensors());
    if (res.decoder_grad) add_into(decoder_grad->tensors(), res.decoder_grad->tensors());
  }

  if (do_content) {
    std::vector<TriPlaneGrid>* g = content_grad ? &content_grad->grids : nullptr;
    std::vector<TriPlaneGrid> scaled;
    if (g) scaled = content.zeros_like().grids;
    out.tv_content = tv_regularizer(content.grids, g ? &scaled : nullptr);
    if (g)
      for (size_t b = 0; b < scaled.size(); ++b) {
        auto dst = (*g)[b].tensors();
        auto src = scaled[b].tensors();
        for (size_t p = 0; p < dst.size(); ++p)
          for (size_t k = 0; k < dst[p]->size(); ++k) (*dst[p])[k] += config.lambda_reg * (*src[p])[k];
      }
    out.content_total = out.feature + config.lambda_rgb * out.color + config.lambda_reg * out.tv_content;
  }
  if (do_sem) {
    std::vector<TriPlaneGrid>* g = semantic_grad ? &semantic_grad->grids : nullptr;
    std::vector<TriPlaneGrid> scaled;
    if (g) scaled = semantic->zeros_like().grids;
    out.tv_semantic = tv_regularizer(semantic->grids, g ? &scaled : nullptr);
    if (g)
      for (size_t b = 0; b < scaled.size(); ++b) {
        auto dst = (*g)[b].tensors();
        auto src = scaled[b].tensors();
        for (size_t p = 0; p < dst.size(); ++p)
          for (size_t k = 0; k < dst[p]->size(); ++k) (*dst[p])[k] += config.lambda_reg * (*src[p])[k];
      }
    out.semantic_total = config.lambda_semantic * out.semantic + config.lambda_reg * out.tv_semantic;
  }
  return out;
}

}  // namespace

LossBreakdown scene_losses(const RayBatch& batch, const ContentField& content, const SemanticField* semantic,
                           const ColorDecoder& decoder, const TrainConfig& config, ContentField* content_grad,
                           SemanticField* semantic_grad, MlpParams* decoder_grad) {
  return losses_impl(batch, content, semantic, &decoder, config, content_grad, semantic_grad, decoder_grad);
}

Real content_loss(const RayBatch& batch, const ContentField& field, const ColorDecoder& decoder,
                  const TrainConfig& config, ContentField* grad, MlpParams* decoder_grad, LossBreakdown* breakdown) {
  LossBreakdown b = losses_impl(batch, field, nullptr, &decoder, config, grad, nullptr, decoder_grad);
  const Real total = b.content_total;
  if (breakdown) *breakdown = std::move(b);
  return total;
}

Real semantic_loss(const RayBatch& batch, const SemanticField& field, const ContentField& content,
                   const TrainConfig& config, SemanticField* grad, LossBreakdown* breakdown) {
  LossBreakdown b = losses_impl(batch, content, &field, nullptr, config, nullptr, grad, nullptr);
  const Real total = b.semantic_total;
  if (breakdown) *breakdown = std::move(b);
  return total;
}

TrainState init_train_state(const SceneDataset& dataset, const TrainConfig& config) {
  config.validate();
  BlockLayout layout;
  layout.scene = dataset.aabb;
  layout.blocks = config.blocks;
  layout.overlap_frac = config.blocks == std::array<int, 3>{1, 1, 1} ? 0.0 : config.overlap;
  layout.validate();
  TrainState s;
  s.content = make_content_field(layout, config.content, mix_seed(config.seed, 1));
  s.semantic = make_semantic_field(layout, config.semantic, mix_seed(config.seed, 2));
  round_to_storage(s.content);
  round_to_storage(s.semantic);
  s.stats.decay = config.ema_decay;
  s.adam.resize(3);
  return s;
}

std::string TrainRecord::to_json() const {
  nlohmann::json j = {{"step", step},
                      {"loss", loss},
                      {"content_loss", content_loss},
                      {"semantic_loss", semantic_loss},
                      {"wall_time", wall_time}};
  if (psnr) j["psnr"] = std::isinf(*psnr) ? 1e9 : *psnr;
  return j.dump();
}

Real evaluate_psnr(const SceneDataset& dataset, const std::vector<size_t>& views, const ContentField& content,
                   const ColorDecoder& decoder, size_t samples) {
  require(!views.empty(), ErrorKind::Data, "no views to evaluate");
  Real sum = 0.0;
  RenderOptions opt;
  opt.samples = samples;
  for (size_t v : views) {
    const Tensor img = render_image(content, nullptr, dataset.views[v].camera, RenderMode::Color, &decoder, opt);
    sum += psnr(img, dataset.views[v].image);
  }
  return sum / static_cast<Real>(views.size());
}

TrainResult train_scene(const SceneDataset& dataset, const ColorDecoder& decoder, const TrainConfig& config,
                        std::optional<TrainState> resume, const std::function<void(const TrainRecord&)>& on_record) {
  config.validate();
  dataset.validate();
  require(decoder.feature_dim() == config.content.feature_dim, ErrorKind::Config,
          "decoder input width does not match the content feature width");
  const auto start = std::chrono::steady_clock::now();
  TrainResult result;
  result.state = resume ? std::move(*resume) : init_train_state(dataset, config);
  TrainState& st = result.state;
  st.adam.resize(3);
  st.stats.decay = config.ema_decay;
  if (config.learn_decoder && !st.decoder) {
    st.decoder = decoder;
    st.decoder->frozen = false;
  }
  const ColorDecoder& active_decoder = st.decoder ? *st.decoder : decoder;

  const SceneTargets targets = compute_targets(dataset, config);
  const std::vector<size_t> train_views = training_views(dataset);
  std::vector<size_t> eval_views = holdout_views(dataset);
  if (eval_views.empty()) eval_views = train_views;

  const AdamConfig grid_cfg{config.lr_grid, config.beta1, config.beta2, config.adam_eps};
  const AdamConfig mlp_cfg{config.lr_mlp, config.beta1, config.beta2, config.adam_eps};

  for (size_t i = 0; i < config.steps; ++i) {
    const uint64_t step = st.step + 1;
    const RayBatch batch = sample_batch(dataset, targets, train_views, config.rays_per_batch,
                                        mix_seed(config.seed, 1000 + step));
    ContentField cg = st.content.zeros_like();
    SemanticField sg = st.semantic.zeros_like();
    std::optional<MlpParams> dg;
    if (st.decoder) dg = st.decoder->mlp.zeros_like();
    const LossBreakdown lb =
        losses_impl(batch, st.content, config.train_semantic ? &st.semantic : nullptr, &active_decoder, config, &cg,
                    config.train_semantic ? &sg : nullptr, dg ? &*dg : nullptr);
    const Real total = lb.content_total + lb.semantic_total;
    if (!std::isfinite(total) || !all_finite(cg.tensors()) || !all_finite(sg.tensors()) ||
        (dg && !all_finite(dg->tensors()))) {
      std::ostringstream os;
      os << "training diverged at step " << step << ": feature=" << lb.feature << " color=" << lb.color
         << " semantic=" << lb.semantic << " tv=" << lb.tv_content << "; gradients finite: content="
         << all_finite(cg.tensors()) << " semantic=" << all_finite(sg.tensors());
      fail(ErrorKind::Numeric, os.str());
    }

    std::vector<Tensor*> grid_p = st.content.grid_tensors(), mlp_p = st.content.mlp_tensors();
    std::vector<Tensor*> grid_g = cg.grid_tensors(), mlp_g = cg.mlp_tensors();
    if (config.train_semantic) {
      for (Tensor* t : st.semantic.grid_tensors()) grid_p.push_back(t);
      for (Tensor* t : st.semantic.mlp_tensors()) mlp_p.push_back(t);
      for (Tensor* t : sg.grid_tensors()) grid_g.push_back(t);
      for (Tensor* t : sg.mlp_tensors()) mlp_g.push_back(t);
    }
    adam_step(grid_p, {grid_g.begin(), grid_g.end()}, st.adam[0], grid_cfg);
    adam_step(mlp_p, {mlp_g.begin(), mlp_g.end()}, st.adam[1], mlp_cfg);
    if (st.decoder) {
      const auto g = dg->tensors();
      adam_step(st.decoder->mlp.tensors(), {g.begin(), g.end()}, st.adam[2], mlp_cfg);
    }
    st.stats = update_content_stats(st.stats, lb.rendered_content);
    st.step = step;

    TrainRecord rec;
    rec.step = step;
    rec.loss = total;
    rec.content_loss = lb.content_total;
    rec.semantic_loss = lb.semantic_total;
    if (config.eval_every > 0 && step % config.eval_every == 0)
      rec.psnr = evaluate_psnr(dataset, {eval_views.front()}, st.content, active_decoder, config.eval_samples);
    rec.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    result.records.push_back(rec);
    if (on_record) on_record(rec);
  }
  result.final_psnr = evaluate_psnr(dataset, eval_views, st.content, active_decoder, config.eval_samples);
  result.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

}  // namespace fprf
