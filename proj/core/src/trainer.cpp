#include "vitcolor/trainer.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "vitcolor/container.hpp"
#include "vitcolor/resize.hpp"

namespace vitcolor {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const TrainConfig& validated(const TrainConfig& cfg) {
  cfg.validate();
  return cfg;
}

Adam<float>::Hyper to_hyper(const OptimizerSettings& o) {
  Adam<float>::Hyper h;
  h.lr = static_cast<float>(o.lr);
  h.beta1 = static_cast<float>(o.beta1);
  h.beta2 = static_cast<float>(o.beta2);
  h.eps = static_cast<float>(o.eps);
  return h;
}

std::string format_g(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

void require_same(const std::string& field, const std::string& a, const std::string& b) {
  if (a != b)
    throw std::runtime_error("checkpoint mismatch: " + field + " is " + b + " but the run wants " +
                             a);
}

void require_same(const std::string& field, std::int64_t a, std::int64_t b) {
  require_same(field, std::to_string(a), std::to_string(b));
}

}  // namespace

GeneratorConfig make_generator_config(const TrainConfig& cfg) {
  GeneratorConfig g;
  g.variant =
      cfg.variant == "vit-i-gan" ? GeneratorVariant::kVitIGan : GeneratorVariant::kVitGan;
  g.image_size = cfg.image_size;
  g.channel_div = cfg.model.channel_div;
  g.embedding_dim = kEmbeddingDim;
  return g;
}

VitConfig make_vit_config(const TrainConfig& cfg) {
  VitConfig v;
  v.image_size = cfg.image_size;
  v.patch_size = cfg.model.vit_patch_size;
  v.depth = cfg.model.vit_depth;
  v.heads = cfg.model.vit_heads;
  v.mlp_dim = cfg.model.vit_mlp_dim;
  v.token_dim = cfg.model.vit_token_dim;
  v.dropout = cfg.model.vit_dropout;
  v.emb_dropout = cfg.model.vit_dropout;
  v.in_channels = 3;
  return v;
}

std::unique_ptr<EmbeddingExtractor> make_extractor(const ExtractorSettings& settings) {
  if (settings.backend == "stub") return std::make_unique<StubExtractor>();
  std::string manifest = settings.manifest;
  if (manifest.empty()) manifest = settings.weights + ".json";
  return load_pretrained_extractor(settings.weights, manifest);
}

void write_checkpoint_manifest(const std::string& dir, const CheckpointInfo& info) {
  json root;
  root["format"] = "checkpoint-v1";
  root["step"] = info.step;
  root["epoch"] = info.epoch;
  root["epoch_consumed"] = info.epoch_consumed;
  root["rng"] = info.rng_state;
  root["config"] = json::parse(info.config_json);
  std::ofstream out(fs::path(dir) / "manifest.json", std::ios::trunc);
  out << root.dump(2) << "\n";
  if (!out) throw std::runtime_error("checkpoint: cannot write manifest in " + dir);
}

CheckpointInfo read_checkpoint_manifest(const std::string& dir) {
  std::ifstream in(fs::path(dir) / "manifest.json");
  if (!in) throw std::runtime_error("checkpoint: no manifest in " + dir);
  json root;
  try {
    in >> root;
  } catch (const json::exception& e) {
    throw std::runtime_error("checkpoint: malformed manifest in " + dir + ": " + e.what());
  }
  if (root.value("format", "") != "checkpoint-v1")
    throw std::runtime_error("checkpoint: unsupported format in " + dir);
  CheckpointInfo info;
  info.step = root.at("step").get<std::int64_t>();
  info.epoch = root.at("epoch").get<std::int64_t>();
  info.epoch_consumed = root.at("epoch_consumed").get<std::int64_t>();
  info.rng_state = root.at("rng").get<std::string>();
  info.config_json = root.at("config").dump();
  return info;
}

Trainer::Trainer(const TrainConfig& cfg)
    : cfg_(validated(cfg)),
      rng_(cfg_.seed),
      gen_(make_generator_config(cfg_), rng_),
      disc_(make_vit_config(cfg_), rng_),
      adam_g_(to_hyper(cfg_.generator_opt)),
      adam_d_(to_hyper(cfg_.discriminator_opt)),
      manifest_(scan_dataset(cfg_.dataset, cfg_.image_size)) {
  gen_.collect(gen_store_);
  disc_.collect(disc_store_);
  // Built for both variants; the fusion-free one simply never calls it, which
  // its invocation counter makes checkable.
  extractor_ = make_extractor(cfg_.extractor);
  if (!cfg_.resume.empty()) load_checkpoint(cfg_.resume);
}

Tensor<float> Trainer::embeddings_for(const Batch& batch) {
  const std::int64_t b = batch.l.extent(0);
  const std::int64_t s = batch.l.extent(2);
  if (extractor_ == nullptr)
    throw std::logic_error("trainer: no extractor for this variant");
  const bool cacheable = static_cast<std::int64_t>(batch.ids.size()) == b;
  Tensor<float> out({b, kEmbeddingDim});
  Tensor<float> single({1, s, s});
  for (std::int64_t i = 0; i < b; ++i) {
    const Tensor<float>* cached = nullptr;
    if (cacheable) {
      auto it = emb_cache_.find(batch.ids[i]);
      if (it != emb_cache_.end()) cached = &it->second;
    }
    if (cached == nullptr) {
      std::copy_n(batch.l.data() + i * s * s, s * s, single.data());
      Tensor<float> prepared = prepare_extractor_input(single);
      Tensor<float> emb = extractor_->embed(
          prepared.reshaped({1, 3, kExtractorInputSize, kExtractorInputSize}));
      Tensor<float> flat = emb.reshaped({kEmbeddingDim});
      if (cacheable) cached = &emb_cache_.emplace(batch.ids[i], std::move(flat)).first->second;
      else {
        std::copy_n(flat.data(), kEmbeddingDim, out.data() + i * kEmbeddingDim);
        continue;
      }
    }
    std::copy_n(cached->data(), kEmbeddingDim, out.data() + i * kEmbeddingDim);
  }
  return out;
}

LossBreakdown<float> Trainer::train_step(const Batch& batch) {
  ++step_;
  auto l = make_var(Tensor<float>(batch.l));
  auto real_ab = make_var(Tensor<float>(batch.ab));

  // One generator forward feeds both halves of the step.
  Var<float> fake_ab = cfg_.variant == "vit-i-gan"
                           ? gen_.forward(l, embeddings_for(batch), /*training=*/true)
                           : gen_.forward(l, /*training=*/true);

  // Critic first, on real chroma and on fakes cut out of the generator graph.
  auto d_real = disc_.forward(concat1(l, real_ab), true, rng_);
  auto d_fake = disc_.forward(concat1(l, detach(fake_ab)), true, rng_);
  auto d_parts = discriminator_loss(d_real, d_fake);
  gen_store_.zero_grad();
  disc_store_.zero_grad();
  backward(d_parts.total);
  adam_d_.step(disc_store_);

  // Generator second, scored by the just-updated critic.
  auto g_logits = disc_.forward(concat1(l, fake_ab), true, rng_);
  auto g_parts = generator_loss(g_logits, fake_ab, real_ab, static_cast<float>(cfg_.lambda_l1));
  gen_store_.zero_grad();
  disc_store_.zero_grad();
  backward(g_parts.total);
  adam_g_.step(gen_store_);

  LossBreakdown<float> out;
  out.l1 = g_parts.l1->value.data()[0];
  out.adv_g = g_parts.adv->value.data()[0];
  out.adv_d_real = d_parts.real_term->value.data()[0];
  out.adv_d_fake = d_parts.fake_term->value.data()[0];
  out.total_g = g_parts.total->value.data()[0];
  out.total_d = d_parts.total->value.data()[0];
  for (float v : {out.l1, out.adv_g, out.adv_d_real, out.adv_d_fake, out.total_g, out.total_d})
    if (!std::isfinite(v))
      throw std::runtime_error("trainer: non-finite loss at step " + std::to_string(step_));
  return out;
}

void Trainer::append_metrics(std::ostream& out, const LossBreakdown<float>& l, double lr_g,
                             double lr_d) const {
  out << step_ << ',' << epoch_;
  const double vals[] = {l.l1, l.adv_g, l.adv_d_real, l.adv_d_fake, l.total_g, l.total_d,
                         lr_g, lr_d};
  for (double v : vals) out << ',' << format_g(v);
  out << '\n';
}

void Trainer::run() {
  fs::create_directories(cfg_.output_dir);
  {
    std::ofstream echo(fs::path(cfg_.output_dir) / "config.json", std::ios::trunc);
    echo << resolved_config_json(cfg_);
    if (!echo) throw std::runtime_error("trainer: cannot write config echo");
  }
  const fs::path metrics_path = fs::path(cfg_.output_dir) / "metrics.csv";
  const bool fresh = !fs::exists(metrics_path) || fs::file_size(metrics_path) == 0;
  std::ofstream metrics(metrics_path, std::ios::app);
  if (!metrics) throw std::runtime_error("trainer: cannot open metrics log");
  if (fresh) metrics << "step,epoch,l1,adv_g,adv_d_real,adv_d_fake,total_g,total_d,lr_g,lr_d\n";

  if (steps_per_epoch(manifest_, cfg_.batch_size) == 0)
    throw std::runtime_error("trainer: dataset has fewer images than one batch");

  auto checkpoint_dir = [&](const std::string& name) {
    return (fs::path(cfg_.output_dir) / "checkpoints" / name).string();
  };
  try {
    for (; epoch_ < cfg_.epochs; ++epoch_, epoch_consumed_ = 0) {
      BatchStream stream(manifest_, cfg_.batch_size, cfg_.seed, epoch_);
      // On resume, replay the consumed prefix so corrupt-file discoveries and
      // stream position match the interrupted run exactly.
      for (std::int64_t s = 0; s < epoch_consumed_; ++s) stream.next();
      while (auto batch = stream.next()) {
        adam_g_.set_lr(static_cast<float>(
            schedule_lr(cfg_.schedule, step_ + 1, cfg_.generator_opt.lr)));
        adam_d_.set_lr(static_cast<float>(
            schedule_lr(cfg_.schedule, step_ + 1, cfg_.discriminator_opt.lr)));
        const LossBreakdown<float> losses = train_step(*batch);
        ++epoch_consumed_;
        append_metrics(metrics, losses, adam_g_.lr(), adam_d_.lr());
        metrics.flush();
        if (cfg_.checkpoint_interval > 0 && step_ % cfg_.checkpoint_interval == 0) {
          char name[32];
          std::snprintf(name, sizeof name, "step_%08lld", static_cast<long long>(step_));
          save_checkpoint(checkpoint_dir(name));
        }
        if (cfg_.max_steps > 0 && step_ >= cfg_.max_steps) {
          save_checkpoint(checkpoint_dir("final"));
          return;
        }
      }
    }
    save_checkpoint(checkpoint_dir("final"));
  } catch (...) {
    metrics.flush();
    throw;
  }
}

void Trainer::save_checkpoint(const std::string& dir) {
  fs::create_directories(dir);
  save_params((fs::path(dir) / "gen.vcp").string(), gen_store_);
  save_params((fs::path(dir) / "disc.vcp").string(), disc_store_);
  write_entries((fs::path(dir) / "adam_g.vcp").string(), adam_g_.serialize());
  write_entries((fs::path(dir) / "adam_d.vcp").string(), adam_d_.serialize());
  CheckpointInfo info;
  info.step = step_;
  info.epoch = epoch_;
  info.epoch_consumed = epoch_consumed_;
  info.rng_state = rng_.save_state();
  info.config_json = resolved_config_json(cfg_);
  write_checkpoint_manifest(dir, info);
}

void Trainer::load_checkpoint(const std::string& dir) {
  const CheckpointInfo info = read_checkpoint_manifest(dir);
  const TrainConfig saved = parse_train_config(info.config_json);
  require_same("variant", cfg_.variant, saved.variant);
  require_same("image_size", cfg_.image_size, saved.image_size);
  require_same("batch_size", cfg_.batch_size, saved.batch_size);
  require_same("model.channel_div", cfg_.model.channel_div, saved.model.channel_div);
  require_same("model.vit_patch_size", cfg_.model.vit_patch_size, saved.model.vit_patch_size);
  require_same("model.vit_depth", cfg_.model.vit_depth, saved.model.vit_depth);
  require_same("model.vit_heads", cfg_.model.vit_heads, saved.model.vit_heads);
  require_same("model.vit_mlp_dim", cfg_.model.vit_mlp_dim, saved.model.vit_mlp_dim);
  require_same("model.vit_token_dim", cfg_.model.vit_token_dim, saved.model.vit_token_dim);
  require_same("extractor.backend", cfg_.extractor.backend, saved.extractor.backend);
  load_params((fs::path(dir) / "gen.vcp").string(), gen_store_);
  load_params((fs::path(dir) / "disc.vcp").string(), disc_store_);
  adam_g_.deserialize(read_entries((fs::path(dir) / "adam_g.vcp").string()));
  adam_d_.deserialize(read_entries((fs::path(dir) / "adam_d.vcp").string()));
  rng_.load_state(info.rng_state);
  step_ = info.step;
  epoch_ = info.epoch;
  epoch_consumed_ = info.epoch_consumed;
}

LoadedGenerator load_generator_for_inference(const std::string& checkpoint_dir) {
  const CheckpointInfo info = read_checkpoint_manifest(checkpoint_dir);
  LoadedGenerator out;
  out.config = parse_train_config(info.config_json);
  Rng init_rng(out.config.seed);  // placeholder weights, overwritten below
  out.gen = std::make_unique<Generator<float>>(make_generator_config(out.config), init_rng);
  ParamStore<float> store;
  out.gen->collect(store);
  load_params((fs::path(checkpoint_dir) / "gen.vcp").string(), store);
  if (out.config.variant == "vit-i-gan") out.extractor = make_extractor(out.config.extractor);
  return out;
}

RgbImage colorize_image(Generator<float>& gen, EmbeddingExtractor* extractor,
                        const RgbImage& input, std::int64_t image_size) {
  const RgbImage resized = resize_bilinear(input, image_size, image_size);
  const LabImage lab = srgb_to_lab(resized);
  NormalizedImage norm = normalize_for_generator(lab);
  NoGradGuard ng;
  auto l = make_var(norm.L.reshaped({1, 1, image_size, image_size}));
  Var<float> ab;
  if (gen.config().variant == GeneratorVariant::kVitIGan) {
    if (extractor == nullptr)
      throw std::invalid_argument("colorize_image: this variant needs an embedding extractor");
    Tensor<float> prepared = prepare_extractor_input(norm.L);
    Tensor<float> emb = extractor->embed(
        prepared.reshaped({1, 3, kExtractorInputSize, kExtractorInputSize}));
    ab = gen.forward(l, emb, /*training=*/false);
  } else {
    ab = gen.forward(l, /*training=*/false);
  }
  LabImage out_lab;
  out_lab.height = image_size;
  out_lab.width = image_size;
  const auto hw = static_cast<std::size_t>(image_size * image_size);
  out_lab.L.assign(hw, 0.f);
  out_lab.a.assign(hw, 0.f);
  out_lab.b.assign(hw, 0.f);
  denormalize_l(norm.L, out_lab);
  denormalize_ab(ab->value.reshaped({2, image_size, image_size}), out_lab);
  return lab_to_srgb(out_lab);
}

}  // namespace vitcolor
