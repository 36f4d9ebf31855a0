#pragma once

#include <cstdint>
#include <fstream>
#include <memory>
#include <string>
#include <unordered_map>

#include "vitcolor/adam.hpp"
#include "vitcolor/colorspace.hpp"
#include "vitcolor/config.hpp"
#include "vitcolor/dataset.hpp"
#include "vitcolor/discriminator.hpp"
#include "vitcolor/extractor.hpp"
#include "vitcolor/generator.hpp"
#include "vitcolor/losses.hpp"

namespace vitcolor {

GeneratorConfig make_generator_config(const TrainConfig& cfg);
VitConfig make_vit_config(const TrainConfig& cfg);

/// Builds the configured embedding backend: the seeded stub, or weights
/// loaded (and hash-checked) from disk.
std::unique_ptr<EmbeddingExtractor> make_extractor(const ExtractorSettings& settings);

/// Contents of a checkpoint directory's manifest.
struct CheckpointInfo {
  std::int64_t step = 0;
  std::int64_t epoch = 0;           // epoch the next step belongs to
  std::int64_t epoch_consumed = 0;  // batches already taken from that epoch
  std::string rng_state;
  std::string config_json;  // resolved echo of the writing run's config
};

void write_checkpoint_manifest(const std::string& dir, const CheckpointInfo& info);
CheckpointInfo read_checkpoint_manifest(const std::string& dir);

/// Alternating GAN optimization: one discriminator update on (real, detached
/// fake) then one generator update through a fresh discriminator forward,
/// per batch. Owns both networks, both optimizers, the dataset manifest, and
/// the metrics stream.
class Trainer {
 public:
  /// Builds models and optimizers from the config; if cfg.resume names a
  /// checkpoint directory, restores parameters, optimizer moments, RNG
  /// state, and the position in the epoch stream.
  explicit Trainer(const TrainConfig& cfg);

  /// One optimization step on one batch. Advances the global step counter.
  /// Throws on non-finite losses or gradients.
  LossBreakdown<float> train_step(const Batch& batch);

  /// The full training loop: epoch iteration, learning-rate schedule,
  /// metrics CSV, periodic checkpoints, and a final checkpoint. Writes the
  /// resolved config echo into the output directory first.
  void run();

  /// Saves parameters, optimizer state, RNG state, and the manifest into
  /// dir (created if needed).
  void save_checkpoint(const std::string& dir);

  std::int64_t global_step() const { return step_; }
  std::int64_t current_epoch() const { return epoch_; }
  const TrainConfig& config() const { return cfg_; }
  Generator<float>& generator() { return gen_; }
  VitDiscriminator<float>& discriminator() { return disc_; }
  ParamStore<float>& generator_params() { return gen_store_; }
  ParamStore<float>& discriminator_params() { return disc_store_; }
  EmbeddingExtractor* extractor() { return extractor_.get(); }
  DatasetManifest& manifest() { return manifest_; }
  Rng& rng() { return rng_; }

  /// Embeddings for a batch, cached per manifest id (the extractor is
  /// frozen, so an image's embedding never changes).
  Tensor<float> embeddings_for(const Batch& batch);

 private:
  void load_checkpoint(const std::string& dir);
  void append_metrics(std::ostream& out, const LossBreakdown<float>& losses, double lr_g,
                      double lr_d) const;

  TrainConfig cfg_;
  Rng rng_;
  Generator<float> gen_;
  VitDiscriminator<float> disc_;
  ParamStore<float> gen_store_;
  ParamStore<float> disc_store_;
  Adam<float> adam_g_;
  Adam<float> adam_d_;
  std::unique_ptr<EmbeddingExtractor> extractor_;
  DatasetManifest manifest_;
  std::unordered_map<std::int64_t, Tensor<float>> emb_cache_;
  std::int64_t step_ = 0;
  std::int64_t epoch_ = 0;
  std::int64_t epoch_consumed_ = 0;
};

/// Inference bundle reconstructed from a checkpoint directory.
struct LoadedGenerator {
  TrainConfig config;
  std::unique_ptr<Generator<float>> gen;
  std::unique_ptr<EmbeddingExtractor> extractor;  // null for the fusion-free variant
};

LoadedGenerator load_generator_for_inference(const std::string& checkpoint_dir);

/// Full colorization path for one image: resize to the model resolution,
/// keep only luminance, predict chroma in eval mode, reassemble to sRGB.
/// extractor may be null only for the fusion-free variant.
RgbImage colorize_image(Generator<float>& gen, EmbeddingExtractor* extractor,
                        const RgbImage& input, std::int64_t image_size);

}  // namespace vitcolor
