#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace vitcolor {

/// Adam constants for one network.
struct OptimizerSettings {
  double lr = 2e-4;
  double beta1 = 0.5;
  double beta2 = 0.9;
  double eps = 1e-8;

  void validate(const std::string& who) const;
};

/// One phase of the learning-rate schedule: `steps` global steps at `lr`.
struct SchedulePhase {
  std::int64_t steps = 0;
  double lr = 0.0;
};

/// Reduced-model knobs. Defaults are the full-size networks; tests and smoke
/// runs shrink them.
struct ModelSettings {
  std::int64_t channel_div = 1;     // divides every internal generator width
  std::int64_t vit_patch_size = 32;
  std::int64_t vit_depth = 6;
  std::int64_t vit_heads = 16;
  std::int64_t vit_mlp_dim = 2048;
  std::int64_t vit_token_dim = 1024;
  double vit_dropout = 0.1;  // applied as both block and embedding dropout
};

/// Embedding backend selection: the seeded stub, or weights loaded from disk.
struct ExtractorSettings {
  std::string backend = "stub";  // "stub" | "pretrained"
  std::string weights;           // container path, pretrained only
  std::string manifest;          // manifest path, pretrained only
};

/// Full description of one training run. Everything an invocation needs is
/// here, so echoing this struct back out reproduces the run.
struct TrainConfig {
  std::string dataset;
  std::string output_dir;
  std::int64_t image_size = 256;
  std::int64_t batch_size = 16;
  std::int64_t epochs = 50;
  double lambda_l1 = 100.0;
  std::string variant = "vit-i-gan";  // "vit-i-gan" | "vit-gan"
  std::uint64_t seed = 1;
  std::int64_t checkpoint_interval = 1000;  // steps; 0 disables periodic saves
  std::int64_t max_steps = 0;               // 0 = run all epochs; else hard stop
  std::string resume;                       // checkpoint directory, optional
  OptimizerSettings generator_opt;
  OptimizerSettings discriminator_opt;
  std::vector<SchedulePhase> schedule;  // empty = constant per-optimizer lr
  ModelSettings model;
  ExtractorSettings extractor;

  void validate() const;
};

/// Parses a JSON config. Unknown keys anywhere in the tree are an error, as
/// is any type mismatch; messages name the offending field.
TrainConfig parse_train_config(const std::string& json_text);

/// Canonical JSON echo of a config; parse_train_config inverts it.
std::string resolved_config_json(const TrainConfig& cfg);

/// Applies one dotted-path override ("generator_opt.lr=1e-4") to config JSON
/// text. The value parses as JSON when it can (numbers, booleans) and as a
/// string otherwise. The path must already exist in the schema.
std::string apply_config_override(const std::string& json_text, const std::string& dotted_kv);

/// Built-in recipe configs: "unsplash-50ep" (50 epochs, constant 2e-4,
/// beta2 0.9) and "coco-2phase" (59k steps at 2e-4 then 118k at 2e-5,
/// beta2 0.999). Dataset and output paths are left blank for the caller.
std::string preset_config_json(const std::string& name);

/// Learning rate in force at 1-based global step `step`: phases consume their
/// step budgets in order, and the last phase's rate persists past the end.
/// An empty schedule yields fallback_lr.
double schedule_lr(const std::vector<SchedulePhase>& schedule, std::int64_t step,
                   double fallback_lr);

}  // namespace vitcolor
