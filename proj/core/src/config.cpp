#include "vitcolor/config.hpp"

#include <cstdio>
#include <stdexcept>

#include "json.hpp"

namespace vitcolor {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& field, const std::string& what) {
  throw std::invalid_argument("config: " + field + ": " + what);
}

void reject_unknown(const json& obj, const std::string& scope,
                    std::initializer_list<const char*> known) {
  for (const auto& [key, _] : obj.items()) {
    bool ok = false;
    for (const char* k : known)
      if (key == k) ok = true;
    if (!ok) fail(scope.empty() ? key : scope + "." + key, "unknown key");
  }
}

template <typename T>
void read_field(const json& obj, const std::string& scope, const char* key, T& out) {
  if (!obj.contains(key)) return;
  const std::string field = scope.empty() ? key : scope + "." + key;
  try {
    out = obj.at(key).get<T>();
  } catch (const json::exception&) {
    fail(field, "wrong type");
  }
}

void read_optimizer(const json& obj, const std::string& scope, OptimizerSettings& out) {
  reject_unknown(obj, scope, {"lr", "beta1", "beta2", "eps"});
  read_field(obj, scope, "lr", out.lr);
  read_field(obj, scope, "beta1", out.beta1);
  read_field(obj, scope, "beta2", out.beta2);
  read_field(obj, scope, "eps", out.eps);
}

json optimizer_json(const OptimizerSettings& o) {
  return json{{"lr", o.lr}, {"beta1", o.beta1}, {"beta2", o.beta2}, {"eps", o.eps}};
}

}  // namespace

void OptimizerSettings::validate(const std::string& who) const {
  if (lr <= 0) fail(who + ".lr", "must be > 0");
  if (beta1 < 0 || beta1 >= 1) fail(who + ".beta1", "must be in [0,1)");
  if (beta2 < 0 || beta2 >= 1) fail(who + ".beta2", "must be in [0,1)");
  if (eps <= 0) fail(who + ".eps", "must be > 0");
}

void TrainConfig::validate() const {
  if (dataset.empty()) fail("dataset", "required");
  if (output_dir.empty()) fail("output_dir", "required");
  if (image_size <= 0 || image_size % 32 != 0) fail("image_size", "must be a multiple of 32");
  if (batch_size < 2) fail("batch_size", "must be >= 2 (normalization needs batch statistics)");
  if (epochs <= 0) fail("epochs", "must be > 0");
  if (lambda_l1 < 0) fail("lambda_l1", "must be >= 0");
  if (variant != "vit-i-gan" && variant != "vit-gan") fail("variant", "must be vit-i-gan or vit-gan");
  if (checkpoint_interval < 0) fail("checkpoint_interval", "must be >= 0");
  if (max_steps < 0) fail("max_steps", "must be >= 0");
  generator_opt.validate("generator_opt");
  discriminator_opt.validate("discriminator_opt");
  for (const auto& phase : schedule) {
    if (phase.steps <= 0) fail("schedule.steps", "must be > 0");
    if (phase.lr < 0) fail("schedule.lr", "must be >= 0");
  }
  if (model.channel_div <= 0 || 32 % model.channel_div != 0)
    fail("model.channel_div", "must divide 32");
  if (model.vit_patch_size <= 0 || image_size % model.vit_patch_size != 0)
    fail("model.vit_patch_size", "must divide image_size");
  if (model.vit_depth <= 0) fail("model.vit_depth", "must be > 0");
  if (model.vit_heads <= 0 || model.vit_token_dim % model.vit_heads != 0)
    fail("model.vit_heads", "must divide vit_token_dim");
  if (model.vit_mlp_dim <= 0) fail("model.vit_mlp_dim", "must be > 0");
  if (model.vit_dropout < 0 || model.vit_dropout >= 1) fail("model.vit_dropout", "must be in [0,1)");
  if (extractor.backend != "stub" && extractor.backend != "pretrained")
    fail("extractor.backend", "must be stub or pretrained");
  if (extractor.backend == "pretrained" && extractor.weights.empty())
    fail("extractor.weights", "required for the pretrained backend");
}

TrainConfig parse_train_config(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("config: malformed JSON: ") + e.what());
  }
  if (!root.is_object()) throw std::invalid_argument("config: top level must be an object");
  reject_unknown(root, "",
                 {"dataset", "output_dir", "image_size", "batch_size", "epochs", "lambda_l1",
                  "variant", "seed", "checkpoint_interval", "max_steps", "resume",
                  "generator_opt", "discriminator_opt", "schedule", "model", "extractor"});

  TrainConfig cfg;
  read_field(root, "", "dataset", cfg.dataset);
  read_field(root, "", "output_dir", cfg.output_dir);
  read_field(root, "", "image_size", cfg.image_size);
  read_field(root, "", "batch_size", cfg.batch_size);
  read_field(root, "", "epochs", cfg.epochs);
  read_field(root, "", "lambda_l1", cfg.lambda_l1);
  read_field(root, "", "variant", cfg.variant);
  read_field(root, "", "seed", cfg.seed);
  read_field(root, "", "checkpoint_interval", cfg.checkpoint_interval);
  read_field(root, "", "max_steps", cfg.max_steps);
  read_field(root, "", "resume", cfg.resume);
  if (root.contains("generator_opt"))
    read_optimizer(root.at("generator_opt"), "generator_opt", cfg.generator_opt);
  if (root.contains("discriminator_opt"))
    read_optimizer(root.at("discriminator_opt"), "discriminator_opt", cfg.discriminator_opt);
  if (root.contains("schedule")) {
    const json& sched = root.at("schedule");
    if (!sched.is_array()) fail("schedule", "must be an array of {steps, lr}");
    for (const json& phase : sched) {
      reject_unknown(phase, "schedule", {"steps", "lr"});
      SchedulePhase p;
      read_field(phase, "schedule", "steps", p.steps);
      read_field(phase, "schedule", "lr", p.lr);
      cfg.schedule.push_back(p);
    }
  }
  if (root.contains("model")) {
    const json& m = root.at("model");
    reject_unknown(m, "model",
                   {"channel_div", "vit_patch_size", "vit_depth", "vit_heads", "vit_mlp_dim",
                    "vit_token_dim", "vit_dropout"});
    read_field(m, "model", "channel_div", cfg.model.channel_div);
    read_field(m, "model", "vit_patch_size", cfg.model.vit_patch_size);
    read_field(m, "model", "vit_depth", cfg.model.vit_depth);
    read_field(m, "model", "vit_heads", cfg.model.vit_heads);
    read_field(m, "model", "vit_mlp_dim", cfg.model.vit_mlp_dim);
    read_field(m, "model", "vit_token_dim", cfg.model.vit_token_dim);
    read_field(m, "model", "vit_dropout", cfg.model.vit_dropout);
  }
  if (root.contains("extractor")) {
    const json& e = root.at("extractor");
    reject_unknown(e, "extractor", {"backend", "weights", "manifest"});
    read_field(e, "extractor", "backend", cfg.extractor.backend);
    read_field(e, "extractor", "weights", cfg.extractor.weights);
    read_field(e, "extractor", "manifest", cfg.extractor.manifest);
  }
  cfg.validate();
  return cfg;
}

std::string resolved_config_json(const TrainConfig& cfg) {
  json root;
  root["dataset"] = cfg.dataset;
  root["output_dir"] = cfg.output_dir;
  root["image_size"] = cfg.image_size;
  root["batch_size"] = cfg.batch_size;
  root["epochs"] = cfg.epochs;
  root["lambda_l1"] = cfg.lambda_l1;
  root["variant"] = cfg.variant;
  root["seed"] = cfg.seed;
  root["checkpoint_interval"] = cfg.checkpoint_interval;
  root["max_steps"] = cfg.max_steps;
  root["resume"] = cfg.resume;
  root["generator_opt"] = optimizer_json(cfg.generator_opt);
  root["discriminator_opt"] = optimizer_json(cfg.discriminator_opt);
  root["schedule"] = json::array();
  for (const auto& p : cfg.schedule)
    root["schedule"].push_back(json{{"steps", p.steps}, {"lr", p.lr}});
  root["model"] = json{{"channel_div", cfg.model.channel_div},
                       {"vit_patch_size", cfg.model.vit_patch_size},
                       {"vit_depth", cfg.model.vit_depth},
                       {"vit_heads", cfg.model.vit_heads},
                       {"vit_mlp_dim", cfg.model.vit_mlp_dim},
                       {"vit_token_dim", cfg.model.vit_token_dim},
                       {"vit_dropout", cfg.model.vit_dropout}};
  root["extractor"] = json{{"backend", cfg.extractor.backend},
                           {"weights", cfg.extractor.weights},
                           {"manifest", cfg.extractor.manifest}};
  return root.dump(2) + "\n";
}

std::string apply_config_override(const std::string& json_text, const std::string& dotted_kv) {
  const auto eq = dotted_kv.find('=');
  if (eq == std::string::npos || eq == 0)
    throw std::invalid_argument("override must look like key.path=value: " + dotted_kv);
  const std::string path = dotted_kv.substr(0, eq);
  const std::string value_text = dotted_kv.substr(eq + 1);

  json root = json::parse(json_text);
  json* node = &root;
  std::size_t begin = 0;
  std::vector<std::string> parts;
  while (true) {
    const auto dot = path.find('.', begin);
    parts.push_back(path.substr(begin, dot == std::string::npos ? dot : dot - begin));
    if (dot == std::string::npos) break;
    begin = dot + 1;
  }
  for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
    if (!node->is_object()) throw std::invalid_argument("override path not an object: " + path);
    node = &(*node)[parts[i]];
  }
  json value;
  try {
    value = json::parse(value_text);
  } catch (const json::exception&) {
    value = value_text;  // bare strings like vit-gan need no quotes
  }
  (*node)[parts.back()] = value;
  return root.dump();
}

std::string preset_config_json(const std::string& name) {
  if (name == "unsplash-50ep") {
    return R"({
  "dataset": "",
  "output_dir": "",
  "image_size": 256,
  "batch_size": 16,
  "epochs": 50,
  "lambda_l1": 100.0,
  "variant": "vit-i-gan",
  "seed": 1,
  "checkpoint_interval": 1000,
  "generator_opt": {"lr": 2e-4, "beta1": 0.5, "beta2": 0.9, "eps": 1e-8},
  "discriminator_opt": {"lr": 2e-4, "beta1": 0.5, "beta2": 0.9, "eps": 1e-8}
})";
  }
  if (name == "coco-2phase") {
    return R"({
  "dataset": "",
  "output_dir": "",
  "image_size": 256,
  "batch_size": 16,
  "epochs": 24,
  "lambda_l1": 100.0,
  "variant": "vit-i-gan",
  "seed": 1,
  "checkpoint_interval": 5000,
  "generator_opt": {"lr": 2e-4, "beta1": 0.5, "beta2": 0.999, "eps": 1e-8},
  "discriminator_opt": {"lr": 2e-4, "beta1": 0.5, "beta2": 0.999, "eps": 1e-8},
  "schedule": [{"steps": 59000, "lr": 2e-4}, {"steps": 118000, "lr": 2e-5}]
})";
  }
  throw std::invalid_argument("unknown preset: " + name);
}

double schedule_lr(const std::vector<SchedulePhase>& schedule, std::int64_t step,
                   double fallback_lr) {
  if (schedule.empty()) return fallback_lr;
  std::int64_t consumed = 0;
  for (const auto& phase : schedule) {
    consumed += phase.steps;
    if (step <= consumed) return phase.lr;
  }
  return schedule.back().lr;
}

}  // namespace vitcolor
