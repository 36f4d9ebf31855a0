#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "vitcolor/dataset.hpp"
#include "vitcolor/fid.hpp"
#include "vitcolor/image_io.hpp"
#include "vitcolor/trainer.hpp"

namespace fs = std::filesystem;
using namespace vitcolor;

namespace {

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

/// Image files under path (or path itself), in the same lexicographic order
/// the dataset scanner uses.
std::vector<std::string> list_inputs(const std::string& path) {
  if (fs::is_regular_file(path)) return {path};
  std::vector<std::string> files;
  // The manifest's image_size is irrelevant here; images keep native size.
  for (const auto& e : scan_dataset(path, 32).entries) files.push_back(e.path);
  return files;
}

int cmd_train(const std::string& config_path, const std::string& preset,
              const std::string& variant, const std::vector<std::string>& overrides) {
  std::string text =
      preset.empty() ? read_text_file(config_path) : preset_config_json(preset);
  if (!variant.empty()) text = apply_config_override(text, "variant=" + variant);
  for (const auto& kv : overrides) text = apply_config_override(text, kv);
  TrainConfig cfg = parse_train_config(text);
  std::cout << "resolved config:\n" << resolved_config_json(cfg);
  Trainer trainer(cfg);
  trainer.run();
  std::cout << "training complete: " << trainer.global_step() << " steps, checkpoints in "
            << (fs::path(cfg.output_dir) / "checkpoints").string() << "\n";
  return 0;
}

int cmd_colorize(const std::string& ckpt, const std::string& in_path,
                 const std::string& out_dir) {
  LoadedGenerator loaded = load_generator_for_inference(ckpt);
  if (!fs::exists(in_path)) throw std::runtime_error("input path not found: " + in_path);
  auto inputs = list_inputs(in_path);
  if (inputs.empty()) throw std::runtime_error("no images under " + in_path);
  fs::create_directories(out_dir);
  int done = 0, skipped = 0;
  for (const auto& file : inputs) {
    RgbImage img;
    try {
      img = read_image(file);
    } catch (const DecodeError& e) {
      std::cerr << "warning: skipping " << file << ": " << e.what() << "\n";
      ++skipped;
      continue;
    }
    auto t0 = std::chrono::steady_clock::now();
    RgbImage out =
        colorize_image(*loaded.gen, loaded.extractor.get(), img, loaded.config.image_size);
    auto t1 = std::chrono::steady_clock::now();
    const fs::path out_file =
        fs::path(out_dir) / (fs::path(file).stem().string() + "_color.png");
    write_png(out_file.string(), out);
    double ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
    std::printf("%s -> %s (%.1f ms)\n", file.c_str(), out_file.string().c_str(), ms);
    ++done;
  }
  std::cout << "colorized " << done << " image(s), skipped " << skipped << "\n";
  return 0;
}

/// Folds every decodable image under dir into acc; returns (added, skipped).
std::pair<std::int64_t, std::int64_t> accumulate_dir(FidAccumulator& acc,
                                                     const std::string& dir,
                                                     EmbeddingExtractor& extractor) {
  std::int64_t added = 0, skipped = 0;
  for (const auto& file : list_inputs(dir)) {
    try {
      accumulate_image(acc, read_image(file), extractor);
      ++added;
    } catch (const DecodeError& e) {
      std::cerr << "warning: skipping " << file << ": " << e.what() << "\n";
      ++skipped;
    }
  }
  return {added, skipped};
}

int cmd_eval_fid(const std::string& real_dir, const std::string& gen_dir,
                 const std::string& ckpt, const std::string& gray_dir,
                 const std::string& backend, const std::string& weights,
                 const std::string& weights_manifest, const std::string& report_path) {
  const bool from_ckpt = !ckpt.empty() || !gray_dir.empty();
  if (from_ckpt && (ckpt.empty() || gray_dir.empty()))
    throw std::runtime_error("--ckpt and --gray must be given together");
  if (from_ckpt == !gen_dir.empty())
    throw std::runtime_error("give either --gen or (--ckpt and --gray)");

  ExtractorSettings settings;
  settings.backend = backend;
  settings.weights = weights;
  settings.manifest = weights_manifest;
  auto extractor = make_extractor(settings);

  FidReport report;
  if (!from_ckpt) {
    report = evaluate_fid_dirs(real_dir, gen_dir, *extractor, backend);
  } else {
    // Generated side: colorize the gray directory through the checkpoint
    // and embed the outputs directly, no intermediate files.
    LoadedGenerator loaded = load_generator_for_inference(ckpt);
    FidAccumulator real_acc(kEmbeddingDim), gen_acc(kEmbeddingDim);
    auto [ra, rs] = accumulate_dir(real_acc, real_dir, *extractor);
    std::int64_t ga = 0, gs = 0;
    for (const auto& file : list_inputs(gray_dir)) {
      try {
        RgbImage colorized = colorize_image(*loaded.gen, loaded.extractor.get(),
                                            read_image(file), loaded.config.image_size);
        accumulate_image(gen_acc, colorized, *extractor);
        ++ga;
      } catch (const DecodeError& e) {
        std::cerr << "warning: skipping " << file << ": " << e.what() << "\n";
        ++gs;
      }
    }
    if (ra < 2) throw std::runtime_error("need at least 2 images under " + real_dir);
    if (ga < 2) throw std::runtime_error("need at least 2 images under " + gray_dir);
    report = FidReport{fid(real_acc.finalize(), gen_acc.finalize()), ra, ga, rs, gs, backend};
  }

  std::printf("FID: %.6f\n", report.value);
  std::cout << "backend: " << report.backend << "\n";

  nlohmann::json j;
  j["fid"] = report.value;
  j["backend"] = report.backend;
  j["real_count"] = report.real_count;
  j["gen_count"] = report.gen_count;
  j["real_skipped"] = report.real_skipped;
  j["gen_skipped"] = report.gen_skipped;
  std::ofstream out(report_path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + report_path);
  out << j.dump(2) << "\n";
  std::cout << "report: " << report_path << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Image colorization: train, colorize, and evaluate"};
  app.require_subcommand(1);

  auto* train = app.add_subcommand("train", "Train a colorization model");
  std::string config_path, preset, variant;
  std::vector<std::string> overrides;
  auto* config_opt =
      train->add_option("--config", config_path, "JSON config file")->check(CLI::ExistingFile);
  auto* preset_opt =
      train->add_option("--preset", preset, "Built-in recipe: unsplash-50ep or coco-2phase");
  config_opt->excludes(preset_opt);
  train->add_option("--set", overrides,
                    "Dotted-path override, e.g. --set generator_opt.lr=1e-4");
  train->add_option("--variant", variant, "Model variant: vit-i-gan or vit-gan");

  auto* colorize = app.add_subcommand("colorize", "Colorize images with a trained checkpoint");
  std::string ckpt, in_path, out_dir;
  colorize->add_option("--ckpt", ckpt, "Checkpoint directory")->required();
  colorize->add_option("--in", in_path, "Input image or directory")->required();
  colorize->add_option("--out", out_dir, "Output directory")->required();

  auto* eval = app.add_subcommand("eval-fid", "FID between two image populations");
  std::string real_dir, gen_dir, eval_ckpt, gray_dir, weights, weights_manifest;
  std::string backend = "stub";
  std::string report_path = "fid_report.json";
  eval->add_option("--real", real_dir, "Directory of reference images")->required();
  eval->add_option("--gen", gen_dir, "Directory of generated images");
  eval->add_option("--ckpt", eval_ckpt, "Checkpoint to colorize --gray with");
  eval->add_option("--gray", gray_dir, "Directory to colorize as the generated side");
  eval->add_option("--backend", backend, "Embedding backend: stub or pretrained")
      ->check(CLI::IsMember({"stub", "pretrained"}));
  eval->add_option("--weights", weights, "Weights file for the pretrained backend");
  eval->add_option("--manifest", weights_manifest, "Hash manifest for --weights");
  eval->add_option("--report", report_path, "Where to write the JSON report");

  CLI11_PARSE(app, argc, argv);

  try {
    if (train->parsed()) {
      if (config_path.empty() && preset.empty())
        throw std::runtime_error("train needs --config or --preset");
      return cmd_train(config_path, preset, variant, overrides);
    }
    if (colorize->parsed()) return cmd_colorize(ckpt, in_path, out_dir);
    return cmd_eval_fid(real_dir, gen_dir, eval_ckpt, gray_dir, backend, weights,
                        weights_manifest, report_path);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
