#include "vitcolor/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <stdexcept>

#include "vitcolor/colorspace.hpp"
#include "vitcolor/image_io.hpp"
#include "vitcolor/resize.hpp"
#include "vitcolor/rng.hpp"

namespace vitcolor {

namespace fs = std::filesystem;

namespace {

bool supported_extension(const fs::path& p) {
  std::string ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return ext == ".png" || ext == ".jpg" || ext == ".jpeg";
}

}  // namespace

DatasetManifest scan_dataset(const std::string& root, std::int64_t image_size) {
  if (image_size <= 0) throw std::invalid_argument("scan_dataset: image_size must be > 0");
  const fs::path root_path(root);
  if (!fs::exists(root_path) || !fs::is_directory(root_path))
    throw std::runtime_error("scan_dataset: not a directory: " + root);

  DatasetManifest manifest;
  manifest.root = root;
  manifest.image_size = image_size;
  for (const auto& de : fs::recursive_directory_iterator(root_path)) {
    if (de.is_regular_file() && supported_extension(de.path()))
      manifest.entries.push_back({de.path().generic_string(), true});
  }
  std::sort(manifest.entries.begin(), manifest.entries.end(),
            [](const ManifestEntry& a, const ManifestEntry& b) { return a.path < b.path; });
  return manifest;
}

std::optional<Example> load_example(const std::string& path, std::int64_t size) {
  RgbImage rgb;
  try {
    rgb = read_image(path);
  } catch (const DecodeError&) {
    return std::nullopt;
  }
  const RgbImage resized = resize_bilinear(rgb, size, size);
  const LabImage lab = srgb_to_lab(resized);
  NormalizedImage norm = normalize_for_generator(lab);
  return Example{std::move(norm.L), std::move(norm.ab)};
}

BatchStream::BatchStream(DatasetManifest& manifest, std::int64_t batch_size, std::uint64_t seed,
                         std::int64_t epoch)
    : manifest_(manifest), batch_size_(batch_size) {
  if (batch_size <= 0) throw std::invalid_argument("BatchStream: batch_size must be > 0");
  if (batch_size > manifest.decodable_count())
    throw std::invalid_argument("BatchStream: batch_size exceeds dataset size");
  for (std::int64_t i = 0; i < static_cast<std::int64_t>(manifest.entries.size()); ++i)
    if (manifest.entries[i].decoded_ok) order_.push_back(i);
  Rng rng(Rng::derive(seed, static_cast<std::uint64_t>(epoch)));
  rng.shuffle(order_.begin(), order_.end());
}

std::optional<Batch> BatchStream::next() {
  const std::int64_t s = manifest_.image_size;
  Batch batch;
  batch.l = Tensor<float>({batch_size_, 1, s, s});
  batch.ab = Tensor<float>({batch_size_, 2, s, s});
  while (static_cast<std::int64_t>(batch.ids.size()) < batch_size_) {
    if (cursor_ >= order_.size()) return std::nullopt;  // drop-last
    const std::int64_t id = order_[cursor_++];
    auto example = load_example(manifest_.entries[id].path, s);
    if (!example) {
      manifest_.entries[id].decoded_ok = false;
      ++skipped_;
      continue;
    }
    const std::int64_t b = static_cast<std::int64_t>(batch.ids.size());
    std::copy_n(example->l.data(), s * s, batch.l.data() + b * s * s);
    std::copy_n(example->ab.data(), 2 * s * s, batch.ab.data() + b * 2 * s * s);
    batch.ids.push_back(id);
  }
  return batch;
}

}  // namespace vitcolor
