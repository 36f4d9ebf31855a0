#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "vitcolor/tensor.hpp"

namespace vitcolor {

/// One image discovered by a scan. decoded_ok starts true (decode checks are
/// deferred to first load) and flips to false permanently once a load fails.
struct ManifestEntry {
  std::string path;
  bool decoded_ok = true;
};

/// Catalogue of a training directory: every supported raster file under root,
/// ordered lexicographically by generic path so the listing is identical
/// across platforms and scans.
struct DatasetManifest {
  std::string root;
  std::int64_t image_size = 0;
  std::vector<ManifestEntry> entries;

  std::int64_t decodable_count() const {
    std::int64_t n = 0;
    for (const auto& e : entries) n += e.decoded_ok ? 1 : 0;
    return n;
  }
};

/// Recursively lists .png/.jpg/.jpeg files under root. Throws if root is
/// missing or not a directory.
DatasetManifest scan_dataset(const std::string& root, std::int64_t image_size);

/// One decoded training example: L in [-1,1] shaped [1,S,S] and ab in [-1,1]
/// shaped [2,S,S].
struct Example {
  Tensor<float> l;
  Tensor<float> ab;
};

/// Decode, bilinear-resize to size x size (aspect ratio not preserved),
/// convert to Lab, and normalize. Returns nullopt if the file cannot be
/// decoded.
std::optional<Example> load_example(const std::string& path, std::int64_t size);

/// A batch of examples plus the manifest indices they came from, so callers
/// can key per-image caches.
struct Batch {
  Tensor<float> l;   // [B,1,S,S]
  Tensor<float> ab;  // [B,2,S,S]
  std::vector<std::int64_t> ids;
};

/// Streams one epoch of batches in the order given by a permutation drawn
/// from (seed, epoch). Fixed batch size with the trailing partial batch
/// dropped. Corrupt files encountered mid-epoch are marked in the manifest,
/// counted, and replaced by the next permutation element.
class BatchStream {
 public:
  BatchStream(DatasetManifest& manifest, std::int64_t batch_size, std::uint64_t seed,
              std::int64_t epoch);

  /// Next full batch, or nullopt when fewer than batch_size decodable images
  /// remain in the permutation.
  std::optional<Batch> next();

  std::int64_t skipped() const { return skipped_; }
  const std::vector<std::int64_t>& permutation() const { return order_; }

 private:
  DatasetManifest& manifest_;
  std::int64_t batch_size_;
  std::vector<std::int64_t> order_;
  std::size_t cursor_ = 0;
  std::int64_t skipped_ = 0;
};

/// Batches per epoch under drop-last batching.
inline std::int64_t steps_per_epoch(const DatasetManifest& manifest, std::int64_t batch_size) {
  if (batch_size <= 0) throw std::invalid_argument("steps_per_epoch: batch_size must be > 0");
  return manifest.decodable_count() / batch_size;
}

}  // namespace vitcolor
