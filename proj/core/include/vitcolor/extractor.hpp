#pragma once

#include <cstdint>
#include <memory>
#include <string>

#include "vitcolor/tensor.hpp"

namespace vitcolor {

inline constexpr std::int64_t kExtractorInputSize = 299;
inline constexpr std::int64_t kEmbeddingDim = 1000;
inline constexpr std::uint64_t kStubExtractorSeed = 1000003;

/// Frozen image-embedding backend. Inputs are [N,3,299,299] in [0,1];
/// outputs are [N,1000]. Embeddings are plain tensors: the extractor sits
/// outside the training graph and never receives gradients. Implementations
/// count how often embed() is called so callers can assert a pipeline left
/// the extractor untouched.
class EmbeddingExtractor {
 public:
  virtual ~EmbeddingExtractor() = default;

  Tensor<float> embed(const Tensor<float>& batch) {
    ++invocations_;
    return run(batch);
  }

  std::int64_t invocations() const { return invocations_; }

 protected:
  virtual Tensor<float> run(const Tensor<float>& batch) = 0;

 private:
  std::int64_t invocations_ = 0;
};

/// Seeded frozen convolution pyramid: four stride-2 ReLU convs
/// (3->8->16->32->64), global average pooling, then a linear map to 1000
/// features. Deterministic in its seed; weights never train. Doubles as the
/// on-disk "pretrained" format via save_pretrained.
class StubExtractor final : public EmbeddingExtractor {
 public:
  explicit StubExtractor(std::uint64_t seed = kStubExtractorSeed);

  /// Writes the weight container and a manifest carrying its hash.
  void save_pretrained(const std::string& weights_path, const std::string& manifest_path) const;

 protected:
  Tensor<float> run(const Tensor<float>& batch) override;

 private:
  friend std::unique_ptr<EmbeddingExtractor> load_pretrained_extractor(
      const std::string& weights_path, const std::string& manifest_path);

  struct Uninit {};
  explicit StubExtractor(Uninit) {}  // weights filled by the loader

  Tensor<float> conv_w_[4], conv_b_[4];
  Tensor<float> fc_w_, fc_b_;
};

/// Loads a conv-pyramid weight container. The manifest must carry the exact
/// content hash of the weight file; any mismatch (stale manifest, tampered
/// or re-generated weights) is an error rather than a silent difference.
std::unique_ptr<EmbeddingExtractor> load_pretrained_extractor(
    const std::string& weights_path, const std::string& manifest_path);

/// Remaps a generator-side grayscale plane ([1,H,W], values in [-1,1]) to
/// extractor input: [0,1] range, bilinear resize to 299x299, channel
/// triplication. Values outside [-1,1] clamp.
Tensor<float> prepare_extractor_input(const Tensor<float>& l_norm);

}  // namespace vitcolor
