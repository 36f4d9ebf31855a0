#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

#include "vitcolor/nn.hpp"
#include "vitcolor/ops.hpp"

namespace vitcolor {

/// kVitIGan fuses a frozen image embedding into the bottleneck; kVitGan is
/// the ablation without the embedding path (the bottleneck feeds the 1x1
/// conv directly).
enum class GeneratorVariant { kVitIGan, kVitGan };

struct GeneratorConfig {
  GeneratorVariant variant = GeneratorVariant::kVitIGan;
  std::int64_t image_size = 256;      // divisible by 32; bottleneck is size/32
  std::int64_t channel_div = 1;       // divides every encoder/decoder width
  std::int64_t embedding_dim = 1000;  // width of the fused embedding

  void validate() const {
    if (image_size < 32 || image_size % 32 != 0)
      throw std::invalid_argument("generator: image_size must be a positive multiple of 32");
    if (channel_div < 1 || 32 % channel_div != 0)
      throw std::invalid_argument("generator: channel_div must divide 32");
    if (embedding_dim < 1) throw std::invalid_argument("generator: embedding_dim must be positive");
  }
};

/// U-shaped colorization network without skip connections: a strided-pool
/// conv encoder from the grayscale plane to an 8x8-per-256 bottleneck, an
/// optional embedding fusion, and an upsampling transposed-conv decoder
/// emitting two chroma planes in [-1,1].
template <typename T>
class Generator {
 public:
  /// Shapes observed during one forward pass.
  struct Trace {
    Shape bottleneck;    // after the encoder
    Shape fusion_input;  // what the 1x1 conv sees (post-concat for kVitIGan)
    Shape output;
  };

  Generator(const GeneratorConfig& config, Rng& rng) : cfg_(config) {
    cfg_.validate();
    const std::int64_t d = cfg_.channel_div;
    const std::int64_t enc[6] = {1, 64 / d, 128 / d, 256 / d, 512 / d, 512 / d};
    for (int i = 0; i < 5; ++i) {
      stages_[i].conv1 = Conv2dLayer<T>(enc[i], enc[i + 1], 5, 1, 2, rng);
      stages_[i].bn1 = BatchNorm2dLayer<T>(enc[i + 1]);
      stages_[i].conv2 = Conv2dLayer<T>(enc[i + 1], enc[i + 1], 5, 1, 2, rng);
      stages_[i].bn2 = BatchNorm2dLayer<T>(enc[i + 1]);
    }
    const std::int64_t bottleneck_c = enc[5];
    const std::int64_t fuse_in = cfg_.variant == GeneratorVariant::kVitIGan
                                     ? bottleneck_c + cfg_.embedding_dim
                                     : bottleneck_c;
    fuse_conv_ = Conv2dLayer<T>(fuse_in, bottleneck_c, 1, 1, 0, rng);
    fuse_bn_ = BatchNorm2dLayer<T>(bottleneck_c);
    const std::int64_t dec[6] = {512 / d, 256 / d, 128 / d, 64 / d, 32 / d, 2};
    for (int i = 0; i < 5; ++i) {
      deconvs_[i] = ConvTranspose2dLayer<T>(dec[i], dec[i + 1], 3, 1, 1, rng);
      if (i < 4) dec_bns_[i] = BatchNorm2dLayer<T>(dec[i + 1]);
    }
  }

  /// l is [N,1,H,W] in [-1,1]; embedding is [N,embedding_dim] and is treated
  /// as a constant (no gradient flows into the extractor).
  Var<T> forward(const Var<T>& l, const Tensor<T>& embedding, bool training,
                 Trace* trace = nullptr) {
    if (cfg_.variant != GeneratorVariant::kVitIGan)
      throw std::logic_error("generator: this variant does not take an embedding");
    check_input(l);
    if (embedding.ndim() != 2 || embedding.extent(0) != l->value.extent(0) ||
        embedding.extent(1) != cfg_.embedding_dim)
      throw std::invalid_argument("generator: embedding must be [N," +
                                  std::to_string(cfg_.embedding_dim) + "], got " +
                                  shape_str(embedding.shape()));
    return run(l, &embedding, training, trace);
  }

  /// Embedding-free variant entry point.
  Var<T> forward(const Var<T>& l, bool training, Trace* trace = nullptr) {
    if (cfg_.variant != GeneratorVariant::kVitGan)
      throw std::logic_error("generator: this variant requires an embedding");
    check_input(l);
    return run(l, nullptr, training, trace);
  }

  void collect(ParamStore<T>& store) {
    for (int i = 0; i < 5; ++i) {
      const std::string p = "enc" + std::to_string(i);
      stages_[i].conv1.collect(store, p + ".conv1");
      stages_[i].bn1.collect(store, p + ".bn1");
      stages_[i].conv2.collect(store, p + ".conv2");
      stages_[i].bn2.collect(store, p + ".bn2");
    }
    fuse_conv_.collect(store, "fuse.conv");
    fuse_bn_.collect(store, "fuse.bn");
    for (int i = 0; i < 5; ++i) {
      const std::string p = "dec" + std::to_string(i);
      deconvs_[i].collect(store, p + ".conv");
      if (i < 4) dec_bns_[i].collect(store, p + ".bn");
    }
  }

  const GeneratorConfig& config() const { return cfg_; }

 private:
  struct Stage {
    Conv2dLayer<T> conv1, conv2;
    BatchNorm2dLayer<T> bn1, bn2;
  };

  void check_input(const Var<T>& l) const {
    if (l->value.ndim() != 4 || l->value.extent(1) != 1 ||
        l->value.extent(2) != cfg_.image_size || l->value.extent(3) != cfg_.image_size)
      throw std::invalid_argument("generator: want [N,1," + std::to_string(cfg_.image_size) +
                                  "," + std::to_string(cfg_.image_size) + "], got " +
                                  shape_str(l->value.shape()));
  }

  Var<T> run(const Var<T>& l, const Tensor<T>* embedding, bool training, Trace* trace) {
    Var<T> x = l;
    for (int i = 0; i < 5; ++i) {
      x = relu(stages_[i].bn1.forward(stages_[i].conv1.forward(x), training));
      x = relu(stages_[i].bn2.forward(stages_[i].conv2.forward(x), training));
      x = avg_pool2(x);
    }
    if (trace != nullptr) trace->bottleneck = x->value.shape();

    if (embedding != nullptr) {
      auto emb = constant(Tensor<T>(*embedding));
      auto tiled = tile_spatial(emb, x->value.extent(2), x->value.extent(3));
      x = concat1(x, tiled);
    }
    if (trace != nullptr) trace->fusion_input = x->value.shape();
    x = relu(fuse_bn_.forward(fuse_conv_.forward(x), training));

    for (int i = 0; i < 5; ++i) {
      x = upsample_nearest2(x);
      x = deconvs_[i].forward(x);
      if (i < 4)
        x = leaky_relu(dec_bns_[i].forward(x, training), T(0.2));
      else
        x = tanh_op(x);
    }
    if (trace != nullptr) trace->output = x->value.shape();
    return x;
  }

  GeneratorConfig cfg_;
  Stage stages_[5];
  Conv2dLayer<T> fuse_conv_;
  BatchNorm2dLayer<T> fuse_bn_;
  ConvTranspose2dLayer<T> deconvs_[5];
  BatchNorm2dLayer<T> dec_bns_[4];
};

}  // namespace vitcolor
