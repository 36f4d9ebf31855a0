#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "vitcolor/nn.hpp"
#include "vitcolor/ops.hpp"

namespace vitcolor {

struct VitConfig {
  std::int64_t image_size = 256;
  std::int64_t patch_size = 32;
  std::int64_t depth = 6;
  std::int64_t heads = 16;
  std::int64_t mlp_dim = 2048;
  std::int64_t token_dim = 1024;
  double dropout = 0.1;      // attention weights, projections, and MLP
  double emb_dropout = 0.1;  // token sequence right after the position add
  std::int64_t in_channels = 3;  // full Lab stack: L, a, b

  std::int64_t grid() const { return image_size / patch_size; }
  std::int64_t patches() const { return grid() * grid(); }
  std::int64_t tokens() const { return patches() + 1; }  // class token included
  std::int64_t patch_dim() const { return in_channels * patch_size * patch_size; }

  void validate() const {
    if (image_size < 1 || patch_size < 1 || image_size % patch_size != 0)
      throw std::invalid_argument("discriminator: image_size must be a multiple of patch_size");
    if (depth < 1 || heads < 1 || mlp_dim < 1 || token_dim < 1 || in_channels < 1)
      throw std::invalid_argument("discriminator: sizes must be positive");
    if (token_dim % heads != 0)
      throw std::invalid_argument("discriminator: token_dim must be divisible by heads");
    if (dropout < 0 || dropout >= 1 || emb_dropout < 0 || emb_dropout >= 1)
      throw std::invalid_argument("discriminator: dropout rates must be in [0,1)");
  }
};

/// Pre-norm vision transformer returning one real/fake logit per image
/// ([N,1]; the sigmoid lives inside the loss). The input is the full Lab
/// stack so the critic sees chroma in the context of its luminance.
template <typename T>
class VitDiscriminator {
 public:
  struct Trace {
    Shape tokens;  // [batch, sequence, token_dim] the blocks ran on
  };

  VitDiscriminator(const VitConfig& config, Rng& rng) : cfg_(config) {
    cfg_.validate();
    const std::int64_t d = cfg_.token_dim;
    patch_embed_ = LinearLayer<T>(cfg_.patch_dim(), d, rng);
    cls_token_ = make_param(detail::small_normal<T>({1, 1, d}, rng));
    pos_embed_ = make_param(detail::small_normal<T>({1, cfg_.tokens(), d}, rng));
    blocks_.reserve(cfg_.depth);
    for (std::int64_t i = 0; i < cfg_.depth; ++i) {
      Block b;
      b.attn_norm = LayerNormLayer<T>(d);
      b.wq = LinearLayer<T>(d, d, rng);
      b.wk = LinearLayer<T>(d, d, rng);
      b.wv = LinearLayer<T>(d, d, rng);
      b.wo = LinearLayer<T>(d, d, rng);
      b.ff_norm = LayerNormLayer<T>(d);
      b.fc1 = LinearLayer<T>(d, cfg_.mlp_dim, rng);
      b.fc2 = LinearLayer<T>(cfg_.mlp_dim, d, rng);
      blocks_.push_back(std::move(b));
    }
    final_norm_ = LayerNormLayer<T>(d);
    head_ = LinearLayer<T>(d, 1, rng);
  }

  /// lab is [N,in_channels,image_size,image_size].
  Var<T> forward(const Var<T>& lab, bool training, Rng& rng, Trace* trace = nullptr) {
    if (lab->value.ndim() != 4 || lab->value.extent(1) != cfg_.in_channels ||
        lab->value.extent(2) != cfg_.image_size || lab->value.extent(3) != cfg_.image_size)
      throw std::invalid_argument("discriminator: want [N," + std::to_string(cfg_.in_channels) +
                                  "," + std::to_string(cfg_.image_size) + "," +
                                  std::to_string(cfg_.image_size) + "], got " +
                                  shape_str(lab->value.shape()));
    const std::int64_t n = lab->value.extent(0);
    const std::int64_t d = cfg_.token_dim;
    const std::int64_t s = cfg_.tokens();

    auto patches = patchify(lab, cfg_.patch_size);  // [N, P, patch_dim]
    auto tokens = reshape(patch_embed_.forward(reshape(patches, {n * cfg_.patches(), cfg_.patch_dim()})),
                          {n, cfg_.patches(), d});
    tokens = concat1(expand0(cls_token_, n), tokens);  // class token first
    tokens = add_bc0(tokens, pos_embed_);
    tokens = dropout(tokens, cfg_.emb_dropout, training, rng);
    if (trace != nullptr) trace->tokens = tokens->value.shape();

    for (auto& b : blocks_) {
      tokens = add(tokens, multi_head_attention(b.attn_norm.forward(tokens), b.wq, b.wk, b.wv,
                                                b.wo, cfg_.heads, cfg_.dropout, training, rng));
      auto h = b.ff_norm.forward(tokens);
      h = reshape(h, {n * s, d});
      h = dropout(gelu(b.fc1.forward(h)), cfg_.dropout, training, rng);
      h = dropout(b.fc2.forward(h), cfg_.dropout, training, rng);
      tokens = add(tokens, reshape(h, {n, s, d}));
    }

    auto cls = select_token(final_norm_.forward(tokens), 0);  // [N, D]
    return head_.forward(cls);                                // [N, 1] logits
  }

  void collect(ParamStore<T>& store) {
    patch_embed_.collect(store, "patch_embed");
    store.add_param("cls_token", cls_token_);
    store.add_param("pos_embed", pos_embed_);
    for (std::size_t i = 0; i < blocks_.size(); ++i) {
      const std::string p = "block" + std::to_string(i);
      blocks_[i].attn_norm.collect(store, p + ".attn_norm");
      blocks_[i].wq.collect(store, p + ".wq");
      blocks_[i].wk.collect(store, p + ".wk");
      blocks_[i].wv.collect(store, p + ".wv");
      blocks_[i].wo.collect(store, p + ".wo");
      blocks_[i].ff_norm.collect(store, p + ".ff_norm");
      blocks_[i].fc1.collect(store, p + ".fc1");
      blocks_[i].fc2.collect(store, p + ".fc2");
    }
    final_norm_.collect(store, "final_norm");
    head_.collect(store, "head");
  }

  const VitConfig& config() const { return cfg_; }

 private:
  struct Block {
    LayerNormLayer<T> attn_norm;
    LinearLayer<T> wq, wk, wv, wo;
    LayerNormLayer<T> ff_norm;
    LinearLayer<T> fc1, fc2;
  };

  VitConfig cfg_;
  LinearLayer<T> patch_embed_;
  Var<T> cls_token_, pos_embed_;
  std::vector<Block> blocks_;
  LayerNormLayer<T> final_norm_;
  LinearLayer<T> head_;
};

}  // namespace vitcolor
