#pragma once

#include <cmath>
#include <cstdint>
#include <string>

#include "vitcolor/ops.hpp"
#include "vitcolor/params.hpp"
#include "vitcolor/rng.hpp"

// Layer wrappers: parameter ownership, initialization, and a forward that
// defers to the op menu. Initialization conventions are fixed here so that
// seeded construction is reproducible everywhere: conv and transposed conv
// use He normal over fan-in with zero bias, linear layers use N(0, 0.02)
// with zero bias, and norm layers start at identity.
namespace vitcolor {

template <typename T>
Var<T> make_param(Tensor<T> t) {
  return make_var(std::move(t), true);
}

namespace detail {

template <typename T>
Tensor<T> he_normal(Shape shape, std::int64_t fan_in, Rng& rng) {
  Tensor<T> t(std::move(shape));
  const double std = std::sqrt(2.0 / static_cast<double>(fan_in));
  for (std::int64_t i = 0; i < t.numel(); ++i) t.data()[i] = static_cast<T>(rng.normal(0.0, std));
  return t;
}

template <typename T>
Tensor<T> small_normal(Shape shape, Rng& rng, double std = 0.02) {
  Tensor<T> t(std::move(shape));
  for (std::int64_t i = 0; i < t.numel(); ++i) t.data()[i] = static_cast<T>(rng.normal(0.0, std));
  return t;
}

}  // namespace detail

template <typename T>
struct Conv2dLayer {
  Var<T> w, b;
  std::int64_t stride = 1, pad = 0;

  Conv2dLayer() = default;
  Conv2dLayer(std::int64_t cin, std::int64_t cout, std::int64_t k,
              std::int64_t stride_, std::int64_t pad_, Rng& rng)
      : w(make_param(detail::he_normal<T>({cout, cin, k, k}, cin * k * k, rng))),
        b(make_param(Tensor<T>({cout}, T(0)))),
        stride(stride_),
        pad(pad_) {}

  Var<T> forward(const Var<T>& x) const { return conv2d(x, w, b, stride, pad); }

  void collect(ParamStore<T>& st, const std::string& p) const {
    st.add_param(p + ".w", w);
    st.add_param(p + ".b", b);
  }
};

template <typename T>
struct ConvTranspose2dLayer {
  Var<T> w, b;  // w is [Cin,Cout,k,k]
  std::int64_t stride = 1, pad = 0;

  ConvTranspose2dLayer() = default;
  ConvTranspose2dLayer(std::int64_t cin, std::int64_t cout, std::int64_t k,
                       std::int64_t stride_, std::int64_t pad_, Rng& rng)
      : w(make_param(detail::he_normal<T>({cin, cout, k, k}, cin * k * k, rng))),
        b(make_param(Tensor<T>({cout}, T(0)))),
        stride(stride_),
        pad(pad_) {}

  Var<T> forward(const Var<T>& x) const { return conv_transpose2d(x, w, b, stride, pad); }

  void collect(ParamStore<T>& st, const std::string& p) const {
    st.add_param(p + ".w", w);
    st.add_param(p + ".b", b);
  }
};

template <typename T>
struct BatchNorm2dLayer {
  Var<T> gamma, beta;
  Tensor<T> running_mean, running_var;

  BatchNorm2dLayer() = default;
  explicit BatchNorm2dLayer(std::int64_t c)
      : gamma(make_param(Tensor<T>({c}, T(1)))),
        beta(make_param(Tensor<T>({c}, T(0)))),
        running_mean({c}, T(0)),
        running_var({c}, T(1)) {}

  Var<T> forward(const Var<T>& x, bool training) {
    return batch_norm2d(x, gamma, beta, running_mean, running_var, training);
  }

  void collect(ParamStore<T>& st, const std::string& p) {
    st.add_param(p + ".gamma", gamma);
    st.add_param(p + ".beta", beta);
    st.add_buffer(p + ".running_mean", &running_mean);
    st.add_buffer(p + ".running_var", &running_var);
  }
};

template <typename T>
struct LinearLayer {
  Var<T> w, b;  // w is [Out,In]

  LinearLayer() = default;
  LinearLayer(std::int64_t in, std::int64_t out, Rng& rng)
      : w(make_param(detail::small_normal<T>({out, in}, rng))),
        b(make_param(Tensor<T>({out}, T(0)))) {}

  Var<T> forward(const Var<T>& x) const { return linear(x, w, b); }

  void collect(ParamStore<T>& st, const std::string& p) const {
    st.add_param(p + ".w", w);
    st.add_param(p + ".b", b);
  }
};

template <typename T>
struct LayerNormLayer {
  Var<T> gamma, beta;

  LayerNormLayer() = default;
  explicit LayerNormLayer(std::int64_t d)
      : gamma(make_param(Tensor<T>({d}, T(1)))), beta(make_param(Tensor<T>({d}, T(0)))) {}

  Var<T> forward(const Var<T>& x) const { return layer_norm(x, gamma, beta); }

  void collect(ParamStore<T>& st, const std::string& p) const {
    st.add_param(p + ".gamma", gamma);
    st.add_param(p + ".beta", beta);
  }
};

/// Scaled dot-product multi-head self-attention over [N,S,D] tokens.
/// q, k, v are separate projections (equivalent parameter count to a fused
/// qkv projection); attention weights are dropped out at `dropout_p`.
template <typename T>
Var<T> multi_head_attention(const Var<T>& x, const LinearLayer<T>& wq,
                            const LinearLayer<T>& wk, const LinearLayer<T>& wv,
                            const LinearLayer<T>& wo, std::int64_t heads,
                            double dropout_p, bool training, Rng& rng) {
  const std::int64_t n = x->value.extent(0), s = x->value.extent(1), d = x->value.extent(2);
  auto flat = reshape(x, {n * s, d});
  auto q = split_heads(reshape(wq.forward(flat), {n, s, d}), heads);
  auto k = split_heads(reshape(wk.forward(flat), {n, s, d}), heads);
  auto v = split_heads(reshape(wv.forward(flat), {n, s, d}), heads);
  const T scale = static_cast<T>(1.0 / std::sqrt(static_cast<double>(d / heads)));
  auto scores = mul_scalar(bmm(q, transpose12(k)), scale);
  auto attn = dropout(softmax_lastdim(scores), dropout_p, training, rng);
  auto ctx = merge_heads(bmm(attn, v), heads);
  auto out = wo.forward(reshape(ctx, {n * s, d}));
  return dropout(reshape(out, {n, s, d}), dropout_p, training, rng);
}

}  // namespace vitcolor
