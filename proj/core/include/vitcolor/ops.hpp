#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "vitcolor/autodiff.hpp"
#include "vitcolor/conv_kernels.hpp"
#include "vitcolor/rng.hpp"
#include "vitcolor/tensor.hpp"

// The complete differentiable op menu. Every op validates shapes up front,
// computes eagerly, and registers a backward closure only while grad mode is
// on. All loops are sequential, so results are bitwise reproducible.
namespace vitcolor {

namespace detail {

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw std::invalid_argument(msg);
}

template <typename T>
void require_same_shape(const Var<T>& a, const Var<T>& b, const char* op) {
  require(a->value.same_shape(b->value),
          std::string(op) + ": shape mismatch " + shape_str(a->value.shape()) +
              " vs " + shape_str(b->value.shape()));
}

}  // namespace detail

// ---- elementwise ----------------------------------------------------------

template <typename T>
Var<T> add(const Var<T>& a, const Var<T>& b) {
  detail::require_same_shape(a, b, "add");
  Tensor<T> y(a->value.shape());
  const std::int64_t n = y.numel();
  for (std::int64_t i = 0; i < n; ++i) y.data()[i] = a->value.data()[i] + b->value.data()[i];
  return make_result<T>(std::move(y), {a, b}, [a, b](const Tensor<T>& g) {
    detail::accumulate(a, g);
    detail::accumulate(b, g);
  });
}

template <typename T>
Var<T> sub(const Var<T>& a, const Var<T>& b) {
  detail::require_same_shape(a, b, "sub");
  Tensor<T> y(a->value.shape());
  const std::int64_t n = y.numel();
  for (std::int64_t i = 0; i < n; ++i) y.data()[i] = a->value.data()[i] - b->value.data()[i];
  return make_result<T>(std::move(y), {a, b}, [a, b](const Tensor<T>& g) {
    detail::accumulate(a, g);
    if (b->requires_grad) {
      b->ensure_grad();
      const std::int64_t n = g.numel();
      for (std::int64_t i = 0; i < n; ++i) b->grad.data()[i] -= g.data()[i];
    }
  });
}

template <typename T>
Var<T> mul(const Var<T>& a, const Var<T>& b) {
  detail::require_same_shape(a, b, "mul");
  Tensor<T> y(a->value.shape());
  const std::int64_t n = y.numel();
  for (std::int64_t i = 0; i < n; ++i) y.data()[i] = a->value.data()[i] * b->value.data()[i];
  return make_result<T>(std::move(y), {a, b}, [a, b](const Tensor<T>& g) {
    const std::int64_t n = g.numel();
    if (a->requires_grad) {
      a->ensure_grad();
      for (std::int64_t i = 0; i < n; ++i) a->grad.data()[i] += g.data()[i] * b->value.data()[i];
    }
    if (b->requires_grad) {
      b->ensure_grad();
      for (std::int64_t i = 0; i < n; ++i) b->grad.data()[i] += g.data()[i] * a->value.data()[i];
    }
  });
}

template <typename T>
Var<T> add_scalar(const Var<T>& a, T s) {
  Tensor<T> y(a->value.shape());
  const std::int64_t n = y.numel();
  for (std::int64_t i = 0; i < n; ++i) y.data()[i] = a->value.data()[i] + s;
  return make_result<T>(std::move(y), {a}, [a](const Tensor<T>& g) { detail::accumulate(a, g); });
}

template <typename T>
Var<T> mul_scalar(const Var<T>& a, T s) {
  Tensor<T> y(a->value.shape());
  const std::int64_t n = y.numel();
  for (std::int64_t i = 0; i < n; ++i) y.data()[i] = a->value.data()[i] * s;
  return make_result<T>(std::move(y), {a}, [a, s](const Tensor<T>& g) {
    if (!a->requires_grad) return;
    a->ensure_grad();
    const std::int64_t n = g.numel();
    for (std::int64_t i = 0; i < n; ++i) a->grad.data()[i] += g.data()[i] * s;
  });
}

template <typename T>
Var<T> relu(const Var<T>& x) {
  Tensor<T> y(x->value.shape());
  const std::int64_t n = y.numel();
  for (std::int64_t i = 0; i < n; ++i) y.data()[i] = x->value.data()[i] > T(0) ? x->value.data()[i] : T(0);
  return make_result<T>(std::move(y), {x}, [x](const Tensor<T>& g) {
    if (!x->requires_grad) return;
    x->ensure_grad();
    const std::int64_t n = g.numel();
    for (std::int64_t i = 0; i < n; ++i)
      if (x->value.data()[i] > T(0)) x->grad.data()[i] += g.data()[i];
  });
}

template <typename T>
Var<T> leaky_relu(const Var<T>& x, T slope) {
  Tensor<T> y(x->value.shape());
  const std::int64_t n = y.numel();
  for (std::int64_t i = 0; i < n; ++i) {
    const T v = x->value.data()[i];
    y.data()[i] = v > T(0) ? v : slope * v;
  }
  return make_result<T>(std::move(y), {x}, [x, slope](const Tensor<T>& g) {
    if (!x->requires_grad) return;
    x->ensure_grad();
    const std::int64_t n = g.numel();
    for (std::int64_t i = 0; i < n; ++i)
      x->grad.data()[i] += g.data()[i] * (x->value.data()[i] > T(0) ? T(1) : slope);
  });
}

template <typename T>
Var<T> tanh_op(const Var<T>& x) {
  Tensor<T> y(x->value.shape());
  const std::int64_t n = y.numel();
  for (std::int64_t i = 0; i < n; ++i) y.data()[i] = std::tanh(x->value.data()[i]);
  Tensor<T> saved(y);
  return make_result<T>(std::move(y), {x}, [x, saved = std::move(saved)](const Tensor<T>& g) {
    if (!x->requires_grad) return;
    x->ensure_grad();
    const std::int64_t n = g.numel();
    for (std::int64_t i = 0; i < n; ++i) {
      const T t = saved.data()[i];
      x->grad.data()[i] += g.data()[i] * (T(1) - t * t);
    }
  });
}

/// Exact GELU: 0.5 x (1 + erf(x / sqrt(2))).
template <typename T>
Var<T> gelu(const Var<T>& x) {
  constexpr T kInvSqrt2 = T(0.7071067811865475244);
  constexpr T kInvSqrt2Pi = T(0.3989422804014326779);
  Tensor<T> y(x->value.shape());
  const std::int64_t n = y.numel();
  for (std::int64_t i = 0; i < n; ++i) {
    const T v = x->value.data()[i];
    y.data()[i] = T(0.5) * v * (T(1) + std::erf(v * kInvSqrt2));
  }
  return make_result<T>(std::move(y), {x}, [x](const Tensor<T>& g) {
    if (!x->requires_grad) return;
    x->ensure_grad();
    const std::int64_t n = g.numel();
    for (std::int64_t i = 0; i < n; ++i) {
      const T v = x->value.data()[i];
      const T cdf = T(0.5) * (T(1) + std::erf(v * kInvSqrt2));
      const T pdf = kInvSqrt2Pi * std::exp(T(-0.5) * v * v);
      x->grad.data()[i] += g.data()[i] * (cdf + v * pdf);
    }
  });
}

/// Inverted dropout: kept activations are scaled by 1/(1-p) so the expected
/// value is unchanged. Identity when not training or p == 0.
template <typename T>
Var<T> dropout(const Var<T>& x, double p, bool training, Rng& rng) {
  detail::require(p >= 0.0 && p < 1.0, "dropout: p must be in [0,1)");
  if (!training || p == 0.0) return x;
  const std::int64_t n = x->value.numel();
  Tensor<T> mask(x->value.shape());
  const T scale = T(1.0 / (1.0 - p));
  for (std::int64_t i = 0; i < n; ++i)
    mask.data()[i] = rng.uniform() >= p ? scale : T(0);
  Tensor<T> y(x->value.shape());
  for (std::int64_t i = 0; i < n; ++i) y.data()[i] = x->value.data()[i] * mask.data()[i];
  return make_result<T>(std::move(y), {x}, [x, mask = std::move(mask)](const Tensor<T>& g) {
    if (!x->requires_grad) return;
    x->ensure_grad();
    const std::int64_t n = g.numel();
    for (std::int64_t i = 0; i < n; ++i) x->grad.data()[i] += g.data()[i] * mask.data()[i];
  });
}

// ---- linear algebra --------------------------------------------------------

/// y = x w^T + b with x [M,In], w [Out,In], b [Out] (b may be null).
template <typename T>
Var<T> linear(const Var<T>& x, const Var<T>& w, const Var<T>& b) {
  detail::require(x->value.ndim() == 2 && w->value.ndim() == 2,
                  "linear: want 2-d x and w, got " + shape_str(x->value.shape()) +
                      " and " + shape_str(w->value.shape()));
  const std::int64_t m = x->value.extent(0), in = x->value.extent(1);
  const std::int64_t out = w->value.extent(0);
  detail::require(w->value.extent(1) == in, "linear: x " + shape_str(x->value.shape()) +
                                                " vs w " + shape_str(w->value.shape()));
  if (b) detail::require(b->value.ndim() == 1 && b->value.extent(0) == out, "linear: bad bias shape");
  Tensor<T> y({m, out});
  detail::CMapM<T> xm(x->value.data(), m, in);
  detail::CMapM<T> wm(w->value.data(), out, in);
  detail::MapM<T> ym(y.data(), m, out);
  ym.noalias() = xm * wm.transpose();
  if (b) {
    for (std::int64_t i = 0; i < m; ++i)
      for (std::int64_t j = 0; j < out; ++j) y.data()[i * out + j] += b->value.data()[j];
  }
  std::vector<Var<T>> parents = b ? std::vector<Var<T>>{x, w, b} : std::vector<Var<T>>{x, w};
  return make_result<T>(std::move(y), std::move(parents), [x, w, b, m, in, out](const Tensor<T>& g) {
    detail::CMapM<T> gm(g.data(), m, out);
    if (x->requires_grad) {
      x->ensure_grad();
      detail::MapM<T> dxm(x->grad.data(), m, in);
      detail::CMapM<T> wm(w->value.data(), out, in);
      dxm.noalias() += gm * wm;
    }
    if (w->requires_grad) {
      w->ensure_grad();
      detail::MapM<T> dwm(w->grad.data(), out, in);
      detail::CMapM<T> xm(x->value.data(), m, in);
      dwm.noalias() += gm.transpose() * xm;
    }
    if (b && b->requires_grad) {
      b->ensure_grad();
      for (std::int64_t i = 0; i < m; ++i)
        for (std::int64_t j = 0; j < out; ++j) b->grad.data()[j] += g.data()[i * out + j];
    }
  });
}

/// Batched matmul: [B,M,K] x [B,K,N] -> [B,M,N].
template <typename T>
Var<T> bmm(const Var<T>& a, const Var<T>& b) {
  detail::require(a->value.ndim() == 3 && b->value.ndim() == 3 &&
                      a->value.extent(0) == b->value.extent(0) &&
                      a->value.extent(2) == b->value.extent(1),
                  "bmm: incompatible " + shape_str(a->value.shape()) + " and " +
                      shape_str(b->value.shape()));
  const std::int64_t bs = a->value.extent(0), m = a->value.extent(1);
  const std::int64_t k = a->value.extent(2), n = b->value.extent(2);
  Tensor<T> y({bs, m, n});
  for (std::int64_t i = 0; i < bs; ++i) {
    detail::CMapM<T> am(a->value.data() + i * m * k, m, k);
    detail::CMapM<T> bm(b->value.data() + i * k * n, k, n);
    detail::MapM<T> ym(y.data() + i * m * n, m, n);
    ym.noalias() = am * bm;
  }
  return make_result<T>(std::move(y), {a, b}, [a, b, bs, m, k, n](const Tensor<T>& g) {
    for (std::int64_t i = 0; i < bs; ++i) {
      detail::CMapM<T> gm(g.data() + i * m * n, m, n);
      if (a->requires_grad) {
        a->ensure_grad();
        detail::CMapM<T> bm(b->value.data() + i * k * n, k, n);
        detail::MapM<T> dam(a->grad.data() + i * m * k, m, k);
        dam.noalias() += gm * bm.transpose();
      }
      if (b->requires_grad) {
        b->ensure_grad();
        detail::CMapM<T> am(a->value.data() + i * m * k, m, k);
        detail::MapM<T> dbm(b->grad.data() + i * k * n, k, n);
        dbm.noalias() += am.transpose() * gm;
      }
    }
  });
}

/// Swap the last two axes of a 3-d tensor.
template <typename T>
Var<T> transpose12(const Var<T>& x) {
  detail::require(x->value.ndim() == 3, "transpose12: want 3-d, got " + shape_str(x->value.shape()));
  const std::int64_t b = x->value.extent(0), m = x->value.extent(1), n = x->value.extent(2);
  Tensor<T> y({b, n, m});
  for (std::int64_t i = 0; i < b; ++i)
    for (std::int64_t r = 0; r < m; ++r)
      for (std::int64_t c = 0; c < n; ++c)
        y.data()[(i * n + c) * m + r] = x->value.data()[(i * m + r) * n + c];
  return make_result<T>(std::move(y), {x}, [x, b, m, n](const Tensor<T>& g) {
    if (!x->requires_grad) return;
    x->ensure_grad();
    for (std::int64_t i = 0; i < b; ++i)
      for (std::int64_t r = 0; r < m; ++r)
        for (std::int64_t c = 0; c < n; ++c)
          x->grad.data()[(i * m + r) * n + c] += g.data()[(i * n + c) * m + r];
  });
}

// ---- shape -----------------------------------------------------------------

template <typename T>
Var<T> reshape(const Var<T>& x, Shape shape) {
  Tensor<T> y = x->value.reshaped(shape);
  return make_result<T>(std::move(y), {x}, [x](const Tensor<T>& g) {
    if (!x->requires_grad) return;
    x->ensure_grad();
    const std::int64_t n = g.numel();
    for (std::int64_t i = 0; i < n; ++i) x->grad.data()[i] += g.data()[i];
  });
}

/// Concatenate along axis 1; all other extents must match.
template <typename T>
Var<T> concat1(const Var<T>& a, const Var<T>& b) {
  const auto& sa = a->value.shape();
  const auto& sb = b->value.shape();
  detail::require(sa.size() == sb.size() && sa.size() >= 2,
                  "concat1: rank mismatch " + shape_str(sa) + " vs " + shape_str(sb));
  for (std::size_t i = 0; i < sa.size(); ++i)
    if (i != 1)
      detail::require(sa[i] == sb[i], "concat1: extent mismatch " + shape_str(sa) + " vs " + shape_str(sb));
  Shape so = sa;
  so[1] = sa[1] + sb[1];
  std::int64_t inner = 1;
  for (std::size_t i = 2; i < sa.size(); ++i) inner *= sa[i];
  const std::int64_t outer = sa[0];
  const std::int64_t na = sa[1] * inner, nb = sb[1] * inner;
  Tensor<T> y(so);
  for (std::int64_t o = 0; o < outer; ++o) {
    std::copy_n(a->value.data() + o * na, na, y.data() + o * (na + nb));
    std::copy_n(b->value.data() + o * nb, nb, y.data() + o * (na + nb) + na);
  }
  return make_result<T>(std::move(y), {a, b}, [a, b, outer, na, nb](const Tensor<T>& g) {
    for (std::int64_t o = 0; o < outer; ++o) {
      if (a->requires_grad) {
        a->ensure_grad();
        const T* src = g.data() + o * (na + nb);
        T* dst = a->grad.data() + o * na;
        for (std::int64_t i = 0; i < na; ++i) dst[i] += src[i];
      }
      if (b->requires_grad) {
        b->ensure_grad();
        const T* src = g.data() + o * (na + nb) + na;
        T* dst = b->grad.data() + o * nb;
        for (std::int64_t i = 0; i < nb; ++i) dst[i] += src[i];
      }
    }
  });
}

/// Pick one position along axis 1 of [N,S,D] -> [N,D].
template <typename T>
Var<T> select_token(const Var<T>& x, std::int64_t idx) {
  detail::require(x->value.ndim() == 3, "select_token: want 3-d, got " + shape_str(x->value.shape()));
  const std::int64_t n = x->value.extent(0), s = x->value.extent(1), d = x->value.extent(2);
  detail::require(idx >= 0 && idx < s, "select_token: index out of range");
  Tensor<T> y({n, d});
  for (std::int64_t i = 0; i < n; ++i)
    std::copy_n(x->value.data() + (i * s + idx) * d, d, y.data() + i * d);
  return make_result<T>(std::move(y), {x}, [x, idx, n, s, d](const Tensor<T>& g) {
    if (!x->requires_grad) return;
    x->ensure_grad();
    for (std::int64_t i = 0; i < n; ++i) {
      const T* src = g.data() + i * d;
      T* dst = x->grad.data() + (i * s + idx) * d;
      for (std::int64_t j = 0; j < d; ++j) dst[j] += src[j];
    }
  });
}

/// Repeat a [1,...] tensor n times along axis 0.
template <typename T>
Var<T> expand0(const Var<T>& p, std::int64_t n) {
  detail::require(p->value.ndim() >= 1 && p->value.extent(0) == 1,
                  "expand0: leading extent must be 1, got " + shape_str(p->value.shape()));
  Shape so = p->value.shape();
  so[0] = n;
  const std::int64_t inner = p->value.numel();
  Tensor<T> y(so);
  for (std::int64_t i = 0; i < n; ++i) std::copy_n(p->value.data(), inner, y.data() + i * inner);
  return make_result<T>(std::move(y), {p}, [p, n, inner](const Tensor<T>& g) {
    if (!p->requires_grad) return;
    p->ensure_grad();
    for (std::int64_t i = 0; i < n; ++i) {
      const T* src = g.data() + i * inner;
      for (std::int64_t j = 0; j < inner; ++j) p->grad.data()[j] += src[j];
    }
  });
}

/// x [N,...] + p [1,...], broadcasting p across axis 0.
template <typename T>
Var<T> add_bc0(const Var<T>& x, const Var<T>& p) {
  detail::require(x->value.ndim() == p->value.ndim() && p->value.extent(0) == 1,
                  "add_bc0: want broadcastable shapes, got " + shape_str(x->value.shape()) +
                      " and " + shape_str(p->value.shape()));
  for (std::int64_t i = 1; i < x->value.ndim(); ++i)
    detail::require(x->value.extent(i) == p->value.extent(i), "add_bc0: extent mismatch");
  const std::int64_t n = x->value.extent(0), inner = p->value.numel();
  Tensor<T> y(x->value.shape());
  for (std::int64_t i = 0; i < n; ++i)
    for (std::int64_t j = 0; j < inner; ++j)
      y.data()[i * inner + j] = x->value.data()[i * inner + j] + p->value.data()[j];
  return make_result<T>(std::move(y), {x, p}, [x, p, n, inner](const Tensor<T>& g) {
    detail::accumulate(x, g);
    if (p->requires_grad) {
      p->ensure_grad();
      for (std::int64_t i = 0; i < n; ++i)
        for (std::int64_t j = 0; j < inner; ++j) p->grad.data()[j] += g.data()[i * inner + j];
    }
  });
}

/// [N,S,D] -> [N*heads, S, D/heads], grouping features by head.
template <typename T>
Var<T> split_heads(const Var<T>& x, std::int64_t heads) {
  detail::require(x->value.ndim() == 3, "split_heads: want 3-d, got " + shape_str(x->value.shape()));
  const std::int64_t n = x->value.extent(0), s = x->value.extent(1), d = x->value.extent(2);
  detail::require(d % heads == 0, "split_heads: dim not divisible by heads");
  const std::int64_t dh = d / heads;
  Tensor<T> y({n * heads, s, dh});
  for (std::int64_t i = 0; i < n; ++i)
    for (std::int64_t hh = 0; hh < heads; ++hh)
      for (std::int64_t t = 0; t < s; ++t)
        std::copy_n(x->value.data() + (i * s + t) * d + hh * dh, dh,
                    y.data() + ((i * heads + hh) * s + t) * dh);
  return make_result<T>(std::move(y), {x}, [x, heads, n, s, d](const Tensor<T>& g) {
    if (!x->requires_grad) return;
    x->ensure_grad();
    const std::int64_t dh = d / heads;
    for (std::int64_t i = 0; i < n; ++i)
      for (std::int64_t hh = 0; hh < heads; ++hh)
        for (std::int64_t t = 0; t < s; ++t) {
          const T* src = g.data() + ((i * heads + hh) * s + t) * dh;
          T* dst = x->grad.data() + (i * s + t) * d + hh * dh;
          for (std::int64_t j = 0; j < dh; ++j) dst[j] += src[j];
        }
  });
}

/// Inverse of split_heads: [N*heads, S, dh] -> [N, S, heads*dh].
template <typename T>
Var<T> merge_heads(const Var<T>& x, std::int64_t heads) {
  detail::require(x->value.ndim() == 3 && x->value.extent(0) % heads == 0,
                  "merge_heads: bad input " + shape_str(x->value.shape()));
  const std::int64_t n = x->value.extent(0) / heads, s = x->value.extent(1), dh = x->value.extent(2);
  const std::int64_t d = heads * dh;
  Tensor<T> y({n, s, d});
  for (std::int64_t i = 0; i < n; ++i)
    for (std::int64_t hh = 0; hh < heads; ++hh)
      for (std::int64_t t = 0; t < s; ++t)
        std::copy_n(x->value.data() + ((i * heads + hh) * s + t) * dh, dh,
                    y.data() + (i * s + t) * d + hh * dh);
  return make_result<T>(std::move(y), {x}, [x, heads, n, s, dh, d](const Tensor<T>& g) {
    if (!x->requires_grad) return;
    x->ensure_grad();
    for (std::int64_t i = 0; i < n; ++i)
      for (std::int64_t hh = 0; hh < heads; ++hh)
        for (std::int64_t t = 0; t < s; ++t) {
          const T* src = g.data() + (i * s + t) * d + hh * dh;
          T* dst = x->grad.data() + ((i * heads + hh) * s + t) * dh;
          for (std::int64_t j = 0; j < dh; ++j) dst[j] += src[j];
        }
  });
}

/// [N,C,H,W] -> [N, (H/p)(W/p), C*p*p] with tokens in raster order and
/// features ordered channel-major, then row, then column within the patch.
template <typename T>
Var<T> patchify(const Var<T>& x, std::int64_t p) {
  detail::require(x->value.ndim() == 4, "patchify: want 4-d, got " + shape_str(x->value.shape()));
  const std::int64_t n = x->value.extent(0), c = x->value.extent(1);
  const std::int64_t h = x->value.extent(2), w = x->value.extent(3);
  detail::require(h % p == 0 && w % p == 0, "patchify: size not divisible by patch");
  const std::int64_t gh = h / p, gw = w / p, s = gh * gw, f = c * p * p;
  Tensor<T> y({n, s, f});
  for (std::int64_t in = 0; in < n; ++in)
    for (std::int64_t by = 0; by < gh; ++by)
      for (std::int64_t bx = 0; bx < gw; ++bx) {
        T* tok = y.data() + (in * s + by * gw + bx) * f;
        for (std::int64_t cc = 0; cc < c; ++cc)
          for (std::int64_t py = 0; py < p; ++py)
            for (std::int64_t px = 0; px < p; ++px)
              tok[(cc * p + py) * p + px] =
                  x->value.data()[((in * c + cc) * h + by * p + py) * w + bx * p + px];
      }
  return make_result<T>(std::move(y), {x}, [x, p, n, c, h, w, gh, gw, s, f](const Tensor<T>& g) {
    if (!x->requires_grad) return;
    x->ensure_grad();
    for (std::int64_t in = 0; in < n; ++in)
      for (std::int64_t by = 0; by < gh; ++by)
        for (std::int64_t bx = 0; bx < gw; ++bx) {
          const T* tok = g.data() + (in * s + by * gw + bx) * f;
          for (std::int64_t cc = 0; cc < c; ++cc)
            for (std::int64_t py = 0; py < p; ++py)
              for (std::int64_t px = 0; px < p; ++px)
                x->grad.data()[((in * c + cc) * h + by * p + py) * w + bx * p + px] +=
                    tok[(cc * p + py) * p + px];
        }
  });
}

/// Broadcast a feature vector over a spatial grid: [N,D] -> [N,D,h,w].
template <typename T>
Var<T> tile_spatial(const Var<T>& e, std::int64_t h, std::int64_t w) {
  detail::require(e->value.ndim() == 2, "tile_spatial: want 2-d, got " + shape_str(e->value.shape()));
  const std::int64_t n = e->value.extent(0), d = e->value.extent(1);
  Tensor<T> y({n, d, h, w});
  const std::int64_t hw = h * w;
  for (std::int64_t i = 0; i < n; ++i)
    for (std::int64_t j = 0; j < d; ++j) {
      const T v = e->value.data()[i * d + j];
      T* dst = y.data() + (i * d + j) * hw;
      for (std::int64_t q = 0; q < hw; ++q) dst[q] = v;
    }
  return make_result<T>(std::move(y), {e}, [e, n, d, hw](const Tensor<T>& g) {
    if (!e->requires_grad) return;
    e->ensure_grad();
    for (std::int64_t i = 0; i < n; ++i)
      for (std::int64_t j = 0; j < d; ++j) {
        const T* src = g.data() + (i * d + j) * hw;
        T acc = T(0);
        for (std::int64_t q = 0; q < hw; ++q) acc += src[q];
        e->grad.data()[i * d + j] += acc;
      }
  });
}

// ---- spatial ---------------------------------------------------------------

/// Cross-correlation with square kernel, weight layout [Co,Ci,k,k]; bias may
/// be null.
template <typename T>
Var<T> conv2d(const Var<T>& x, const Var<T>& w, const Var<T>& b,
              std::int64_t stride, std::int64_t pad) {
  detail::require(x->value.ndim() == 4 && w->value.ndim() == 4,
                  "conv2d: want 4-d input and weight");
  Tensor<T> y = detail::conv2d_fwd(x->value, w->value, stride, pad);
  const std::int64_t co = w->value.extent(0);
  if (b) {
    detail::require(b->value.ndim() == 1 && b->value.extent(0) == co, "conv2d: bad bias shape");
    const std::int64_t n = y.extent(0), hw = y.extent(2) * y.extent(3);
    for (std::int64_t in = 0; in < n; ++in)
      for (std::int64_t c = 0; c < co; ++c) {
        T* dst = y.data() + (in * co + c) * hw;
        const T bv = b->value.data()[c];
        for (std::int64_t q = 0; q < hw; ++q) dst[q] += bv;
      }
  }
  const std::int64_t h = x->value.extent(2), wd = x->value.extent(3);
  const std::int64_t k = w->value.extent(2);
  std::vector<Var<T>> parents = b ? std::vector<Var<T>>{x, w, b} : std::vector<Var<T>>{x, w};
  return make_result<T>(std::move(y), std::move(parents),
                        [x, w, b, stride, pad, h, wd, k](const Tensor<T>& g) {
    if (x->requires_grad) {
      Tensor<T> dx = detail::conv2d_bwd_input(g, w->value, stride, pad, h, wd);
      detail::accumulate(x, dx);
    }
    if (w->requires_grad) {
      Tensor<T> dw = detail::conv2d_bwd_weight(g, x->value, k, stride, pad);
      detail::accumulate(w, dw);
    }
    if (b && b->requires_grad) {
      b->ensure_grad();
      const std::int64_t n = g.extent(0), co = g.extent(1), hw = g.extent(2) * g.extent(3);
      for (std::int64_t in = 0; in < n; ++in)
        for (std::int64_t c = 0; c < co; ++c) {
          const T* src = g.data() + (in * co + c) * hw;
          T acc = T(0);
          for (std::int64_t q = 0; q < hw; ++q) acc += src[q];
          b->grad.data()[c] += acc;
        }
    }
  });
}

/// Transposed convolution, weight layout [Ci,Co,k,k]. Output spatial size is
/// (in-1)*stride + k - 2*pad. Forward is the adjoint of conv2d, so at
/// stride 1, pad (k-1)/2 it preserves spatial size.
template <typename T>
Var<T> conv_transpose2d(const Var<T>& x, const Var<T>& w, const Var<T>& b,
                        std::int64_t stride, std::int64_t pad) {
  detail::require(x->value.ndim() == 4 && w->value.ndim() == 4,
                  "conv_transpose2d: want 4-d input and weight");
  const std::int64_t ci = x->value.extent(1);
  detail::require(w->value.extent(0) == ci,
                  "conv_transpose2d: weight " + shape_str(w->value.shape()) +
                      " does not match input " + shape_str(x->value.shape()));
  const std::int64_t k = w->value.extent(2), co = w->value.extent(1);
  const std::int64_t h = x->value.extent(2), wd = x->value.extent(3);
  const std::int64_t ho = (h - 1) * stride + k - 2 * pad;
  const std::int64_t wo = (wd - 1) * stride + k - 2 * pad;
  detail::require(ho > 0 && wo > 0, "conv_transpose2d: empty output");
  Tensor<T> y = detail::conv2d_bwd_input(x->value, w->value, stride, pad, ho, wo);
  if (b) {
    detail::require(b->value.ndim() == 1 && b->value.extent(0) == co, "conv_transpose2d: bad bias shape");
    const std::int64_t n = y.extent(0), hw = ho * wo;
    for (std::int64_t in = 0; in < n; ++in)
      for (std::int64_t c = 0; c < co; ++c) {
        T* dst = y.data() + (in * co + c) * hw;
        const T bv = b->value.data()[c];
        for (std::int64_t q = 0; q < hw; ++q) dst[q] += bv;
      }
  }
  std::vector<Var<T>> parents = b ? std::vector<Var<T>>{x, w, b} : std::vector<Var<T>>{x, w};
  return make_result<T>(std::move(y), std::move(parents),
                        [x, w, b, stride, pad, k](const Tensor<T>& g) {
    if (x->requires_grad) {
      Tensor<T> dx = detail::conv2d_fwd(g, w->value, stride, pad);
      detail::accumulate(x, dx);
    }
    if (w->requires_grad) {
      Tensor<T> dw = detail::conv2d_bwd_weight(x->value, g, k, stride, pad);
      detail::accumulate(w, dw);
    }
    if (b && b->requires_grad) {
      b->ensure_grad();
      const std::int64_t n = g.extent(0), co = g.extent(1), hw = g.extent(2) * g.extent(3);
      for (std::int64_t in = 0; in < n; ++in)
        for (std::int64_t c = 0; c < co; ++c) {
          const T* src = g.data() + (in * co + c) * hw;
          T acc = T(0);
          for (std::int64_t q = 0; q < hw; ++q) acc += src[q];
          b->grad.data()[c] += acc;
        }
    }
  });
}

/// 2x2 average pooling, stride 2; spatial extents must be even.
template <typename T>
Var<T> avg_pool2(const Var<T>& x) {
  detail::require(x->value.ndim() == 4, "avg_pool2: want 4-d, got " + shape_str(x->value.shape()));
  const std::int64_t n = x->value.extent(0), c = x->value.extent(1);
  const std::int64_t h = x->value.extent(2), w = x->value.extent(3);
  detail::require(h % 2 == 0 && w % 2 == 0, "avg_pool2: odd spatial size " + shape_str(x->value.shape()));
  const std::int64_t ho = h / 2, wo = w / 2;
  Tensor<T> y({n, c, ho, wo});
  for (std::int64_t nc = 0; nc < n * c; ++nc) {
    const T* in = x->value.data() + nc * h * w;
    T* out = y.data() + nc * ho * wo;
    for (std::int64_t oy = 0; oy < ho; ++oy)
      for (std::int64_t ox = 0; ox < wo; ++ox)
        out[oy * wo + ox] = (in[(2 * oy) * w + 2 * ox] + in[(2 * oy) * w + 2 * ox + 1] +
                             in[(2 * oy + 1) * w + 2 * ox] + in[(2 * oy + 1) * w + 2 * ox + 1]) *
                            T(0.25);
  }
  return make_result<T>(std::move(y), {x}, [x, n, c, h, w, ho, wo](const Tensor<T>& g) {
    if (!x->requires_grad) return;
    x->ensure_grad();
    for (std::int64_t nc = 0; nc < n * c; ++nc) {
      T* dx = x->grad.data() + nc * h * w;
      const T* gg = g.data() + nc * ho * wo;
      for (std::int64_t oy = 0; oy < ho; ++oy)
        for (std::int64_t ox = 0; ox < wo; ++ox) {
          const T v = gg[oy * wo + ox] * T(0.25);
          dx[(2 * oy) * w + 2 * ox] += v;
          dx[(2 * oy) * w + 2 * ox + 1] += v;
          dx[(2 * oy + 1) * w + 2 * ox] += v;
          dx[(2 * oy + 1) * w + 2 * ox + 1] += v;
        }
    }
  });
}

/// Nearest-neighbour 2x upsampling.
template <typename T>
Var<T> upsample_nearest2(const Var<T>& x) {
  detail::require(x->value.ndim() == 4, "upsample_nearest2: want 4-d, got " + shape_str(x->value.shape()));
  const std::int64_t n = x->value.extent(0), c = x->value.extent(1);
  const std::int64_t h = x->value.extent(2), w = x->value.extent(3);
  Tensor<T> y({n, c, 2 * h, 2 * w});
  for (std::int64_t nc = 0; nc < n * c; ++nc) {
    const T* in = x->value.data() + nc * h * w;
    T* out = y.data() + nc * 4 * h * w;
    for (std::int64_t iy = 0; iy < h; ++iy)
      for (std::int64_t ix = 0; ix < w; ++ix) {
        const T v = in[iy * w + ix];
        out[(2 * iy) * 2 * w + 2 * ix] = v;
        out[(2 * iy) * 2 * w + 2 * ix + 1] = v;
        out[(2 * iy + 1) * 2 * w + 2 * ix] = v;
        out[(2 * iy + 1) * 2 * w + 2 * ix + 1] = v;
      }
  }
  return make_result<T>(std::move(y), {x}, [x, n, c, h, w](const Tensor<T>& g) {
    if (!x->requires_grad) return;
    x->ensure_grad();
    for (std::int64_t nc = 0; nc < n * c; ++nc) {
      T* dx = x->grad.data() + nc * h * w;
      const T* gg = g.data() + nc * 4 * h * w;
      for (std::int64_t iy = 0; iy < h; ++iy)
        for (std::int64_t ix = 0; ix < w; ++ix)
          dx[iy * w + ix] += gg[(2 * iy) * 2 * w + 2 * ix] + gg[(2 * iy) * 2 * w + 2 * ix + 1] +
                             gg[(2 * iy + 1) * 2 * w + 2 * ix] + gg[(2 * iy + 1) * 2 * w + 2 * ix + 1];
    }
  });
}

/// [N,C,H,W] -> [N,C], mean over the spatial grid.
template <typename T>
Var<T> global_avg_pool(const Var<T>& x) {
  detail::require(x->value.ndim() == 4, "global_avg_pool: want 4-d, got " + shape_str(x->value.shape()));
  const std::int64_t n = x->value.extent(0), c = x->value.extent(1);
  const std::int64_t hw = x->value.extent(2) * x->value.extent(3);
  Tensor<T> y({n, c});
  for (std::int64_t nc = 0; nc < n * c; ++nc) {
    const T* in = x->value.data() + nc * hw;
    T acc = T(0);
    for (std::int64_t q = 0; q < hw; ++q) acc += in[q];
    y.data()[nc] = acc / static_cast<T>(hw);
  }
  return make_result<T>(std::move(y), {x}, [x, n, c, hw](const Tensor<T>& g) {
    if (!x->requires_grad) return;
    x->ensure_grad();
    for (std::int64_t nc = 0; nc < n * c; ++nc) {
      const T v = g.data()[nc] / static_cast<T>(hw);
      T* dst = x->grad.data() + nc * hw;
      for (std::int64_t q = 0; q < hw; ++q) dst[q] += v;
    }
  });
}

// ---- normalization ---------------------------------------------------------

/// Batch norm over N,H,W per channel. Training mode normalizes with biased
/// batch variance and folds the unbiased variance into the running buffers;
/// eval mode normalizes with the running buffers (treated as constants).
/// Training requires more than one element per channel.
template <typename T>
Var<T> batch_norm2d(const Var<T>& x, const Var<T>& gamma, const Var<T>& beta,
                    Tensor<T>& running_mean, Tensor<T>& running_var,
                    bool training, T momentum = T(0.1), T eps = T(1e-5)) {
  detail::require(x->value.ndim() == 4, "batch_norm2d: want 4-d, got " + shape_str(x->value.shape()));
  const std::int64_t n = x->value.extent(0), c = x->value.extent(1);
  const std::int64_t hw = x->value.extent(2) * x->value.extent(3);
  detail::require(gamma->value.numel() == c && beta->value.numel() == c &&
                      running_mean.numel() == c && running_var.numel() == c,
                  "batch_norm2d: parameter size mismatch");
  const std::int64_t m = n * hw;

  Tensor<T> xhat(x->value.shape());
  Tensor<T> inv_std({c});
  Tensor<T> y(x->value.shape());

  if (training) {
    detail::require(m >= 2, "batch_norm2d: training needs >1 element per channel");
    for (std::int64_t ch = 0; ch < c; ++ch) {
      T mean = T(0);
      for (std::int64_t in = 0; in < n; ++in) {
        const T* p = x->value.data() + (in * c + ch) * hw;
        for (std::int64_t q = 0; q < hw; ++q) mean += p[q];
      }
      mean /= static_cast<T>(m);
      T var = T(0);
      for (std::int64_t in = 0; in < n; ++in) {
        const T* p = x->value.data() + (in * c + ch) * hw;
        for (std::int64_t q = 0; q < hw; ++q) {
          const T d = p[q] - mean;
          var += d * d;
        }
      }
      var /= static_cast<T>(m);
      const T istd = T(1) / std::sqrt(var + eps);
      inv_std.data()[ch] = istd;
      const T gm = gamma->value.data()[ch], bt = beta->value.data()[ch];
      for (std::int64_t in = 0; in < n; ++in) {
        const T* p = x->value.data() + (in * c + ch) * hw;
        T* xh = xhat.data() + (in * c + ch) * hw;
        T* yo = y.data() + (in * c + ch) * hw;
        for (std::int64_t q = 0; q < hw; ++q) {
          xh[q] = (p[q] - mean) * istd;
          yo[q] = gm * xh[q] + bt;
        }
      }
      const T unbiased = var * static_cast<T>(m) / static_cast<T>(m - 1);
      running_mean.data()[ch] = (T(1) - momentum) * running_mean.data()[ch] + momentum * mean;
      running_var.data()[ch] = (T(1) - momentum) * running_var.data()[ch] + momentum * unbiased;
    }
  } else {
    for (std::int64_t ch = 0; ch < c; ++ch) {
      const T mean = running_mean.data()[ch];
      const T istd = T(1) / std::sqrt(running_var.data()[ch] + eps);
      inv_std.data()[ch] = istd;
      const T gm = gamma->value.data()[ch], bt = beta->value.data()[ch];
      for (std::int64_t in = 0; in < n; ++in) {
        const T* p = x->value.data() + (in * c + ch) * hw;
        T* xh = xhat.data() + (in * c + ch) * hw;
        T* yo = y.data() + (in * c + ch) * hw;
        for (std::int64_t q = 0; q < hw; ++q) {
          xh[q] = (p[q] - mean) * istd;
          yo[q] = gm * xh[q] + bt;
        }
      }
    }
  }

  return make_result<T>(
      std::move(y), {x, gamma, beta},
      [x, gamma, beta, xhat = std::move(xhat), inv_std = std::move(inv_std), n, c, hw, m,
       training](const Tensor<T>& g) {
        for (std::int64_t ch = 0; ch < c; ++ch) {
          T sum_g = T(0), sum_gx = T(0);
          for (std::int64_t in = 0; in < n; ++in) {
            const T* gp = g.data() + (in * c + ch) * hw;
            const T* xh = xhat.data() + (in * c + ch) * hw;
            for (std::int64_t q = 0; q < hw; ++q) {
              sum_g += gp[q];
              sum_gx += gp[q] * xh[q];
            }
          }
          if (gamma->requires_grad) {
            gamma->ensure_grad();
            gamma->grad.data()[ch] += sum_gx;
          }
          if (beta->requires_grad) {
            beta->ensure_grad();
            beta->grad.data()[ch] += sum_g;
          }
          if (x->requires_grad) {
            x->ensure_grad();
            const T gm = gamma->value.data()[ch];
            const T istd = inv_std.data()[ch];
            for (std::int64_t in = 0; in < n; ++in) {
              const T* gp = g.data() + (in * c + ch) * hw;
              const T* xh = xhat.data() + (in * c + ch) * hw;
              T* dx = x->grad.data() + (in * c + ch) * hw;
              if (training) {
                // Batch statistics depend on x, so the mean/variance paths
                // feed back into every element of the channel.
                const T inv_m = T(1) / static_cast<T>(m);
                for (std::int64_t q = 0; q < hw; ++q)
                  dx[q] += gm * istd * (gp[q] - inv_m * sum_g - inv_m * xh[q] * sum_gx);
              } else {
                for (std::int64_t q = 0; q < hw; ++q) dx[q] += gm * istd * gp[q];
              }
            }
          }
        }
      });
}

/// Layer norm over the last axis with learned affine.
template <typename T>
Var<T> layer_norm(const Var<T>& x, const Var<T>& gamma, const Var<T>& beta, T eps = T(1e-5)) {
  detail::require(x->value.ndim() >= 1, "layer_norm: want rank >= 1");
  const std::int64_t d = x->value.extent(x->value.ndim() - 1);
  detail::require(gamma->value.numel() == d && beta->value.numel() == d,
                  "layer_norm: parameter size mismatch");
  const std::int64_t rows = x->value.numel() / d;
  Tensor<T> xhat(x->value.shape());
  Tensor<T> inv_std({rows});
  Tensor<T> y(x->value.shape());
  for (std::int64_t r = 0; r < rows; ++r) {
    const T* p = x->value.data() + r * d;
    T mean = T(0);
    for (std::int64_t j = 0; j < d; ++j) mean += p[j];
    mean /= static_cast<T>(d);
    T var = T(0);
    for (std::int64_t j = 0; j < d; ++j) {
      const T dv = p[j] - mean;
      var += dv * dv;
    }
    var /= static_cast<T>(d);
    const T istd = T(1) / std::sqrt(var + eps);
    inv_std.data()[r] = istd;
    T* xh = xhat.data() + r * d;
    T* yo = y.data() + r * d;
    for (std::int64_t j = 0; j < d; ++j) {
      xh[j] = (p[j] - mean) * istd;
      yo[j] = gamma->value.data()[j] * xh[j] + beta->value.data()[j];
    }
  }
  return make_result<T>(
      std::move(y), {x, gamma, beta},
      [x, gamma, beta, xhat = std::move(xhat), inv_std = std::move(inv_std), rows, d](const Tensor<T>& g) {
        for (std::int64_t r = 0; r < rows; ++r) {
          const T* gp = g.data() + r * d;
          const T* xh = xhat.data() + r * d;
          T sum_gh = T(0), sum_ghx = T(0);
          for (std::int64_t j = 0; j < d; ++j) {
            const T gh = gp[j] * gamma->value.data()[j];
            sum_gh += gh;
            sum_ghx += gh * xh[j];
          }
          if (gamma->requires_grad) {
            gamma->ensure_grad();
            for (std::int64_t j = 0; j < d; ++j) gamma->grad.data()[j] += gp[j] * xh[j];
          }
          if (beta->requires_grad) {
            beta->ensure_grad();
            for (std::int64_t j = 0; j < d; ++j) beta->grad.data()[j] += gp[j];
          }
          if (x->requires_grad) {
            x->ensure_grad();
            const T istd = inv_std.data()[r];
            const T inv_d = T(1) / static_cast<T>(d);
            T* dx = x->grad.data() + r * d;
            for (std::int64_t j = 0; j < d; ++j) {
              const T gh = gp[j] * gamma->value.data()[j];
              dx[j] += istd * (gh - inv_d * sum_gh - inv_d * xh[j] * sum_ghx);
            }
          }
        }
      });
}

/// Softmax over the last axis, computed with the rowwise max subtracted.
template <typename T>
Var<T> softmax_lastdim(const Var<T>& x) {
  const std::int64_t d = x->value.extent(x->value.ndim() - 1);
  const std::int64_t rows = x->value.numel() / d;
  Tensor<T> y(x->value.shape());
  for (std::int64_t r = 0; r < rows; ++r) {
    const T* p = x->value.data() + r * d;
    T* o = y.data() + r * d;
    T mx = p[0];
    for (std::int64_t j = 1; j < d; ++j) mx = p[j] > mx ? p[j] : mx;
    T sum = T(0);
    for (std::int64_t j = 0; j < d; ++j) {
      o[j] = std::exp(p[j] - mx);
      sum += o[j];
    }
    const T inv = T(1) / sum;
    for (std::int64_t j = 0; j < d; ++j) o[j] *= inv;
  }
  Tensor<T> saved(y);
  return make_result<T>(std::move(y), {x},
                        [x, saved = std::move(saved), rows, d](const Tensor<T>& g) {
    if (!x->requires_grad) return;
    x->ensure_grad();
    for (std::int64_t r = 0; r < rows; ++r) {
      const T* gp = g.data() + r * d;
      const T* yp = saved.data() + r * d;
      T dot = T(0);
      for (std::int64_t j = 0; j < d; ++j) dot += gp[j] * yp[j];
      T* dx = x->grad.data() + r * d;
      for (std::int64_t j = 0; j < d; ++j) dx[j] += yp[j] * (gp[j] - dot);
    }
  });
}

// ---- reductions and losses --------------------------------------------------

template <typename T>
Var<T> sum_all(const Var<T>& x) {
  T acc = T(0);
  const std::int64_t n = x->value.numel();
  for (std::int64_t i = 0; i < n; ++i) acc += x->value.data()[i];
  Tensor<T> y({1});
  y.data()[0] = acc;
  return make_result<T>(std::move(y), {x}, [x, n](const Tensor<T>& g) {
    if (!x->requires_grad) return;
    x->ensure_grad();
    const T v = g.data()[0];
    for (std::int64_t i = 0; i < n; ++i) x->grad.data()[i] += v;
  });
}

template <typename T>
Var<T> mean_all(const Var<T>& x) {
  const std::int64_t n = x->value.numel();
  T acc = T(0);
  for (std::int64_t i = 0; i < n; ++i) acc += x->value.data()[i];
  Tensor<T> y({1});
  y.data()[0] = acc / static_cast<T>(n);
  return make_result<T>(std::move(y), {x}, [x, n](const Tensor<T>& g) {
    if (!x->requires_grad) return;
    x->ensure_grad();
    const T v = g.data()[0] / static_cast<T>(n);
    for (std::int64_t i = 0; i < n; ++i) x->grad.data()[i] += v;
  });
}

/// Mean absolute error between two same-shape tensors; the subgradient at
/// zero is taken as zero.
template <typename T>
Var<T> l1_mean(const Var<T>& a, const Var<T>& b) {
  detail::require_same_shape(a, b, "l1_mean");
  const std::int64_t n = a->value.numel();
  T acc = T(0);
  for (std::int64_t i = 0; i < n; ++i) acc += std::abs(a->value.data()[i] - b->value.data()[i]);
  Tensor<T> y({1});
  y.data()[0] = acc / static_cast<T>(n);
  return make_result<T>(std::move(y), {a, b}, [a, b, n](const Tensor<T>& g) {
    const T v = g.data()[0] / static_cast<T>(n);
    for (std::int64_t i = 0; i < n; ++i) {
      const T d = a->value.data()[i] - b->value.data()[i];
      const T s = d > T(0) ? v : (d < T(0) ? -v : T(0));
      if (a->requires_grad) {
        a->ensure_grad();
        a->grad.data()[i] += s;
      }
      if (b->requires_grad) {
        b->ensure_grad();
        b->grad.data()[i] -= s;
      }
    }
  });
}

/// Numerically stable sigmoid cross-entropy against a constant target,
/// averaged over all elements:
///   max(x,0) - x*y + log(1 + exp(-|x|)).
template <typename T>
Var<T> bce_with_logits_mean(const Var<T>& logits, const Tensor<T>& target) {
  detail::require(logits->value.same_shape(target),
                  "bce_with_logits_mean: shape mismatch " + shape_str(logits->value.shape()) +
                      " vs " + shape_str(target.shape()));
  const std::int64_t n = logits->value.numel();
  T acc = T(0);
  for (std::int64_t i = 0; i < n; ++i) {
    const T x = logits->value.data()[i], y = target.data()[i];
    const T mx = x > T(0) ? x : T(0);
    acc += mx - x * y + std::log1p(std::exp(-std::abs(x)));
  }
  Tensor<T> out({1});
  out.data()[0] = acc / static_cast<T>(n);
  Tensor<T> tgt(target);
  return make_result<T>(std::move(out), {logits},
                        [logits, tgt = std::move(tgt), n](const Tensor<T>& g) {
    if (!logits->requires_grad) return;
    logits->ensure_grad();
    const T v = g.data()[0] / static_cast<T>(n);
    for (std::int64_t i = 0; i < n; ++i) {
      const T x = logits->value.data()[i];
      const T sig = T(1) / (T(1) + std::exp(-x));
      logits->grad.data()[i] += v * (sig - tgt.data()[i]);
    }
  });
}

/// Convenience overload: every element shares one scalar target.
template <typename T>
Var<T> bce_with_logits_mean(const Var<T>& logits, T target) {
  Tensor<T> t(logits->value.shape());
  t.fill(target);
  return bce_with_logits_mean(logits, t);
}

}  // namespace vitcolor
