#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "vitcolor/tensor.hpp"

namespace vitcolor {
namespace detail {

template <typename T>
using MatRM = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using MapM = Eigen::Map<MatRM<T>>;
template <typename T>
using CMapM = Eigen::Map<const MatRM<T>>;

inline std::int64_t conv_out_size(std::int64_t in, std::int64_t k, std::int64_t s, std::int64_t p) {
  const std::int64_t span = in + 2 * p - k;
  if (span < 0) throw std::invalid_argument("conv: kernel larger than padded input");
  return span / s + 1;
}

// Gathers one output row's receptive fields into a [Ci*k*k, Wo] column
// buffer. Out-of-bounds taps read as zero.
template <typename T>
void im2col_row(const T* x, std::int64_t ci, std::int64_t h, std::int64_t w,
                std::int64_t k, std::int64_t s, std::int64_t p,
                std::int64_t oy, std::int64_t wo, T* col) {
  for (std::int64_t c = 0; c < ci; ++c) {
    const T* plane = x + c * h * w;
    for (std::int64_t ky = 0; ky < k; ++ky) {
      const std::int64_t iy = oy * s - p + ky;
      for (std::int64_t kx = 0; kx < k; ++kx) {
        T* dst = col + ((c * k + ky) * k + kx) * wo;
        if (iy < 0 || iy >= h) {
          for (std::int64_t ox = 0; ox < wo; ++ox) dst[ox] = T(0);
          continue;
        }
        const T* src_row = plane + iy * w;
        for (std::int64_t ox = 0; ox < wo; ++ox) {
          const std::int64_t ix = ox * s - p + kx;
          dst[ox] = (ix >= 0 && ix < w) ? src_row[ix] : T(0);
        }
      }
    }
  }
}

// Scatter-adds a [Ci*k*k, Wo] column buffer back into the input plane; the
// adjoint of im2col_row.
template <typename T>
void col2im_row(const T* col, std::int64_t ci, std::int64_t h, std::int64_t w,
                std::int64_t k, std::int64_t s, std::int64_t p,
                std::int64_t oy, std::int64_t wo, T* x) {
  for (std::int64_t c = 0; c < ci; ++c) {
    T* plane = x + c * h * w;
    for (std::int64_t ky = 0; ky < k; ++ky) {
      const std::int64_t iy = oy * s - p + ky;
      if (iy < 0 || iy >= h) continue;
      T* dst_row = plane + iy * w;
      for (std::int64_t kx = 0; kx < k; ++kx) {
        const T* src = col + ((c * k + ky) * k + kx) * wo;
        for (std::int64_t ox = 0; ox < wo; ++ox) {
          const std::int64_t ix = ox * s - p + kx;
          if (ix >= 0 && ix < w) dst_row[ix] += src[ox];
        }
      }
    }
  }
}

/// y[n,co,oy,ox] = sum_{ci,ky,kx} x[n,ci,oy*s-p+ky,ox*s-p+kx] * w[co,ci,ky,kx]
template <typename T>
Tensor<T> conv2d_fwd(const Tensor<T>& x, const Tensor<T>& w,
                     std::int64_t s, std::int64_t p) {
  const std::int64_t n = x.extent(0), ci = x.extent(1), h = x.extent(2), wd = x.extent(3);
  const std::int64_t co = w.extent(0), k = w.extent(2);
  if (w.extent(1) != ci || w.extent(3) != k)
    throw std::invalid_argument("conv2d: weight " + shape_str(w.shape()) +
                                " does not match input " + shape_str(x.shape()));
  const std::int64_t ho = conv_out_size(h, k, s, p);
  const std::int64_t wo = conv_out_size(wd, k, s, p);
  Tensor<T> y({n, co, ho, wo});
  std::vector<T> col(static_cast<std::size_t>(ci * k * k * wo));
  CMapM<T> wm(w.data(), co, ci * k * k);
  for (std::int64_t in = 0; in < n; ++in) {
    const T* xin = x.data() + in * ci * h * wd;
    for (std::int64_t oy = 0; oy < ho; ++oy) {
      im2col_row(xin, ci, h, wd, k, s, p, oy, wo, col.data());
      CMapM<T> cm(col.data(), ci * k * k, wo);
      MapM<T> ym(y.data() + ((in * co) * ho + oy) * wo, co, wo);
      // Rows of y for this oy are strided by ho*wo, not contiguous; use a
      // stride-aware map.
      Eigen::Map<MatRM<T>, 0, Eigen::OuterStride<>> ys(
          y.data() + (in * co * ho + oy) * wo, co, wo,
          Eigen::OuterStride<>(static_cast<Eigen::Index>(ho * wo)));
      ys.noalias() = wm * cm;
    }
  }
  return y;
}

/// Adjoint of conv2d_fwd in its input argument.
template <typename T>
Tensor<T> conv2d_bwd_input(const Tensor<T>& dy, const Tensor<T>& w,
                           std::int64_t s, std::int64_t p,
                           std::int64_t h, std::int64_t wd) {
  const std::int64_t n = dy.extent(0), co = dy.extent(1);
  const std::int64_t ho = dy.extent(2), wo = dy.extent(3);
  const std::int64_t ci = w.extent(1), k = w.extent(2);
  Tensor<T> dx({n, ci, h, wd});
  std::vector<T> col(static_cast<std::size_t>(ci * k * k * wo));
  CMapM<T> wm(w.data(), co, ci * k * k);
  for (std::int64_t in = 0; in < n; ++in) {
    T* dxin = dx.data() + in * ci * h * wd;
    for (std::int64_t oy = 0; oy < ho; ++oy) {
      Eigen::Map<const MatRM<T>, 0, Eigen::OuterStride<>> dys(
          dy.data() + (in * co * ho + oy) * wo, co, wo,
          Eigen::OuterStride<>(static_cast<Eigen::Index>(ho * wo)));
      MapM<T> cm(col.data(), ci * k * k, wo);
      cm.noalias() = wm.transpose() * dys;
      col2im_row(col.data(), ci, h, wd, k, s, p, oy, wo, dxin);
    }
  }
  return dx;
}

/// Adjoint of conv2d_fwd in its weight argument.
template <typename T>
Tensor<T> conv2d_bwd_weight(const Tensor<T>& dy, const Tensor<T>& x,
                            std::int64_t k, std::int64_t s, std::int64_t p) {
  const std::int64_t n = x.extent(0), ci = x.extent(1), h = x.extent(2), wd = x.extent(3);
  const std::int64_t co = dy.extent(1), ho = dy.extent(2), wo = dy.extent(3);
  Tensor<T> dw({co, ci, k, k});
  std::vector<T> col(static_cast<std::size_t>(ci * k * k * wo));
  MapM<T> dwm(dw.data(), co, ci * k * k);
  for (std::int64_t in = 0; in < n; ++in) {
    const T* xin = x.data() + in * ci * h * wd;
    for (std::int64_t oy = 0; oy < ho; ++oy) {
      im2col_row(xin, ci, h, wd, k, s, p, oy, wo, col.data());
      CMapM<T> cm(col.data(), ci * k * k, wo);
      Eigen::Map<const MatRM<T>, 0, Eigen::OuterStride<>> dys(
          dy.data() + (in * co * ho + oy) * wo, co, wo,
          Eigen::OuterStride<>(static_cast<Eigen::Index>(ho * wo)));
      dwm.noalias() += dys * cm.transpose();
    }
  }
  return dw;
}

}  // namespace detail
}  // namespace vitcolor
