#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>

#include "vitcolor/colorspace.hpp"
#include "vitcolor/tensor.hpp"

namespace vitcolor {

/// Bilinear sampling with half-pixel centers: source coordinate for output
/// index o is (o + 0.5) * in/out - 0.5, clamped to the valid range, so a 2x
/// downsample averages adjacent pairs exactly and edges replicate.
namespace detail {

struct SamplePoint {
  std::int64_t i0, i1;
  float w1;  // weight of i1; i0 gets 1 - w1
};

inline SamplePoint sample_point(std::int64_t o, std::int64_t out_size, std::int64_t in_size) {
  double s = (static_cast<double>(o) + 0.5) * static_cast<double>(in_size) /
                 static_cast<double>(out_size) -
             0.5;
  if (s < 0.0) s = 0.0;
  const double last = static_cast<double>(in_size - 1);
  if (s > last) s = last;
  SamplePoint p;
  p.i0 = static_cast<std::int64_t>(s);
  if (p.i0 > in_size - 2) p.i0 = in_size >= 2 ? in_size - 2 : 0;
  p.i1 = in_size >= 2 ? p.i0 + 1 : p.i0;
  p.w1 = static_cast<float>(s - static_cast<double>(p.i0));
  return p;
}

}  // namespace detail

inline RgbImage resize_bilinear(const RgbImage& src, std::int64_t oh, std::int64_t ow) {
  if (!src.valid()) throw std::invalid_argument("resize_bilinear: invalid image");
  if (oh <= 0 || ow <= 0) throw std::invalid_argument("resize_bilinear: bad target size");
  RgbImage dst(oh, ow);
  for (std::int64_t y = 0; y < oh; ++y) {
    const auto py = detail::sample_point(y, oh, src.height);
    for (std::int64_t x = 0; x < ow; ++x) {
      const auto px = detail::sample_point(x, ow, src.width);
      for (int c = 0; c < 3; ++c) {
        const float v00 = src.at(py.i0, px.i0, c), v01 = src.at(py.i0, px.i1, c);
        const float v10 = src.at(py.i1, px.i0, c), v11 = src.at(py.i1, px.i1, c);
        const float top = v00 + (v01 - v00) * px.w1;
        const float bot = v10 + (v11 - v10) * px.w1;
        const float v = top + (bot - top) * py.w1;
        dst.at(y, x, c) = static_cast<std::uint8_t>(std::lround(v));
      }
    }
  }
  return dst;
}

/// Same sampling for float planes; input and output are [C,H,W].
template <typename T>
Tensor<T> resize_bilinear_chw(const Tensor<T>& src, std::int64_t oh, std::int64_t ow) {
  if (src.ndim() != 3) throw std::invalid_argument("resize_bilinear_chw: want [C,H,W], got " + shape_str(src.shape()));
  if (oh <= 0 || ow <= 0) throw std::invalid_argument("resize_bilinear_chw: bad target size");
  const std::int64_t ch = src.extent(0), ih = src.extent(1), iw = src.extent(2);
  Tensor<T> dst({ch, oh, ow});
  for (std::int64_t c = 0; c < ch; ++c) {
    const T* in = src.data() + c * ih * iw;
    T* out = dst.data() + c * oh * ow;
    for (std::int64_t y = 0; y < oh; ++y) {
      const auto py = detail::sample_point(y, oh, ih);
      for (std::int64_t x = 0; x < ow; ++x) {
        const auto px = detail::sample_point(x, ow, iw);
        const T v00 = in[py.i0 * iw + px.i0], v01 = in[py.i0 * iw + px.i1];
        const T v10 = in[py.i1 * iw + px.i0], v11 = in[py.i1 * iw + px.i1];
        const T top = v00 + (v01 - v00) * static_cast<T>(px.w1);
        const T bot = v10 + (v11 - v10) * static_cast<T>(px.w1);
        out[y * ow + x] = top + (bot - top) * static_cast<T>(py.w1);
      }
    }
  }
  return dst;
}

}  // namespace vitcolor
