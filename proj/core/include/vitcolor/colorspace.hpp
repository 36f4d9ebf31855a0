#pragma once

#include <cstdint>
#include <vector>

#include "vitcolor/tensor.hpp"

namespace vitcolor {

/// 8-bit sRGB raster, interleaved r,g,b per pixel.
struct RgbImage {
  std::int64_t height = 0;
  std::int64_t width = 0;
  std::vector<std::uint8_t> data;  // height * width * 3

  RgbImage() = default;
  RgbImage(std::int64_t h, std::int64_t w) : height(h), width(w), data(static_cast<std::size_t>(h * w * 3), 0) {}

  std::uint8_t& at(std::int64_t y, std::int64_t x, int c) {
    return data[static_cast<std::size_t>((y * width + x) * 3 + c)];
  }
  std::uint8_t at(std::int64_t y, std::int64_t x, int c) const {
    return data[static_cast<std::size_t>((y * width + x) * 3 + c)];
  }
  std::int64_t pixel_count() const { return height * width; }
  bool valid() const {
    return height > 0 && width > 0 &&
           data.size() == static_cast<std::size_t>(height * width * 3);
  }
};

/// CIE L*a*b* planes. L in [0,100], a and b in [-128,128].
struct LabImage {
  std::int64_t height = 0;
  std::int64_t width = 0;
  std::vector<float> L, a, b;  // height * width each, row-major

  LabImage() = default;
  LabImage(std::int64_t h, std::int64_t w)
      : height(h),
        width(w),
        L(static_cast<std::size_t>(h * w), 0.f),
        a(static_cast<std::size_t>(h * w), 0.f),
        b(static_cast<std::size_t>(h * w), 0.f) {}

  std::int64_t pixel_count() const { return height * width; }
};

/// Count of pixels whose Lab->sRGB conversion fell outside [0,255] on at
/// least one channel before clamping.
struct OutOfGamutCount {
  std::int64_t pixels = 0;
};

// Single-pixel conversions (D65 reference white, sRGB gamma). Exposed so
// tests can probe exact values without building images.
void srgb_to_lab_pixel(std::uint8_t r, std::uint8_t g, std::uint8_t b,
                       double& L, double& a, double& b_out);
void lab_to_srgb_pixel(double L, double a, double b,
                       std::uint8_t& r, std::uint8_t& g, std::uint8_t& b_out,
                       bool* out_of_gamut = nullptr);

LabImage srgb_to_lab(const RgbImage& img);
RgbImage lab_to_srgb(const LabImage& img, OutOfGamutCount* oog = nullptr);

/// Network-side views of one image: L in [-1,1] as [1,H,W], ab in [-1,1] as
/// [2,H,W] (a plane first, then b).
struct NormalizedImage {
  Tensor<float> L;
  Tensor<float> ab;
};

/// L' = L/50 - 1, a' = a/128, b' = b/128.
NormalizedImage normalize_for_generator(const LabImage& img);

/// Inverse of the ab normalization; inputs outside [-1,1] clamp before
/// scaling. `ab` is [2,H,W]; writes the a and b planes of `target`.
void denormalize_ab(const Tensor<float>& ab, LabImage& target);

/// Inverse of the L normalization, clamped to [0,100]. `L` is [1,H,W].
void denormalize_l(const Tensor<float>& L, LabImage& target);

}  // namespace vitcolor
