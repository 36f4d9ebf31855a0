#include "vitcolor/colorspace.hpp"

#include <cmath>
#include <stdexcept>

namespace vitcolor {
namespace {

// Linear-light sRGB -> XYZ under D65. The reference white is taken as the
// image of (1,1,1), i.e. the row sums, so neutral inputs map to a=b=0
// exactly and the round trip is limited only by floating-point error.
constexpr double kFwd[3][3] = {
    {0.4124564, 0.3575761, 0.1804375},
    {0.2126729, 0.7151522, 0.0721750},
    {0.0193339, 0.1191920, 0.9503041},
};

struct Matrices {
  double inv[3][3];
  double white[3];
};

Matrices build_matrices() {
  Matrices m{};
  for (int i = 0; i < 3; ++i) m.white[i] = kFwd[i][0] + kFwd[i][1] + kFwd[i][2];
  const double a = kFwd[0][0], b = kFwd[0][1], c = kFwd[0][2];
  const double d = kFwd[1][0], e = kFwd[1][1], f = kFwd[1][2];
  const double g = kFwd[2][0], h = kFwd[2][1], i = kFwd[2][2];
  const double det = a * (e * i - f * h) - b * (d * i - f * g) + c * (d * h - e * g);
  m.inv[0][0] = (e * i - f * h) / det;
  m.inv[0][1] = (c * h - b * i) / det;
  m.inv[0][2] = (b * f - c * e) / det;
  m.inv[1][0] = (f * g - d * i) / det;
  m.inv[1][1] = (a * i - c * g) / det;
  m.inv[1][2] = (c * d - a * f) / det;
  m.inv[2][0] = (d * h - e * g) / det;
  m.inv[2][1] = (b * g - a * h) / det;
  m.inv[2][2] = (a * e - b * d) / det;
  return m;
}

const Matrices& mats() {
  static const Matrices m = build_matrices();
  return m;
}

double srgb_decode(double c) {
  return c <= 0.04045 ? c / 12.92 : std::pow((c + 0.055) / 1.055, 2.4);
}

// Defined for all finite inputs: below the linear knee (including negatives)
// the linear segment applies, so out-of-gamut values stay finite and keep
// their sign instead of producing NaN.
double srgb_encode(double c) {
  return c <= 0.0031308 ? 12.92 * c : 1.055 * std::pow(c, 1.0 / 2.4) - 0.055;
}

constexpr double kDelta = 6.0 / 29.0;

double lab_f(double t) {
  return t > kDelta * kDelta * kDelta ? std::cbrt(t)
                                      : t / (3.0 * kDelta * kDelta) + 4.0 / 29.0;
}

double lab_f_inv(double y) {
  return y > kDelta ? y * y * y : 3.0 * kDelta * kDelta * (y - 4.0 / 29.0);
}

}  // namespace

void srgb_to_lab_pixel(std::uint8_t r, std::uint8_t g, std::uint8_t b,
                       double& L, double& a, double& b_out) {
  const double lin[3] = {
      srgb_decode(r / 255.0),
      srgb_decode(g / 255.0),
      srgb_decode(b / 255.0),
  };
  const Matrices& m = mats();
  double f[3];
  for (int i = 0; i < 3; ++i) {
    const double t = kFwd[i][0] * lin[0] + kFwd[i][1] * lin[1] + kFwd[i][2] * lin[2];
    f[i] = lab_f(t / m.white[i]);
  }
  L = 116.0 * f[1] - 16.0;
  if (L < 0.0) L = 0.0;
  if (L > 100.0) L = 100.0;
  a = 500.0 * (f[0] - f[1]);
  b_out = 200.0 * (f[1] - f[2]);
}

void lab_to_srgb_pixel(double L, double a, double b,
                       std::uint8_t& r, std::uint8_t& g, std::uint8_t& b_out,
                       bool* out_of_gamut) {
  const double fy = (L + 16.0) / 116.0;
  const double fx = fy + a / 500.0;
  const double fz = fy - b / 200.0;
  const Matrices& m = mats();
  const double xyz[3] = {
      lab_f_inv(fx) * m.white[0],
      lab_f_inv(fy) * m.white[1],
      lab_f_inv(fz) * m.white[2],
  };
  bool oog = false;
  std::uint8_t* out[3] = {&r, &g, &b_out};
  for (int i = 0; i < 3; ++i) {
    const double lin = m.inv[i][0] * xyz[0] + m.inv[i][1] * xyz[1] + m.inv[i][2] * xyz[2];
    const long v = std::lround(srgb_encode(lin) * 255.0);
    if (v < 0 || v > 255) oog = true;
    *out[i] = static_cast<std::uint8_t>(v < 0 ? 0 : (v > 255 ? 255 : v));
  }
  if (out_of_gamut != nullptr) *out_of_gamut = oog;
}

LabImage srgb_to_lab(const RgbImage& img) {
  if (!img.valid()) throw std::invalid_argument("srgb_to_lab: invalid image");
  LabImage lab(img.height, img.width);
  const std::int64_t n = img.pixel_count();
  for (std::int64_t i = 0; i < n; ++i) {
    double L, a, b;
    srgb_to_lab_pixel(img.data[static_cast<std::size_t>(3 * i)],
                      img.data[static_cast<std::size_t>(3 * i + 1)],
                      img.data[static_cast<std::size_t>(3 * i + 2)], L, a, b);
    lab.L[static_cast<std::size_t>(i)] = static_cast<float>(L);
    lab.a[static_cast<std::size_t>(i)] = static_cast<float>(a);
    lab.b[static_cast<std::size_t>(i)] = static_cast<float>(b);
  }
  return lab;
}

RgbImage lab_to_srgb(const LabImage& img, OutOfGamutCount* oog) {
  if (img.height <= 0 || img.width <= 0)
    throw std::invalid_argument("lab_to_srgb: invalid image");
  RgbImage rgb(img.height, img.width);
  std::int64_t oog_pixels = 0;
  const std::int64_t n = img.pixel_count();
  for (std::int64_t i = 0; i < n; ++i) {
    std::uint8_t r, g, b;
    bool flag = false;
    lab_to_srgb_pixel(img.L[static_cast<std::size_t>(i)],
                      img.a[static_cast<std::size_t>(i)],
                      img.b[static_cast<std::size_t>(i)], r, g, b, &flag);
    rgb.data[static_cast<std::size_t>(3 * i)] = r;
    rgb.data[static_cast<std::size_t>(3 * i + 1)] = g;
    rgb.data[static_cast<std::size_t>(3 * i + 2)] = b;
    if (flag) ++oog_pixels;
  }
  if (oog != nullptr) oog->pixels = oog_pixels;
  return rgb;
}

NormalizedImage normalize_for_generator(const LabImage& img) {
  NormalizedImage out;
  const std::int64_t h = img.height, w = img.width;
  out.L = Tensor<float>({1, h, w});
  out.ab = Tensor<float>({2, h, w});
  const std::int64_t n = h * w;
  float* lp = out.L.data();
  float* ap = out.ab.data();
  float* bp = out.ab.data() + n;
  for (std::int64_t i = 0; i < n; ++i) {
    lp[i] = img.L[static_cast<std::size_t>(i)] / 50.f - 1.f;
    ap[i] = img.a[static_cast<std::size_t>(i)] / 128.f;
    bp[i] = img.b[static_cast<std::size_t>(i)] / 128.f;
  }
  return out;
}

void denormalize_ab(const Tensor<float>& ab, LabImage& target) {
  if (ab.ndim() != 3 || ab.extent(0) != 2 ||
      ab.extent(1) != target.height || ab.extent(2) != target.width)
    throw std::invalid_argument("denormalize_ab: shape mismatch " + shape_str(ab.shape()));
  const std::int64_t n = target.pixel_count();
  const float* ap = ab.data();
  const float* bp = ab.data() + n;
  auto clamp1 = [](float v) { return v < -1.f ? -1.f : (v > 1.f ? 1.f : v); };
  for (std::int64_t i = 0; i < n; ++i) {
    target.a[static_cast<std::size_t>(i)] = clamp1(ap[i]) * 128.f;
    target.b[static_cast<std::size_t>(i)] = clamp1(bp[i]) * 128.f;
  }
}

void denormalize_l(const Tensor<float>& L, LabImage& target) {
  if (L.ndim() != 3 || L.extent(0) != 1 ||
      L.extent(1) != target.height || L.extent(2) != target.width)
    throw std::invalid_argument("denormalize_l: shape mismatch " + shape_str(L.shape()));
  const std::int64_t n = target.pixel_count();
  const float* lp = L.data();
  for (std::int64_t i = 0; i < n; ++i) {
    float v = (lp[i] + 1.f) * 50.f;
    target.L[static_cast<std::size_t>(i)] = v < 0.f ? 0.f : (v > 100.f ? 100.f : v);
  }
}

}  // namespace vitcolor
