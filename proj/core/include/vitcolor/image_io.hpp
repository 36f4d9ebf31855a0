#pragma once

#include <stdexcept>
#include <string>

#include "vitcolor/colorspace.hpp"

namespace vitcolor {

/// Raised when a file cannot be decoded as PNG or JPEG. Callers that scan
/// directories catch this and skip the file; everything else propagates.
struct DecodeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Decodes a PNG or JPEG file (sniffed by signature) to 8-bit RGB.
RgbImage read_image(const std::string& path);

void write_png(const std::string& path, const RgbImage& img);
void write_jpeg(const std::string& path, const RgbImage& img, int quality = 95);

}  // namespace vitcolor
