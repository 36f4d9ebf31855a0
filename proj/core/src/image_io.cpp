#include "vitcolor/image_io.hpp"

#include <cstdio>
#include <csetjmp>
#include <memory>
#include <vector>

#include <jpeglib.h>
#include <png.h>

namespace vitcolor {
namespace {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f != nullptr) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

// libjpeg reports errors through a callback that must not return; longjmp
// back into the caller, which owns all cleanup.
struct JpegErrorJump {
  jpeg_error_mgr mgr;
  std::jmp_buf env;
};

void jpeg_error_exit(j_common_ptr cinfo) {
  auto* jump = reinterpret_cast<JpegErrorJump*>(cinfo->err);
  std::longjmp(jump->env, 1);
}

RgbImage read_png(const std::string& path) {
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  if (png_image_begin_read_from_file(&image, path.c_str()) == 0) {
    std::string msg = image.message;
    png_image_free(&image);
    throw DecodeError("png decode failed for " + path + ": " + msg);
  }
  image.format = PNG_FORMAT_RGB;
  RgbImage out(image.height, image.width);
  if (png_image_finish_read(&image, nullptr, out.data.data(), 0, nullptr) == 0) {
    std::string msg = image.message;
    png_image_free(&image);
    throw DecodeError("png decode failed for " + path + ": " + msg);
  }
  return out;
}

RgbImage read_jpeg(const std::string& path) {
  FilePtr file(std::fopen(path.c_str(), "rb"));
  if (!file) throw DecodeError("cannot open " + path);

  jpeg_decompress_struct cinfo{};
  JpegErrorJump jump{};
  cinfo.err = jpeg_std_error(&jump.mgr);
  jump.mgr.error_exit = jpeg_error_exit;
  RgbImage out;
  if (setjmp(jump.env)) {
    jpeg_destroy_decompress(&cinfo);
    throw DecodeError("jpeg decode failed for " + path);
  }
  jpeg_create_decompress(&cinfo);
  jpeg_stdio_src(&cinfo, file.get());
  jpeg_read_header(&cinfo, TRUE);
  cinfo.out_color_space = JCS_RGB;
  jpeg_start_decompress(&cinfo);
  out = RgbImage(cinfo.output_height, cinfo.output_width);
  const std::size_t stride = static_cast<std::size_t>(out.width) * 3;
  while (cinfo.output_scanline < cinfo.output_height) {
    JSAMPROW row = out.data.data() + static_cast<std::size_t>(cinfo.output_scanline) * stride;
    jpeg_read_scanlines(&cinfo, &row, 1);
  }
  jpeg_finish_decompress(&cinfo);
  jpeg_destroy_decompress(&cinfo);
  return out;
}

}  // namespace

RgbImage read_image(const std::string& path) {
  unsigned char magic[8] = {0};
  {
    FilePtr file(std::fopen(path.c_str(), "rb"));
    if (!file) throw DecodeError("cannot open " + path);
    if (std::fread(magic, 1, sizeof magic, file.get()) < 3)
      throw DecodeError("file too short: " + path);
  }
  static const unsigned char png_sig[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
  if (std::equal(png_sig, png_sig + 8, magic)) return read_png(path);
  if (magic[0] == 0xff && magic[1] == 0xd8 && magic[2] == 0xff) return read_jpeg(path);
  throw DecodeError("unrecognized image signature: " + path);
}

void write_png(const std::string& path, const RgbImage& img) {
  if (!img.valid()) throw std::invalid_argument("write_png: invalid image");
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(img.width);
  image.height = static_cast<png_uint_32>(img.height);
  image.format = PNG_FORMAT_RGB;
  if (png_image_write_to_file(&image, path.c_str(), 0, img.data.data(), 0, nullptr) == 0) {
    std::string msg = image.message;
    png_image_free(&image);
    throw std::runtime_error("png encode failed for " + path + ": " + msg);
  }
}

void write_jpeg(const std::string& path, const RgbImage& img, int quality) {
  if (!img.valid()) throw std::invalid_argument("write_jpeg: invalid image");
  FilePtr file(std::fopen(path.c_str(), "wb"));
  if (!file) throw std::runtime_error("cannot open for write: " + path);

  jpeg_compress_struct cinfo{};
  JpegErrorJump jump{};
  cinfo.err = jpeg_std_error(&jump.mgr);
  jump.mgr.error_exit = jpeg_error_exit;
  if (setjmp(jump.env)) {
    jpeg_destroy_compress(&cinfo);
    throw std::runtime_error("jpeg encode failed for " + path);
  }
  jpeg_create_compress(&cinfo);
  jpeg_stdio_dest(&cinfo, file.get());
  cinfo.image_width = static_cast<JDIMENSION>(img.width);
  cinfo.image_height = static_cast<JDIMENSION>(img.height);
  cinfo.input_components = 3;
  cinfo.in_color_space = JCS_RGB;
  jpeg_set_defaults(&cinfo);
  jpeg_set_quality(&cinfo, quality, TRUE);
  jpeg_start_compress(&cinfo, TRUE);
  const std::size_t stride = static_cast<std::size_t>(img.width) * 3;
  std::vector<JSAMPLE> row(stride);
  while (cinfo.next_scanline < cinfo.image_height) {
    std::copy_n(img.data.data() + static_cast<std::size_t>(cinfo.next_scanline) * stride,
                stride, row.data());
    JSAMPROW rp = row.data();
    jpeg_write_scanlines(&cinfo, &rp, 1);
  }
  jpeg_finish_compress(&cinfo);
  jpeg_destroy_compress(&cinfo);
}

}  // namespace vitcolor
