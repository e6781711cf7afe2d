/* Copyright 2026 The Seedscan Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include "seedscan/image.hpp"

#include <png.h>
// jpeglib.h needs FILE and size_t declared first.
#include <algorithm>
#include <csetjmp>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

#include <jpeglib.h>

#include "seedscan/errors.hpp"

namespace seedscan {

Image::Image(std::size_t w, std::size_t h, Rgb fill) : width(w), height(h) {
  pixels.resize(w * h * 3);
  for (std::size_t i = 0; i < w * h; ++i) {
    pixels[3 * i] = fill.r;
    pixels[3 * i + 1] = fill.g;
    pixels[3 * i + 2] = fill.b;
  }
}

std::uint8_t luminance(Rgb c) noexcept {
  const double y = 0.299 * c.r + 0.587 * c.g + 0.114 * c.b;
  return static_cast<std::uint8_t>(y + 0.5);
}

namespace {

std::vector<std::uint8_t> read_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

Image decode_png(const std::vector<std::uint8_t>& bytes, const std::filesystem::path& path) {
  png_image png;
  std::memset(&png, 0, sizeof png);
  png.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&png, bytes.data(), bytes.size())) {
    throw IngestionError("cannot decode PNG '" + path.string() + "': " + png.message);
  }
  png.format = PNG_FORMAT_RGB;
  Image image(png.width, png.height);
  if (image.empty() ||
      !png_image_finish_read(&png, nullptr, image.pixels.data(), 0, nullptr)) {
    std::string message = png.message;
    png_image_free(&png);
    throw IngestionError("cannot decode PNG '" + path.string() + "': " + message);
  }
  return image;
}

struct JpegErrorManager {
  jpeg_error_mgr base;
  std::jmp_buf jump;
  char message[JMSG_LENGTH_MAX];
};

void jpeg_error_exit(j_common_ptr info) {
  auto* err = reinterpret_cast<JpegErrorManager*>(info->err);
  (*info->err->format_message)(info, err->message);
  std::longjmp(err->jump, 1);
}

// Returns false and fills `message` on failure. No C++ objects with
// destructors live between setjmp and the libjpeg calls.
bool decode_jpeg_raw(const std::uint8_t* data, std::size_t size, Image* out, char* message) {
  jpeg_decompress_struct cinfo;
  JpegErrorManager err;
  cinfo.err = jpeg_std_error(&err.base);
  err.base.error_exit = jpeg_error_exit;
  if (setjmp(err.jump)) {
    std::strncpy(message, err.message, JMSG_LENGTH_MAX);
    jpeg_destroy_decompress(&cinfo);
    return false;
  }
  jpeg_create_decompress(&cinfo);
  jpeg_mem_src(&cinfo, data, static_cast<unsigned long>(size));
  jpeg_read_header(&cinfo, TRUE);
  cinfo.out_color_space = JCS_RGB;
  jpeg_start_decompress(&cinfo);
  out->width = cinfo.output_width;
  out->height = cinfo.output_height;
  out->pixels.resize(out->width * out->height * 3);
  while (cinfo.output_scanline < cinfo.output_height) {
    JSAMPROW row = out->pixels.data() + cinfo.output_scanline * out->width * 3;
    jpeg_read_scanlines(&cinfo, &row, 1);
  }
  jpeg_finish_decompress(&cinfo);
  jpeg_destroy_decompress(&cinfo);
  return true;
}

bool encode_jpeg_raw(const Image& image, int quality, unsigned char** buffer,
                     unsigned long* size, char* message) {
  jpeg_compress_struct cinfo;
  JpegErrorManager err;
  cinfo.err = jpeg_std_error(&err.base);
  err.base.error_exit = jpeg_error_exit;
  if (setjmp(err.jump)) {
    std::strncpy(message, err.message, JMSG_LENGTH_MAX);
    jpeg_destroy_compress(&cinfo);
    return false;
  }
  jpeg_create_compress(&cinfo);
  jpeg_mem_dest(&cinfo, buffer, size);
  cinfo.image_width = static_cast<JDIMENSION>(image.width);
  cinfo.image_height = static_cast<JDIMENSION>(image.height);
  cinfo.input_components = 3;
  cinfo.in_color_space = JCS_RGB;
  jpeg_set_defaults(&cinfo);
  jpeg_set_quality(&cinfo, quality, TRUE);
  jpeg_start_compress(&cinfo, TRUE);
  while (cinfo.next_scanline < cinfo.image_height) {
    auto* row = const_cast<JSAMPROW>(image.pixels.data() +
                                     cinfo.next_scanline * image.width * 3);
    jpeg_write_scanlines(&cinfo, &row, 1);
  }
  jpeg_finish_compress(&cinfo);
  jpeg_destroy_compress(&cinfo);
  return true;
}

void write_bytes(const std::filesystem::path& path, const void* data, std::size_t size) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out.write(static_cast<const char*>(data), static_cast<std::streamsize>(size));
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

}  // namespace

Image read_image(const std::filesystem::path& path) {
  const std::vector<std::uint8_t> bytes = read_bytes(path);
  static const std::uint8_t kPngMagic[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
  if (bytes.size() >= 8 && std::memcmp(bytes.data(), kPngMagic, 8) == 0) {
    return decode_png(bytes, path);
  }
  if (bytes.size() >= 3 && bytes[0] == 0xff && bytes[1] == 0xd8 && bytes[2] == 0xff) {
    Image image;
    char message[JMSG_LENGTH_MAX] = {};
    if (!decode_jpeg_raw(bytes.data(), bytes.size(), &image, message) || image.empty()) {
      throw IngestionError("cannot decode JPEG '" + path.string() + "': " + message);
    }
    return image;
  }
  throw IngestionError("'" + path.string() + "' is neither PNG nor JPEG");
}

void write_png(const Image& image, const std::filesystem::path& path) {
  if (image.empty()) throw ValidationError("cannot write an empty image");
  png_image png;
  std::memset(&png, 0, sizeof png);
  png.version = PNG_IMAGE_VERSION;
  png.width = static_cast<png_uint_32>(image.width);
  png.height = static_cast<png_uint_32>(image.height);
  png.format = PNG_FORMAT_RGB;
  png_alloc_size_t size = 0;
  if (!png_image_write_get_memory_size(png, size, 0, image.pixels.data(), 0, nullptr)) {
    throw IoError("cannot encode PNG for '" + path.string() + "': " + png.message);
  }
  std::vector<std::uint8_t> buffer(size);
  if (!png_image_write_to_memory(&png, buffer.data(), &size, 0, image.pixels.data(), 0,
                                 nullptr)) {
    throw IoError("cannot encode PNG for '" + path.string() + "': " + png.message);
  }
  write_bytes(path, buffer.data(), size);
}

void write_jpeg(const Image& image, const std::filesystem::path& path, int quality) {
  if (image.empty()) throw ValidationError("cannot write an empty image");
  unsigned char* buffer = nullptr;
  unsigned long size = 0;
  char message[JMSG_LENGTH_MAX] = {};
  const bool ok = encode_jpeg_raw(image, quality, &buffer, &size, message);
  if (!ok) {
    std::free(buffer);
    throw IoError("cannot encode JPEG for '" + path.string() + "': " + message);
  }
  try {
    write_bytes(path, buffer, size);
  } catch (...) {
    std::free(buffer);
    throw;
  }
  std::free(buffer);
}

Image crop(const Image& image, std::size_t x, std::size_t y, std::size_t w, std::size_t h) {
  if (w == 0 || h == 0 || x + w > image.width || y + h > image.height) {
    throw ValidationError("crop rectangle outside image");
  }
  Image out(w, h);
  for (std::size_t row = 0; row < h; ++row) {
    const std::uint8_t* src = &image.pixels[((y + row) * image.width + x) * 3];
    std::memcpy(&out.pixels[row * w * 3], src, w * 3);
  }
  return out;
}

}  // namespace seedscan

namespace seedscan {

double iou(const BoundingBox& a, const BoundingBox& b) noexcept {
  const std::size_t x0 = std::max(a.x, b.x), y0 = std::max(a.y, b.y);
  const std::size_t x1 = std::min(a.x + a.width, b.x + b.width);
  const std::size_t y1 = std::min(a.y + a.height, b.y + b.height);
  const std::size_t inter = (x1 > x0 && y1 > y0) ? (x1 - x0) * (y1 - y0) : 0;
  const std::size_t uni = a.area() + b.area() - inter;
  return uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

}  // namespace seedscan
