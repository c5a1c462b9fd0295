// Copyright (c) 2026, the cocodist authors. All rights reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef COCODIST_IMAGE_IO_HPP_
#define COCODIST_IMAGE_IO_HPP_

#include <jpeglib.h>
#include <png.h>

#include <csetjmp>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "cocodist/error.hpp"
#include "cocodist/image.hpp"

namespace cocodist {

namespace detail {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

inline FilePtr open_file(const std::filesystem::path& path, const char* mode) {
  FilePtr f(std::fopen(path.string().c_str(), mode));
  if (!f) throw IoError("cannot open " + path.string());
  return f;
}

// libjpeg error hook: records the message and longjmps back to the caller.
struct JpegErrorMgr {
  jpeg_error_mgr pub;
  std::jmp_buf setjmp_buffer;
  char message[JMSG_LENGTH_MAX];
};

inline void jpeg_error_exit(j_common_ptr cinfo) {
  auto* err = reinterpret_cast<JpegErrorMgr*>(cinfo->err);
  (*cinfo->err->format_message)(cinfo, err->message);
  std::longjmp(err->setjmp_buffer, 1);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// PNG
// ---------------------------------------------------------------------------

inline Image read_png(const std::filesystem::path& path) {
  detail::FilePtr file = detail::open_file(path, "rb");
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw IoError("png: allocation failure reading " + path.string());
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw IoError("png: allocation failure reading " + path.string());
  }

  Image img;
  std::vector<png_bytep> rows;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw IoError("png: failed to decode " + path.string());
  }
  png_init_io(png, file.get());
  png_read_info(png, info);

  png_set_expand(png);        // palette/low-bit-depth to 8-bit
  png_set_strip_16(png);
  png_set_strip_alpha(png);
  png_set_gray_to_rgb(png);
  png_read_update_info(png, info);
  if (png_get_channels(png, info) != 3 || png_get_bit_depth(png, info) != 8) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw IoError("png: unsupported sample layout in " + path.string());
  }

  img.width = static_cast<int>(png_get_image_width(png, info));
  img.height = static_cast<int>(png_get_image_height(png, info));
  img.data.resize(static_cast<std::size_t>(img.width) * img.height * kChannels);
  rows.resize(img.height);
  for (int y = 0; y < img.height; ++y) {
    rows[y] = img.data.data() + static_cast<std::size_t>(y) * img.width * kChannels;
  }
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return img;
}

inline void write_png(const std::filesystem::path& path, const Image& img) {
  detail::FilePtr file = detail::open_file(path, "wb");
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw IoError("png: allocation failure writing " + path.string());
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    throw IoError("png: allocation failure writing " + path.string());
  }
  std::vector<png_bytep> rows(img.height);
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw IoError("png: failed to encode " + path.string());
  }
  png_init_io(png, file.get());
  // Fixed settings keep output bytes stable across runs and thread counts.
  png_set_compression_level(png, 1);
  png_set_IHDR(png, info, img.width, img.height, 8, PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  for (int y = 0; y < img.height; ++y) {
    rows[y] = const_cast<png_bytep>(img.data.data() + static_cast<std::size_t>(y) * img.width * kChannels);
  }
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

// ---------------------------------------------------------------------------
// JPEG (baseline DCT via libjpeg)
// ---------------------------------------------------------------------------

inline std::vector<unsigned char> encode_jpeg(const Image& img, int quality) {
  if (quality < 1 || quality > 100) throw ParameterError("jpeg: quality must be in [1,100]");
  jpeg_compress_struct cinfo;
  detail::JpegErrorMgr err;
  cinfo.err = jpeg_std_error(&err.pub);
  err.pub.error_exit = detail::jpeg_error_exit;

  unsigned char* buffer = nullptr;
  unsigned long size = 0;
  if (setjmp(err.setjmp_buffer)) {
    jpeg_destroy_compress(&cinfo);
    if (buffer) std::free(buffer);
    throw IoError(std::string("jpeg: encode failed: ") + err.message);
  }
  jpeg_create_compress(&cinfo);
  jpeg_mem_dest(&cinfo, &buffer, &size);
  cinfo.image_width = static_cast<JDIMENSION>(img.width);
  cinfo.image_height = static_cast<JDIMENSION>(img.height);
  cinfo.input_components = kChannels;
  cinfo.in_color_space = JCS_RGB;
  jpeg_set_defaults(&cinfo);
  jpeg_set_quality(&cinfo, quality, TRUE /* force baseline tables */);
  jpeg_start_compress(&cinfo, TRUE);
  while (cinfo.next_scanline < cinfo.image_height) {
    JSAMPROW row = const_cast<JSAMPROW>(
        img.data.data() + static_cast<std::size_t>(cinfo.next_scanline) * img.width * kChannels);
    jpeg_write_scanlines(&cinfo, &row, 1);
  }
  jpeg_finish_compress(&cinfo);
  jpeg_destroy_compress(&cinfo);
  std::vector<unsigned char> out(buffer, buffer + size);
  std::free(buffer);
  return out;
}

inline Image decode_jpeg(const unsigned char* bytes, std::size_t size, const std::string& name) {
  jpeg_decompress_struct cinfo;
  detail::JpegErrorMgr err;
  cinfo.err = jpeg_std_error(&err.pub);
  err.pub.error_exit = detail::jpeg_error_exit;

  Image img;
  if (setjmp(err.setjmp_buffer)) {
    jpeg_destroy_decompress(&cinfo);
    throw IoError("jpeg: failed to decode " + name + ": " + err.message);
  }
  jpeg_create_decompress(&cinfo);
  jpeg_mem_src(&cinfo, bytes, static_cast<unsigned long>(size));
  jpeg_read_header(&cinfo, TRUE);
  cinfo.out_color_space = JCS_RGB;
  jpeg_start_decompress(&cinfo);
  img.width = static_cast<int>(cinfo.output_width);
  img.height = static_cast<int>(cinfo.output_height);
  img.data.resize(static_cast<std::size_t>(img.width) * img.height * kChannels);
  while (cinfo.output_scanline < cinfo.output_height) {
    JSAMPROW row = img.data.data() + static_cast<std::size_t>(cinfo.output_scanline) * img.width * kChannels;
    jpeg_read_scanlines(&cinfo, &row, 1);
  }
  jpeg_finish_decompress(&cinfo);
  jpeg_destroy_decompress(&cinfo);
  return img;
}

inline Image read_jpeg(const std::filesystem::path& path) {
  detail::FilePtr file = detail::open_file(path, "rb");
  std::fseek(file.get(), 0, SEEK_END);
  const long len = std::ftell(file.get());
  std::fseek(file.get(), 0, SEEK_SET);
  if (len < 0) throw IoError("cannot read " + path.string());
  std::vector<unsigned char> bytes(static_cast<std::size_t>(len));
  if (std::fread(bytes.data(), 1, bytes.size(), file.get()) != bytes.size()) {
    throw IoError("cannot read " + path.string());
  }
  return decode_jpeg(bytes.data(), bytes.size(), path.string());
}

inline void write_jpeg(const std::filesystem::path& path, const Image& img, int quality) {
  const std::vector<unsigned char> bytes = encode_jpeg(img, quality);
  detail::FilePtr file = detail::open_file(path, "wb");
  if (std::fwrite(bytes.data(), 1, bytes.size(), file.get()) != bytes.size()) {
    throw IoError("cannot write " + path.string());
  }
}

// Lossy round trip through the baseline codec; dimensions are unchanged.
inline Image jpeg_roundtrip(const Image& img, int quality) {
  const std::vector<unsigned char> bytes = encode_jpeg(img, quality);
  return decode_jpeg(bytes.data(), bytes.size(), "<memory>");
}

// Dispatch on content: PNG signature, then JPEG SOI, then file extension.
inline Image read_image(const std::filesystem::path& path) {
  unsigned char magic[8] = {0};
  {
    detail::FilePtr file = detail::open_file(path, "rb");
    if (std::fread(magic, 1, sizeof(magic), file.get()) < 2) {
      throw IoError("cannot read " + path.string());
    }
  }
  if (!png_sig_cmp(magic, 0, 8)) return read_png(path);
  if (magic[0] == 0xFF && magic[1] == 0xD8) return read_jpeg(path);
  throw IoError("unsupported image format: " + path.string());
}

}  // namespace cocodist

#endif  // COCODIST_IMAGE_IO_HPP_
