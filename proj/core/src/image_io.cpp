#include "llafs/image_io.hpp"

#include <png.h>
#include <zlib.h>

#include <csetjmp>
#include <cstdio>
#include <fstream>
#include <iterator>

#include "llafs/error.hpp"

namespace llafs {

namespace {

void append_bytes(png_structp png, png_bytep data, png_size_t length) {
  auto* out = static_cast<std::vector<std::uint8_t>*>(png_get_io_ptr(png));
  out->insert(out->end(), data, data + length);
}

void flush_nothing(png_structp) {}

std::vector<std::uint8_t> encode(const std::uint8_t* pixels, int width, int height,
                                 int color_type, int channels) {
  std::vector<std::uint8_t> out;
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw Error(ErrorCode::kIo, "png encode: out of memory");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    throw Error(ErrorCode::kIo, "png encode: out of memory");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw Error(ErrorCode::kIo, "png encode failed");
  }
  png_set_write_fn(png, &out, append_bytes, flush_nothing);
  png_set_IHDR(png, info, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height), 8,
               color_type, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_set_filter(png, PNG_FILTER_TYPE_BASE, PNG_FILTER_SUB);
  png_set_compression_level(png, 1);
  png_set_compression_strategy(png, Z_HUFFMAN_ONLY);
  png_write_info(png, info);
  const auto stride = static_cast<std::size_t>(width) * static_cast<std::size_t>(channels);
  for (int y = 0; y < height; ++y) {
    png_write_row(png, pixels + static_cast<std::size_t>(y) * stride);
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  return out;
}

std::vector<std::uint8_t> decode(const std::vector<std::uint8_t>& bytes, png_uint_32 format,
                                 int& width, int& height) {
  png_image img{};
  img.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&img, bytes.data(), bytes.size())) {
    throw Error(ErrorCode::kIo, std::string("png decode: ") + img.message);
  }
  img.format = format;
  std::vector<std::uint8_t> buf(PNG_IMAGE_SIZE(img));
  if (!png_image_finish_read(&img, nullptr, buf.data(), 0, nullptr)) {
    png_image_free(&img);
    throw Error(ErrorCode::kIo, std::string("png decode: ") + img.message);
  }
  width = static_cast<int>(img.width);
  height = static_cast<int>(img.height);
  return buf;
}

}  // namespace

std::vector<std::uint8_t> encode_png(const RgbImage& image) {
  return encode(image.data().data(), image.width(), image.height(), PNG_COLOR_TYPE_RGB, 3);
}

std::vector<std::uint8_t> encode_png(const Mask& mask) {
  std::vector<std::uint8_t> gray(mask.bits().begin(), mask.bits().end());
  for (auto& g : gray) g = g ? 255 : 0;
  return encode(gray.data(), mask.width(), mask.height(), PNG_COLOR_TYPE_GRAY, 1);
}

RgbImage decode_rgb_png(const std::vector<std::uint8_t>& bytes) {
  int w = 0;
  int h = 0;
  const auto buf = decode(bytes, PNG_FORMAT_RGB, w, h);
  RgbImage img(w, h);
  std::copy(buf.begin(), buf.end(), img.data().begin());
  return img;
}

Mask decode_mask_png(const std::vector<std::uint8_t>& bytes) {
  int w = 0;
  int h = 0;
  const auto buf = decode(bytes, PNG_FORMAT_GRAY, w, h);
  Mask m(w, h);
  for (std::size_t i = 0; i < buf.size(); ++i) m.bits()[i] = buf[i] ? 1 : 0;
  return m;
}

RgbImage read_rgb_png(const std::filesystem::path& path) {
  return decode_rgb_png(read_file_bytes(path));
}

Mask read_mask_png(const std::filesystem::path& path) {
  return decode_mask_png(read_file_bytes(path));
}

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file_atomic(const std::filesystem::path& path, const void* data, std::size_t size) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::kIo, "cannot write " + tmp.string());
    out.write(static_cast<const char*>(data), static_cast<std::streamsize>(size));
    if (!out) throw Error(ErrorCode::kIo, "write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw Error(ErrorCode::kIo, "cannot move " + tmp.string() + " into place");
  }
}

}  // namespace llafs
