#include "superf/png_io.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <memory>
#include <vector>

namespace superf {
namespace {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

[[noreturn]] void png_error_handler(png_structp, png_const_charp msg) {
  throw IoError(std::string("libpng: ") + msg);
}

void png_warning_handler(png_structp, png_const_charp) {}

}  // namespace

Image load_png(const std::filesystem::path& path) {
  FilePtr fp(std::fopen(path.c_str(), "rb"));
  if (!fp) throw IoError("cannot open " + path.string() + " for reading");

  png_byte header[8];
  if (std::fread(header, 1, 8, fp.get()) != 8 || png_sig_cmp(header, 0, 8) != 0) {
    throw IoError(path.string() + " is not a PNG file");
  }

  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr,
                                           png_error_handler, png_warning_handler);
  if (!png) throw IoError("png_create_read_struct failed");
  png_infop info = png_create_info_struct(png);
  struct ReadGuard {
    png_structp* png;
    png_infop* info;
    ~ReadGuard() { png_destroy_read_struct(png, info, nullptr); }
  } guard{&png, &info};
  if (!info) throw IoError("png_create_info_struct failed");

  png_init_io(png, fp.get());
  png_set_sig_bytes(png, 8);
  png_read_info(png, info);

  const int color_type = png_get_color_type(png, info);
  const int bit_depth = png_get_bit_depth(png, info);
  if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color_type == PNG_COLOR_TYPE_GRAY && bit_depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (color_type & PNG_COLOR_MASK_ALPHA) {
    throw IoError(path.string() + ": images with alpha are not supported");
  }
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_strip_alpha(png);
  if (bit_depth == 16) png_set_swap(png);  // little-endian uint16 in memory
  png_read_update_info(png, info);

  const int width = static_cast<int>(png_get_image_width(png, info));
  const int height = static_cast<int>(png_get_image_height(png, info));
  const int channels = png_get_channels(png, info);
  const int depth = png_get_bit_depth(png, info);
  if (channels != 1 && channels != 3) {
    throw IoError(path.string() + ": unsupported channel count " + std::to_string(channels));
  }

  const std::size_t rowbytes = png_get_rowbytes(png, info);
  std::vector<png_byte> buffer(rowbytes * height);
  std::vector<png_bytep> rows(height);
  for (int i = 0; i < height; ++i) rows[i] = buffer.data() + i * rowbytes;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);

  Image img(height, width, channels);
  auto& out = img.storage();
  const std::size_t n = out.size();
  if (depth == 16) {
    for (std::size_t k = 0; k < n; ++k) {
      std::uint16_t v;
      std::memcpy(&v, buffer.data() + 2 * k, 2);
      out[k] = v / 65535.0;
    }
  } else {
    for (std::size_t k = 0; k < n; ++k) out[k] = buffer[k] / 255.0;
  }
  return img;
}

void save_png(const Image& img, const std::filesystem::path& path, BitDepth depth) {
  if (img.channels() != 1 && img.channels() != 3) {
    throw IoError("save_png: unsupported channel count " + std::to_string(img.channels()));
  }
  FilePtr fp(std::fopen(path.c_str(), "wb"));
  if (!fp) throw IoError("cannot open " + path.string() + " for writing");

  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr,
                                            png_error_handler, png_warning_handler);
  if (!png) throw IoError("png_create_write_struct failed");
  png_infop info = png_create_info_struct(png);
  struct WriteGuard {
    png_structp* png;
    png_infop* info;
    ~WriteGuard() { png_destroy_write_struct(png, info); }
  } guard{&png, &info};
  if (!info) throw IoError("png_create_info_struct failed");

  png_init_io(png, fp.get());
  const int bits = static_cast<int>(depth);
  png_set_IHDR(png, info, img.width(), img.height(), bits,
               img.channels() == 3 ? PNG_COLOR_TYPE_RGB : PNG_COLOR_TYPE_GRAY,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  if (bits == 16) png_set_swap(png);

  const std::size_t n = img.size();
  const int bytes = bits / 8;
  std::vector<png_byte> buffer(n * bytes);
  const auto data = img.data();
  for (std::size_t k = 0; k < n; ++k) {
    const double v = std::clamp(data[k], 0.0, 1.0);
    if (bits == 16) {
      const auto q = static_cast<std::uint16_t>(std::lround(v * 65535.0));
      std::memcpy(buffer.data() + 2 * k, &q, 2);
    } else {
      buffer[k] = static_cast<png_byte>(std::lround(v * 255.0));
    }
  }
  const std::size_t rowbytes = static_cast<std::size_t>(img.width()) * img.channels() * bytes;
  for (int i = 0; i < img.height(); ++i) png_write_row(png, buffer.data() + i * rowbytes);
  png_write_end(png, nullptr);
}

}  // namespace superf
