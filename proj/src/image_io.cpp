#include "regmark/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>
#include <sstream>

namespace regmark {
namespace {

bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};

void write_to_vector(png_structp png, png_bytep data, png_size_t length) {
  auto* out = static_cast<std::vector<std::uint8_t>*>(png_get_io_ptr(png));
  out->insert(out->end(), data, data + length);
}

void flush_noop(png_structp) {}

}  // namespace

std::vector<std::uint8_t> encode_png(const Raster8& raster) {
  if (raster.channels != 1 && raster.channels != 4) {
    throw ValidationError("invalid_image", "PNG export supports gray or RGBA rasters");
  }
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_write_struct(&png, &info);
    throw ValidationError("io_error", "libpng initialization failed");
  }
  std::vector<std::uint8_t> bytes;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw ValidationError("io_error", "PNG encoding failed");
  }
  png_set_write_fn(png, &bytes, write_to_vector, flush_noop);
  png_set_IHDR(png, info, static_cast<png_uint_32>(raster.width),
               static_cast<png_uint_32>(raster.height), 8,
               raster.channels == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGBA,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  const std::size_t stride = static_cast<std::size_t>(raster.width) * raster.channels;
  for (int row = 0; row < raster.height; ++row) {
    png_write_row(png, const_cast<png_bytep>(raster.pixels.data() + row * stride));
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  return bytes;
}

void write_png(const std::string& path, const Raster8& raster) {
  const auto bytes = encode_png(raster);
  std::ofstream out(path, std::ios::binary);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw ValidationError("io_error", "cannot write " + path);
}

Raster8 read_png(const std::string& path) {
  std::unique_ptr<std::FILE, FileCloser> file(std::fopen(path.c_str(), "rb"));
  if (!file) throw ValidationError("io_error", "cannot open " + path);
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw ValidationError("io_error", "libpng initialization failed");
  }
  Raster8 r;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw ValidationError("invalid_image", "cannot decode PNG " + path);
  }
  png_init_io(png, file.get());
  png_read_info(png, info);
  const auto color = png_get_color_type(png, info);
  if (png_get_bit_depth(png, info) == 16) png_set_strip_16(png);
  if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color == PNG_COLOR_TYPE_GRAY && png_get_bit_depth(png, info) < 8) {
    png_set_expand_gray_1_2_4_to_8(png);
  }
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
  const bool gray = color == PNG_COLOR_TYPE_GRAY || color == PNG_COLOR_TYPE_GRAY_ALPHA;
  if (gray) {
    png_set_strip_alpha(png);
  } else {
    png_set_filler(png, 0xff, PNG_FILLER_AFTER);
  }
  png_read_update_info(png, info);
  r.width = static_cast<int>(png_get_image_width(png, info));
  r.height = static_cast<int>(png_get_image_height(png, info));
  r.channels = gray ? 1 : 4;
  const std::size_t stride = png_get_rowbytes(png, info);
  r.pixels.resize(stride * static_cast<std::size_t>(r.height));
  std::vector<png_bytep> rows(static_cast<std::size_t>(r.height));
  for (int y = 0; y < r.height; ++y) rows[static_cast<std::size_t>(y)] = r.pixels.data() + y * stride;
  png_read_image(png, rows.data());
  png_destroy_read_struct(&png, &info, nullptr);
  return r;
}

Raster8 read_pgm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("io_error", "cannot open " + path);
  std::string magic;
  in >> magic;
  if (magic != "P5" && magic != "P2") throw ValidationError("invalid_image", path + " is not a PGM");
  auto next_int = [&]() {
    int v = 0;
    while (in >> std::ws && in.peek() == '#') {
      std::string comment;
      std::getline(in, comment);
    }
    in >> v;
    return v;
  };
  Raster8 r;
  r.width = next_int();
  r.height = next_int();
  const int maxval = next_int();
  if (r.width <= 0 || r.height <= 0 || maxval <= 0 || maxval > 255) {
    throw ValidationError("invalid_image", path + ": unsupported PGM header");
  }
  r.pixels.resize(static_cast<std::size_t>(r.width) * r.height);
  if (magic == "P5") {
    in.get();
    in.read(reinterpret_cast<char*>(r.pixels.data()), static_cast<std::streamsize>(r.pixels.size()));
  } else {
    for (auto& p : r.pixels) p = static_cast<std::uint8_t>(next_int());
  }
  if (!in) throw ValidationError("invalid_image", path + ": truncated PGM");
  return r;
}

ScalarImage read_image(const std::string& path) {
  if (ends_with(path, ".json")) return load_volume(path);
  Raster8 r;
  if (ends_with(path, ".png")) {
    r = read_png(path);
  } else if (ends_with(path, ".pgm")) {
    r = read_pgm(path);
  } else {
    throw ValidationError("invalid_image", "unsupported image format: " + path);
  }
  ScalarImage img;
  img.geometry = GridGeometry::pixels({r.width, r.height});
  img.values.resize(static_cast<std::size_t>(r.width) * r.height);
  for (std::size_t i = 0; i < img.values.size(); ++i) {
    if (r.channels == 1) {
      img.values[i] = r.pixels[i];
    } else {
      const auto* p = &r.pixels[i * 4];
      img.values[i] = 0.299 * p[0] + 0.587 * p[1] + 0.114 * p[2];
    }
  }
  return img;
}

Raster8 to_gray8(const ScalarImage& image, double lo, double hi) {
  if (image.geometry.dimension() != 2) {
    throw DimensionError("to_gray8: only 2-D images can be rasterized");
  }
  Raster8 r;
  r.width = image.geometry.shape[0];
  r.height = image.geometry.shape[1];
  r.channels = 1;
  r.pixels.resize(image.values.size());
  const double span = hi > lo ? hi - lo : 1.0;
  for (std::size_t i = 0; i < image.values.size(); ++i) {
    const double t = std::clamp((image.values[i] - lo) / span, 0.0, 1.0);
    r.pixels[i] = static_cast<std::uint8_t>(std::lround(255.0 * t));
  }
  return r;
}

}  // namespace regmark
