#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "regmark/grid.hpp"

namespace regmark {

/// 8-bit raster with 1 (gray) or 4 (RGBA) channels, row-major.
struct Raster8 {
  int width = 0;
  int height = 0;
  int channels = 1;
  std::vector<std::uint8_t> pixels;

  friend bool operator==(const Raster8&, const Raster8&) = default;
};

void write_png(const std::string& path, const Raster8& raster);
std::vector<std::uint8_t> encode_png(const Raster8& raster);
Raster8 read_png(const std::string& path);

/// Binary (P5) or ASCII (P2) graymap with maxval <= 255.
Raster8 read_pgm(const std::string& path);

/// Loads a 2-D image (.png / .pgm, converted to gray) or a 3-D volume
/// (.json header + raw) as a scalar image on its pixel lattice.
ScalarImage read_image(const std::string& path);

/// Gray raster of a 2-D scalar image linearly mapped from [lo, hi] to 0..255.
Raster8 to_gray8(const ScalarImage& image, double lo, double hi);

}  // namespace regmark
