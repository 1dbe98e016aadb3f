#include <algorithm>
#include <cmath>

#include "regmark/simd/dispatch.hpp"

namespace regmark::simd::scalar {

void compose_2d(const Field2d& outer, const Field2d& inner, std::span<double> out_x,
                std::span<double> out_y) {
  const int nx = outer.nx;
  const int ny = outer.ny;
  const double max_x = nx - 1;
  const double max_y = ny - 1;
  const int last_x = std::max(nx - 2, 0);
  const int last_y = std::max(ny - 2, 0);
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const std::size_t idx = static_cast<std::size_t>(j) * nx + i;
      const double bx = inner.ux[idx];
      const double by = inner.uy[idx];
      const double px = std::clamp(i + bx, 0.0, max_x);
      const double py = std::clamp(j + by, 0.0, max_y);
      const int x0 = std::min(static_cast<int>(std::floor(px)), last_x);
      const int y0 = std::min(static_cast<int>(std::floor(py)), last_y);
      const int x1 = std::min(x0 + 1, nx - 1);
      const int y1 = std::min(y0 + 1, ny - 1);
      const double fx = px - x0;
      const double fy = py - y0;
      const std::size_t i00 = static_cast<std::size_t>(y0) * nx + x0;
      const std::size_t i10 = static_cast<std::size_t>(y0) * nx + x1;
      const std::size_t i01 = static_cast<std::size_t>(y1) * nx + x0;
      const std::size_t i11 = static_cast<std::size_t>(y1) * nx + x1;
      const double w00 = (1.0 - fx) * (1.0 - fy);
      const double w10 = fx * (1.0 - fy);
      const double w01 = (1.0 - fx) * fy;
      const double w11 = fx * fy;
      out_x[idx] = bx + (w00 * outer.ux[i00] + w10 * outer.ux[i10] + w01 * outer.ux[i01] +
                         w11 * outer.ux[i11]);
      out_y[idx] = by + (w00 * outer.uy[i00] + w10 * outer.uy[i10] + w01 * outer.uy[i01] +
                         w11 * outer.uy[i11]);
    }
  }
}

}  // namespace regmark::simd::scalar
