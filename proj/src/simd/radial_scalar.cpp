#include <algorithm>
#include <cmath>

#include "regmark/simd/dispatch.hpp"

namespace regmark::simd::scalar {

void radial_bundle(const BundleParams& params, std::span<const double> dist,
                   std::span<double> out) {
  const std::size_t scales = params.inv_radii.size();
  for (std::size_t i = 0; i < dist.size(); ++i) {
    double acc = 0.0;
    for (std::size_t s = 0; s < scales; ++s) {
      const double r = dist[i] * params.inv_radii[s];
      double k = 0.0;
      switch (params.kind) {
        case BasisKind::Gaussian:
          k = std::exp(-r * r);
          break;
        case BasisKind::InverseQuadratic:
          k = 1.0 / (1.0 + r * r);
          break;
        case BasisKind::Wendland1: {
          const double t = std::max(1.0 - r, 0.0);
          const double t2 = t * t;
          k = (4.0 * r + 1.0) * (t2 * t2);
          break;
        }
      }
      acc += params.weights[s] * k;
    }
    out[i] = acc;
  }
}

}  // namespace regmark::simd::scalar
