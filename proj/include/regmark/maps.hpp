#pragma once

#include <optional>
#include <string>

#include "regmark/gp_session.hpp"
#include "regmark/grid.hpp"
#include "regmark/image_io.hpp"

namespace regmark {

/// Default map resolution: every 2 px in 2-D, every 4 voxels in 3-D.
int default_map_stride(int dimension);

/// chi^2(d) CDF of the squared Mahalanobis distance between phi_hat(x) and
/// the posterior. Directions with zero posterior variance count as infinitely
/// confident: any deviation along them gives 1.
double error_score(const Vec& phi_hat_x, const PosteriorGaussian& posterior);

/// error_score at every node of `geometry`; values in [0, 1].
ScalarImage error_heat_map(const PointMap& phi_hat, const GpSession& session,
                           const GridGeometry& geometry);

/// Pointwise posterior entropy d/2 log(2 pi e) + 1/2 log det k(x, x), nats.
ScalarImage entropy_map(const GpSession& session, const GridGeometry& geometry);

/// Entropy range mapped to alpha 1..0. Unset bounds use the map's min/max.
struct BlendPolicy {
  std::optional<double> entropy_low;
  std::optional<double> entropy_high;
};

/// Overlay alpha per node: 1 - normalized entropy (uniform maps give 1).
std::vector<double> blend_alpha(const ScalarImage& entropy, const BlendPolicy& policy = {});

/// RGB color for an error value in [0, 1].
std::array<std::uint8_t, 3> error_color(double value);

/// RGBA raster: RGB is the error colormap composited over the fixed image
/// (if given, resampled to the map grid) by the entropy alpha; the A channel
/// carries that alpha so clients can re-composite. 2-D maps only.
Raster8 blended_map(const ScalarImage& error, const ScalarImage& entropy,
                    const ScalarImage* fixed = nullptr, const BlendPolicy& policy = {});

/// Colormapped RGBA rendering of an error map (opaque).
Raster8 render_error_map(const ScalarImage& error);

/// Values of `map` sampled multilinearly at the nodes of `geometry`.
ScalarImage resample(const ScalarImage& map, const GridGeometry& geometry);

/// Writes <base>.json (geometry, value_min, value_max) + <base>.raw float32;
/// 2-D maps also get an 8-bit <base>.png scaled over [value_min, value_max].
void export_map(const std::string& base, const ScalarImage& map);
ScalarImage import_map(const std::string& header_path);

}  // namespace regmark
