#include "regmark/maps.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>

#include "regmark/parallel.hpp"
#include "regmark/stats.hpp"

namespace regmark {

int default_map_stride(int dimension) { return dimension >= 3 ? 4 : 2; }

double error_score(const Vec& phi_hat_x, const PosteriorGaussian& posterior) {
  const int d = static_cast<int>(posterior.mean.size());
  require_dimension(phi_hat_x, d, "error_score");
  Eigen::SelfAdjointEigenSolver<Mat> eig(symmetrized(posterior.cov));
  const Vec dev = phi_hat_x - posterior.mean;
  const double scale = std::max(1.0, eig.eigenvalues().cwiseAbs().maxCoeff());
  const double tiny = 1e-14 * scale;
  double m2 = 0.0;
  for (int i = 0; i < d; ++i) {
    const double proj = eig.eigenvectors().col(i).dot(dev);
    const double var = eig.eigenvalues()[i];
    if (var <= tiny) {
      if (std::abs(proj) > 1e-12 * std::max(1.0, dev.norm())) return 1.0;
      continue;
    }
    m2 += proj * proj / var;
  }
  return std::clamp(chi2_cdf(m2, d), 0.0, 1.0);
}

ScalarImage error_heat_map(const PointMap& phi_hat, const GpSession& session,
                           const GridGeometry& geometry) {
  geometry.validate();
  if (geometry.dimension() != session.dimension()) throw DimensionError("map grid dimension");
  ScalarImage out{geometry, std::vector<double>(geometry.node_count())};
  parallel_for(out.values.size(), [&](std::size_t f) {
    const Vec x = geometry.node(f);
    out.values[f] = error_score(phi_hat(x), session.posterior_at(x));
  });
  return out;
}

ScalarImage entropy_map(const GpSession& session, const GridGeometry& geometry) {
  geometry.validate();
  if (geometry.dimension() != session.dimension()) throw DimensionError("map grid dimension");
  const double c = gaussian_entropy_constant(session.dimension());
  ScalarImage out{geometry, std::vector<double>(geometry.node_count())};
  parallel_for(out.values.size(), [&](std::size_t f) {
    out.values[f] = c + session.log_det_conditional(geometry.node(f));
  });
  return out;
}

std::vector<double> blend_alpha(const ScalarImage& entropy, const BlendPolicy& policy) {
  const double lo = policy.entropy_low.value_or(entropy.min());
  const double hi = policy.entropy_high.value_or(entropy.max());
  std::vector<double> alpha(entropy.values.size(), 1.0);
  if (!(hi > lo)) return alpha;
  for (std::size_t i = 0; i < alpha.size(); ++i) {
    alpha[i] = 1.0 - std::clamp((entropy.values[i] - lo) / (hi - lo), 0.0, 1.0);
  }
  return alpha;
}

std::array<std::uint8_t, 3> error_color(double value) {
  // Dark blue -> cyan -> yellow -> red.
  static constexpr double stops[4][3] = {
      {0.05, 0.05, 0.35}, {0.0, 0.75, 0.85}, {1.0, 0.9, 0.1}, {0.85, 0.05, 0.05}};
  const double t = std::clamp(value, 0.0, 1.0) * 3.0;
  const int i = std::min(2, static_cast<int>(t));
  const double f = t - i;
  std::array<std::uint8_t, 3> rgb{};
  for (int c = 0; c < 3; ++c) {
    const double v = stops[i][c] + f * (stops[i + 1][c] - stops[i][c]);
    rgb[static_cast<std::size_t>(c)] = static_cast<std::uint8_t>(std::lround(255.0 * v));
  }
  return rgb;
}

namespace {

void require_2d(const ScalarImage& m, const char* what) {
  if (m.geometry.dimension() != 2) throw DimensionError(std::string(what) + ": 2-D maps only");
}

}  // namespace

Raster8 render_error_map(const ScalarImage& error) {
  require_2d(error, "render_error_map");
  Raster8 r{error.geometry.shape[0], error.geometry.shape[1], 4, {}};
  r.pixels.resize(error.values.size() * 4);
  for (std::size_t i = 0; i < error.values.size(); ++i) {
    const auto c = error_color(error.values[i]);
    r.pixels[4 * i] = c[0];
    r.pixels[4 * i + 1] = c[1];
    r.pixels[4 * i + 2] = c[2];
    r.pixels[4 * i + 3] = 255;
  }
  return r;
}

Raster8 blended_map(const ScalarImage& error, const ScalarImage& entropy,
                    const ScalarImage* fixed, const BlendPolicy& policy) {
  require_2d(error, "blended_map");
  if (!(error.geometry == entropy.geometry)) {
    throw ValidationError("grid_mismatch", "error and entropy maps use different grids");
  }
  const auto alpha = blend_alpha(entropy, policy);
  std::vector<double> base;
  if (fixed != nullptr) {
    const ScalarImage g = resample(*fixed, error.geometry);
    const double lo = fixed->min();
    const double hi = fixed->max();
    base.resize(g.values.size(), 0.0);
    if (hi > lo) {
      for (std::size_t i = 0; i < base.size(); ++i) base[i] = 255.0 * (g.values[i] - lo) / (hi - lo);
    }
  }
  Raster8 r = render_error_map(error);
  for (std::size_t i = 0; i < alpha.size(); ++i) {
    const double a = alpha[i];
    if (fixed != nullptr) {
      for (int c = 0; c < 3; ++c) {
        auto& px = r.pixels[4 * i + static_cast<std::size_t>(c)];
        px = static_cast<std::uint8_t>(std::lround(a * px + (1.0 - a) * base[i]));
      }
    }
    r.pixels[4 * i + 3] = static_cast<std::uint8_t>(std::lround(255.0 * a));
  }
  return r;
}

ScalarImage resample(const ScalarImage& map, const GridGeometry& geometry) {
  if (geometry.dimension() != map.geometry.dimension()) throw DimensionError("resample dimension");
  if (geometry == map.geometry) return map;
  ScalarImage out{geometry, std::vector<double>(geometry.node_count())};
  for (std::size_t f = 0; f < out.values.size(); ++f) out.values[f] = map.sample(geometry.node(f));
  return out;
}

void export_map(const std::string& base, const ScalarImage& map) {
  save_volume(base, map);
  const double lo = map.min();
  const double hi = map.max();
  nlohmann::json header;
  std::ifstream(base + ".json") >> header;
  header["value_min"] = lo;
  header["value_max"] = hi;
  if (map.geometry.dimension() == 2) {
    write_png(base + ".png", to_gray8(map, lo, hi));
    header["image"] = std::filesystem::path(base + ".png").filename().string();
  }
  std::ofstream(base + ".json") << header.dump(2) << '\n';
}

ScalarImage import_map(const std::string& header_path) { return load_volume(header_path); }

}  // namespace regmark
