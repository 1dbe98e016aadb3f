#include <algorithm>
#include <cmath>
#include <numeric>

#include "regmark/suggestion.hpp"

namespace regmark {

namespace {

std::vector<double> gaussian_taps(double sigma, int radius) {
  std::vector<double> taps(static_cast<std::size_t>(2 * radius + 1));
  double sum = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    const double w = std::exp(-0.5 * i * i / (sigma * sigma));
    taps[static_cast<std::size_t>(i + radius)] = w;
    sum += w;
  }
  for (auto& w : taps) w /= sum;
  return taps;
}

std::vector<std::size_t> strides_of(const std::vector<int>& shape) {
  std::vector<std::size_t> s(shape.size(), 1);
  for (std::size_t a = 1; a < shape.size(); ++a) s[a] = s[a - 1] * static_cast<std::size_t>(shape[a - 1]);
  return s;
}

// One separable pass along `axis` with clamped borders.
void convolve_axis(std::vector<double>& data, const GridGeometry& g, int axis,
                   const std::vector<double>& taps) {
  const int radius = static_cast<int>(taps.size() / 2);
  const auto strides = strides_of(g.shape);
  const int n = g.shape[static_cast<std::size_t>(axis)];
  const std::size_t stride = strides[static_cast<std::size_t>(axis)];
  std::vector<double> line(static_cast<std::size_t>(n));
  const std::size_t total = g.node_count();
  for (std::size_t base = 0; base < total; ++base) {
    // Only start from nodes whose coordinate along `axis` is zero.
    if ((base / stride) % static_cast<std::size_t>(n) != 0) continue;
    for (int i = 0; i < n; ++i) line[static_cast<std::size_t>(i)] = data[base + static_cast<std::size_t>(i) * stride];
    for (int i = 0; i < n; ++i) {
      double acc = 0.0;
      for (int t = -radius; t <= radius; ++t) {
        const int j = std::clamp(i + t, 0, n - 1);
        acc += taps[static_cast<std::size_t>(t + radius)] * line[static_cast<std::size_t>(j)];
      }
      data[base + static_cast<std::size_t>(i) * stride] = acc;
    }
  }
}

int smoothing_radius(double sigma) { return std::max(1, static_cast<int>(std::ceil(3.0 * sigma))); }

}  // namespace

ScalarImage harris_response(const ScalarImage& image, double smoothing_sigma, double kappa) {
  const GridGeometry& g = image.geometry;
  g.validate();
  const int d = g.dimension();
  if (d != 2 && d != 3) throw DimensionError("harris: images must be 2-D or 3-D");
  if (!(smoothing_sigma > 0.0)) throw DomainError("harris: smoothing sigma must be positive");
  if (image.values.size() != g.node_count()) throw ValidationError("harris: value count mismatch");

  const std::size_t total = g.node_count();
  const auto strides = strides_of(g.shape);

  std::vector<std::vector<double>> grad(static_cast<std::size_t>(d), std::vector<double>(total));
  for (std::size_t f = 0; f < total; ++f) {
    const auto idx = g.unflatten(f);
    for (int a = 0; a < d; ++a) {
      const auto ua = static_cast<std::size_t>(a);
      const int i = idx[ua];
      const int lo = std::max(i - 1, 0);
      const int hi = std::min(i + 1, g.shape[ua] - 1);
      if (hi == lo) continue;
      const double vlo = image.values[f - static_cast<std::size_t>(i - lo) * strides[ua]];
      const double vhi = image.values[f + static_cast<std::size_t>(hi - i) * strides[ua]];
      grad[ua][f] = (vhi - vlo) / ((hi - lo) * g.spacing[a]);
    }
  }

  const auto taps = gaussian_taps(smoothing_sigma, smoothing_radius(smoothing_sigma));
  const int pairs = d * (d + 1) / 2;
  std::vector<std::vector<double>> tensor(static_cast<std::size_t>(pairs), std::vector<double>(total));
  int p = 0;
  for (int a = 0; a < d; ++a) {
    for (int b = a; b < d; ++b, ++p) {
      auto& t = tensor[static_cast<std::size_t>(p)];
      for (std::size_t f = 0; f < total; ++f) {
        t[f] = grad[static_cast<std::size_t>(a)][f] * grad[static_cast<std::size_t>(b)][f];
      }
      for (int axis = 0; axis < d; ++axis) convolve_axis(t, g, axis, taps);
    }
  }

  ScalarImage out{g, std::vector<double>(total)};
  Mat m(d, d);
  for (std::size_t f = 0; f < total; ++f) {
    p = 0;
    for (int a = 0; a < d; ++a) {
      for (int b = a; b < d; ++b, ++p) {
        m(a, b) = m(b, a) = tensor[static_cast<std::size_t>(p)][f];
      }
    }
    const double tr = m.trace();
    out.values[f] = m.determinant() - kappa * std::pow(tr, d);
  }
  return out;
}

CandidateSet detect_candidates(const ScalarImage& image, const HarrisOptions& options) {
  if (!(options.min_spacing >= 0.0)) throw DomainError("harris: min_spacing must be >= 0");
  const ScalarImage r = harris_response(image, options.smoothing_sigma,
                                         image.geometry.dimension() == 3 ? options.kappa_3d : options.kappa);
  const GridGeometry& g = r.geometry;
  const int d = g.dimension();
  const int margin = smoothing_radius(options.smoothing_sigma);

  const double peak = r.max();
  if (!(peak > 0.0)) return CandidateSet{};
  const double threshold = options.relative_threshold * peak;

  const auto strides = strides_of(g.shape);
  std::vector<std::size_t> maxima;
  for (std::size_t f = 0; f < r.values.size(); ++f) {
    const double v = r.values[f];
    if (!(v > threshold)) continue;
    const auto idx = g.unflatten(f);
    bool inside = true;
    for (int a = 0; a < d; ++a) {
      const auto ua = static_cast<std::size_t>(a);
      inside = inside && idx[ua] >= margin && idx[ua] < g.shape[ua] - margin;
    }
    if (!inside) continue;
    // 3^d neighbourhood; margin >= 1 keeps every neighbour in range.
    bool is_max = true;
    const int count = d == 2 ? 9 : 27;
    for (int c = 0; c < count && is_max; ++c) {
      long offset = 0;
      int rem = c;
      for (int a = 0; a < d; ++a) {
        offset += static_cast<long>(rem % 3 - 1) * static_cast<long>(strides[static_cast<std::size_t>(a)]);
        rem /= 3;
      }
      if (offset != 0 && r.values[static_cast<std::size_t>(static_cast<long>(f) + offset)] > v) {
        is_max = false;
      }
    }
    if (is_max) maxima.push_back(f);
  }

  std::stable_sort(maxima.begin(), maxima.end(),
                   [&](std::size_t a, std::size_t b) { return r.values[a] > r.values[b]; });

  PointList accepted;
  const double min_sq = options.min_spacing * options.min_spacing;
  for (std::size_t f : maxima) {
    if (accepted.size() >= options.max_count) break;
    Vec p = g.node(f);
    bool far = true;
    for (const auto& q : accepted) {
      if ((p - q).squaredNorm() < min_sq) {
        far = false;
        break;
      }
    }
    if (far) accepted.push_back(std::move(p));
  }
  return CandidateSet(std::move(accepted));
}

}  // namespace regmark
