#include "regmark/kernels.hpp"

#include <algorithm>
#include <cmath>


#include "regmark/simd/dispatch.hpp"
#include "regmark/stats.hpp"

namespace regmark {
namespace {

struct Radii {
  std::vector<double> inv;
};

Radii inverse_radii(const KernelSpec& spec) {
  Radii r;
  r.inv.reserve(spec.scales.size());
  const double base = basis_radius(spec.basis);
  for (double rho : spec.scales) r.inv.push_back(1.0 / (rho * base));
  return r;
}

void check_points(const PointList& pts, int d, const char* what) {
  for (const auto& p : pts) require_dimension(p, d, what);
}

}  // namespace

void KernelSpec::validate() const {
  if (dimension != 2 && dimension != 3) {
    throw ValidationError("invalid_kernel", "kernel dimension must be 2 or 3");
  }
  if (scales.empty() || scales.size() != weights.size()) {
    throw ValidationError("invalid_kernel", "kernel needs matching, non-empty scales and weights");
  }
  for (std::size_t s = 0; s < scales.size(); ++s) {
    if (!(scales[s] > 0.0) || !std::isfinite(scales[s])) {
      throw ValidationError("invalid_kernel", "kernel scales must be positive and finite");
    }
    if (s > 0 && !(scales[s] > scales[s - 1])) {
      throw ValidationError("invalid_kernel", "kernel scales must be strictly increasing");
    }
    if (!(weights[s] >= 0.0) || !std::isfinite(weights[s])) {
      throw ValidationError("invalid_kernel", "kernel weights must be nonnegative and finite");
    }
  }
  if (std::none_of(weights.begin(), weights.end(), [](double w) { return w > 0.0; })) {
    throw ValidationError("invalid_kernel", "at least one kernel weight must be positive");
  }
}

double KernelSpec::variance() const {
  double sum = 0.0;
  for (double w : weights) sum += w;
  return sum;
}

KernelSpec KernelSpec::ladder(BasisKind basis, double rho1, std::size_t count, int dimension,
                              double weight) {
  KernelSpec spec;
  spec.basis = basis;
  spec.dimension = dimension;
  double rho = rho1;
  for (std::size_t s = 0; s < count; ++s, rho *= 2.0) {
    spec.scales.push_back(rho);
    spec.weights.push_back(weight);
  }
  spec.validate();
  return spec;
}

std::size_t KernelSpec::scales_for_extent(double rho1, double extent) {
  if (!(rho1 > 0.0) || !(extent > rho1)) return 1;
  return 1 + static_cast<std::size_t>(std::lround(std::log2(extent / rho1)));
}

std::string basis_name(BasisKind kind) {
  switch (kind) {
    case BasisKind::Gaussian:
      return "gaussian";
    case BasisKind::InverseQuadratic:
      return "inverse_quadratic";
    case BasisKind::Wendland1:
      return "wendland1";
  }
  return "unknown";
}

BasisKind parse_basis(const std::string& name) {
  if (name == "gaussian") return BasisKind::Gaussian;
  if (name == "inverse_quadratic") return BasisKind::InverseQuadratic;
  if (name == "wendland1") return BasisKind::Wendland1;
  throw ValidationError("invalid_kernel", "unknown basis kind '" + name + "'");
}

RescaleConstants rescale_constants() { return kRescale; }

double eval_basis(BasisKind kind, double r) {
  if (!(r >= 0.0)) throw DomainError("eval_basis: distance must be nonnegative");
  const double t = r / basis_radius(kind);
  switch (kind) {
    case BasisKind::Gaussian:
      return std::exp(-t * t);
    case BasisKind::InverseQuadratic:
      return 1.0 / (1.0 + t * t);
    case BasisKind::Wendland1: {
      if (t >= 1.0) return 0.0;
      const double u = 1.0 - t;
      return (4.0 * t + 1.0) * u * u * u * u;
    }
  }
  return 0.0;
}

double bundle_value(const KernelSpec& spec, double distance) {
  double out = 0.0;
  bundle_values(spec, std::span<const double>(&distance, 1), std::span<double>(&out, 1));
  return out;
}

void bundle_values(const KernelSpec& spec, std::span<const double> distances,
                   std::span<double> out) {
  const Radii radii = inverse_radii(spec);
  simd::radial_bundle({spec.basis, radii.inv, spec.weights}, distances, out);
}

Mat kernel_eval(const KernelSpec& spec, const Vec& x, const Vec& x2) {
  require_dimension(x, spec.dimension, "kernel_eval");
  require_dimension(x2, spec.dimension, "kernel_eval");
  return bundle_value(spec, (x - x2).norm()) * Mat::Identity(spec.dimension, spec.dimension);
}

Mat scalar_cross(const KernelSpec& spec, const PointList& a, const PointList& b) {
  check_points(a, spec.dimension, "scalar_cross");
  check_points(b, spec.dimension, "scalar_cross");
  Mat out(static_cast<Eigen::Index>(a.size()), static_cast<Eigen::Index>(b.size()));
  std::vector<double> dist(b.size());
  std::vector<double> vals(b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < b.size(); ++j) dist[j] = (a[i] - b[j]).norm();
    bundle_values(spec, dist, vals);
    for (std::size_t j = 0; j < b.size(); ++j) out(i, j) = vals[j];
  }
  return out;
}

Mat expand_isotropic(const Mat& scalar, int dimension) {
  Mat out = Mat::Zero(scalar.rows() * dimension, scalar.cols() * dimension);
  for (Eigen::Index i = 0; i < scalar.rows(); ++i) {
    for (Eigen::Index j = 0; j < scalar.cols(); ++j) {
      const double v = scalar(i, j);
      for (int c = 0; c < dimension; ++c) out(i * dimension + c, j * dimension + c) = v;
    }
  }
  return out;
}

Mat cross_covariance(const KernelSpec& spec, const PointList& a, const PointList& b) {
  return expand_isotropic(scalar_cross(spec, a, b), spec.dimension);
}

Mat cross_column(const KernelSpec& spec, const PointList& a, const Vec& x) {
  require_dimension(x, spec.dimension, "cross_column");
  const int d = spec.dimension;
  std::vector<double> dist(a.size());
  std::vector<double> vals(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    require_dimension(a[i], d, "cross_column");
    dist[i] = (a[i] - x).norm();
  }
  bundle_values(spec, dist, vals);
  Mat out = Mat::Zero(static_cast<Eigen::Index>(a.size()) * d, d);
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (int c = 0; c < d; ++c) out(static_cast<Eigen::Index>(i) * d + c, c) = vals[i];
  }
  return out;
}

Mat gram_matrix(const KernelSpec& spec, const PointList& points, std::span<const Mat> noise) {
  const int d = spec.dimension;
  if (!noise.empty() && noise.size() != points.size()) {
    throw DimensionError("gram_matrix: one noise block per point is required");
  }
  Mat k = cross_covariance(spec, points, points);
  for (std::size_t i = 0; i < noise.size(); ++i) {
    const Mat& block = noise[i];
    if (block.rows() != d || block.cols() != d) {
      throw DimensionError("gram_matrix: noise block has the wrong shape");
    }
    if (!is_symmetric_psd(block, 1e-12)) {
      throw ValidationError("invalid_covariance", "gram_matrix: noise block is not symmetric PSD");
    }
    k.block(static_cast<Eigen::Index>(i) * d, static_cast<Eigen::Index>(i) * d, d, d) += block;
  }
  return k;
}

void to_json(nlohmann::json& j, const KernelSpec& spec) {
  j = nlohmann::json{{"basis", basis_name(spec.basis)},
                     {"scales", spec.scales},
                     {"weights", spec.weights},
                     {"dimension", spec.dimension}};
}

void from_json(const nlohmann::json& j, KernelSpec& spec) {
  try {
    spec.basis = parse_basis(j.at("basis").get<std::string>());
    spec.scales = j.at("scales").get<std::vector<double>>();
    spec.weights = j.at("weights").get<std::vector<double>>();
    spec.dimension = j.at("dimension").get<int>();
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("invalid_kernel", std::string("kernel JSON: ") + e.what());
  }
  spec.validate();
}

}  // namespace regmark
