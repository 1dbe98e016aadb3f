#pragma once

#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "regmark/basis.hpp"
#include "regmark/types.hpp"

namespace regmark {

/// Multi-scale isotropic kernel k(x, x') = [sum_s w_s K(|x - x'| / rho_s)] I_d.
struct KernelSpec {
  BasisKind basis = BasisKind::Wendland1;
  std::vector<double> scales;   // rho_s, strictly increasing
  std::vector<double> weights;  // w_s >= 0, at least one positive
  int dimension = 2;

  /// Throws ValidationError when an invariant is broken.
  void validate() const;

  /// Prior variance per component: k(x, x) = variance() * I.
  double variance() const;

  /// Dyadic ladder rho_s = 2^(s-1) rho_1 with equal weights.
  static KernelSpec ladder(BasisKind basis, double rho1, std::size_t count, int dimension,
                           double weight = 1.0);

  /// Number of dyadic scales so that the coarsest one is closest (in log
  /// scale) to `extent`.
  static std::size_t scales_for_extent(double rho1, double extent);

  friend bool operator==(const KernelSpec&, const KernelSpec&) = default;
};

std::string basis_name(BasisKind kind);
BasisKind parse_basis(const std::string& name);

/// The three rescaling radii (hard-coded closed forms).
RescaleConstants rescale_constants();

/// Scalar radial function K(r). Throws DomainError for negative r.
double eval_basis(BasisKind kind, double r);

/// Scalar bundle value c such that k(x, x') = c I_d at distance `distance`.
double bundle_value(const KernelSpec& spec, double distance);

/// Batched bundle values, dispatched to the active SIMD level.
void bundle_values(const KernelSpec& spec, std::span<const double> distances,
                   std::span<double> out);

/// d x d kernel block.
Mat kernel_eval(const KernelSpec& spec, const Vec& x, const Vec& x2);

/// |a| x |b| matrix of scalar bundle values (the isotropic factor).
Mat scalar_cross(const KernelSpec& spec, const PointList& a, const PointList& b);

/// Blockwise |a|d x |b|d covariance between two point sets.
Mat cross_covariance(const KernelSpec& spec, const PointList& a, const PointList& b);

/// Blockwise |a|d x d column of k(a_i, x) blocks.
Mat cross_column(const KernelSpec& spec, const PointList& a, const Vec& x);

/// Nd x Nd Gram matrix; when `noise` is non-empty its blocks are added to the
/// diagonal (each must be symmetric PSD, d x d).
Mat gram_matrix(const KernelSpec& spec, const PointList& points,
                std::span<const Mat> noise = {});

/// Expands an isotropic scalar matrix S into S (x) I_d.
Mat expand_isotropic(const Mat& scalar, int dimension);

void to_json(nlohmann::json& j, const KernelSpec& spec);
void from_json(const nlohmann::json& j, KernelSpec& spec);

}  // namespace regmark
