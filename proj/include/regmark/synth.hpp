#pragma once

#include <cstdint>
#include <random>
#include <string>

#include "json.hpp"
#include "regmark/grid.hpp"
#include "regmark/protocol.hpp"

namespace regmark {

/// Random smooth deformation: i.i.d. N(0, amplitude^2) control vectors, each
/// truncated to norm <= amplitude, interpolated to a stationary velocity and
/// exponentiated.
struct DeformationSpec {
  GridGeometry domain;
  double control_spacing = 0.0;  // <= 0: largest extent / 8
  double amplitude = -1.0;       // < 0: 0.3 * control spacing

  /// Copy with defaults filled in.
  DeformationSpec resolved() const;
};

struct VelocityGrid {
  GridGeometry control;
  std::vector<std::vector<double>> components;

  /// Multilinear interpolation of the control vectors onto `domain`.
  TransformField dense(const GridGeometry& domain) const;
};

VelocityGrid sample_velocity_grid(const DeformationSpec& spec, std::mt19937_64& rng);

/// exp(v) by scaling and squaring: n halvings so that max|v| / 2^n < max_step,
/// then n self-compositions with multilinear resampling on a lattice twice as
/// fine as v's, sampled back onto v's nodes.
TransformField exponentiate(const TransformField& velocity, double max_step = 0.1);

TransformField scaled(const TransformField& field, double factor);

/// Ground-truth transformation for a seed.
TransformField sample_deformation(const DeformationSpec& spec, std::uint64_t seed);

/// Jacobian determinant of id + u by central differences at interior nodes.
std::vector<double> jacobian_determinants(const TransformField& phi);

enum class AnnotatorKind { FixedIsotropic, EllipseLognormal, MultiExpert };

std::string annotator_kind_name(AnnotatorKind k);
AnnotatorKind parse_annotator_kind(const std::string& name);

struct AnnotatorProfile {
  AnnotatorKind kind = AnnotatorKind::FixedIsotropic;
  double sigma = 1.0;          // fixed_isotropic and multi_expert, pixels
  double median_radius = 2.0;  // ellipse_lognormal: median semi-axis, pixels
  double log_sigma = 0.6;      // ellipse_lognormal: sd of log semi-axis
  double radius_scale = 1.0;   // multiplies every drawn semi-axis
  int experts = 3;
  double alpha = kDefaultAlpha;
  double sigma_min = kSigmaMin;

  void validate() const;
};

void to_json(nlohmann::json& j, const AnnotatorProfile& p);
void from_json(const nlohmann::json& j, AnnotatorProfile& p);

/// Simulated user answer at x for the true transformation phi. The returned
/// covariance is already floored at sigma_min^2.
AnnotatorReply simulate_annotator(const AnnotatorProfile& profile, const Vec& x,
                                  const TransformField& phi, std::mt19937_64& rng);
AnnotatorReply simulate_annotator(const AnnotatorProfile& profile, const Vec& x,
                                  const TransformField& phi, std::uint64_t seed);

/// Independent generator for (seed, stream) pairs.
std::mt19937_64 make_stream(std::uint64_t seed, std::uint64_t stream);

}  // namespace regmark
