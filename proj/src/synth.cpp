#include "regmark/synth.hpp"

#include <algorithm>
#include <cmath>

#include "regmark/stats.hpp"

namespace regmark {

namespace {

double largest_extent(const GridGeometry& g) {
  double e = 0.0;
  for (int a = 0; a < g.dimension(); ++a) {
    e = std::max(e, (g.shape[static_cast<std::size_t>(a)] - 1) * g.spacing[a]);
  }
  return e;
}

Vec standard_normal(int d, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Vec z(d);
  for (int i = 0; i < d; ++i) z[i] = n(rng);
  return z;
}

Mat random_rotation(int d, std::mt19937_64& rng) {
  Mat g(d, d);
  for (int c = 0; c < d; ++c) g.col(c) = standard_normal(d, rng);
  Eigen::HouseholderQR<Mat> qr(g);
  Mat q = qr.householderQ();
  const Mat r = qr.matrixQR();
  for (int c = 0; c < d; ++c) {
    if (r(c, c) < 0) q.col(c) *= -1.0;
  }
  return q;
}

}  // namespace

DeformationSpec DeformationSpec::resolved() const {
  DeformationSpec s = *this;
  s.domain.validate();
  if (s.control_spacing <= 0.0) s.control_spacing = largest_extent(s.domain) / 8.0;
  if (s.amplitude < 0.0) s.amplitude = 0.3 * s.control_spacing;
  if (!(s.control_spacing > 0.0)) throw DomainError("deformation: degenerate domain");
  return s;
}

VelocityGrid sample_velocity_grid(const DeformationSpec& spec, std::mt19937_64& rng) {
  const DeformationSpec s = spec.resolved();
  const int d = s.domain.dimension();
  VelocityGrid v;
  v.control.origin = s.domain.origin;
  v.control.spacing = Vec::Constant(d, s.control_spacing);
  for (int a = 0; a < d; ++a) {
    const double extent = (s.domain.shape[static_cast<std::size_t>(a)] - 1) * s.domain.spacing[a];
    v.control.shape.push_back(static_cast<int>(std::ceil(extent / s.control_spacing - 1e-9)) + 1);
  }
  std::normal_distribution<double> n(0.0, 1.0);
  v.components.assign(static_cast<std::size_t>(d), std::vector<double>(v.control.node_count()));
  // Gaussian draws truncated to the ball of radius amplitude, so no control
  // vector moves further than the amplitude.
  Vec c(d);
  for (std::size_t f = 0; f < v.control.node_count(); ++f) {
    if (s.amplitude > 0.0) {
      do {
        for (int a = 0; a < d; ++a) c(a) = n(rng);
      } while (c.squaredNorm() > 1.0);
    } else {
      c.setZero();
    }
    for (int a = 0; a < d; ++a) v.components[static_cast<std::size_t>(a)][f] = s.amplitude * c(a);
  }
  return v;
}

TransformField VelocityGrid::dense(const GridGeometry& domain) const {
  TransformField out(domain);
  const int d = domain.dimension();
  for (std::size_t f = 0; f < domain.node_count(); ++f) {
    const Stencil st = interpolation_stencil(control, domain.node(f));
    for (int a = 0; a < d; ++a) {
      double acc = 0.0;
      for (int k = 0; k < st.count; ++k) {
        acc += st.weight[static_cast<std::size_t>(k)] *
               components[static_cast<std::size_t>(a)][st.index[static_cast<std::size_t>(k)]];
      }
      out.component(a)[f] = acc;
    }
  }
  return out;
}

TransformField scaled(const TransformField& field, double factor) {
  TransformField out = field;
  for (int a = 0; a < out.dimension(); ++a) {
    for (auto& v : out.component(a)) v *= factor;
  }
  return out;
}

TransformField exponentiate(const TransformField& velocity, double max_step) {
  if (!(max_step > 0.0)) throw DomainError("exponentiate: max_step must be positive");
  const double vmax = velocity.max_norm();
  int n = 0;
  while (vmax / std::ldexp(1.0, n) >= max_step) ++n;

  // Squaring runs on a lattice refined by kRefine in index units, which
  // keeps the unit-spacing compose path and cuts the resampling error at the
  // kinks of a piecewise-linear velocity.
  constexpr int kRefine = 2;
  const GridGeometry& g = velocity.geometry();
  const int d = g.dimension();
  std::vector<int> fine_shape;
  for (int s : g.shape) fine_shape.push_back(kRefine * (s - 1) + 1);
  const GridGeometry fine = GridGeometry::pixels(fine_shape);
  const double h = std::ldexp(1.0, -n);
  TransformField u(fine);
  for (std::size_t f = 0; f < fine.node_count(); ++f) {
    const Vec p = g.origin + (fine.node(f) / static_cast<double>(kRefine)).cwiseProduct(g.spacing);
    const Vec w = velocity.displacement(p);
    for (int a = 0; a < d; ++a) u.component(a)[f] = h * w(a) * kRefine / g.spacing[a];
  }
  for (int i = 0; i < n; ++i) u = compose(u, u);

  TransformField out(g);
  for (std::size_t f = 0; f < g.node_count(); ++f) {
    std::vector<int> idx = g.unflatten(f);
    for (int& k : idx) k *= kRefine;
    const std::size_t ff = fine.flatten(idx);
    for (int a = 0; a < d; ++a) out.component(a)[f] = u.component(a)[ff] * g.spacing[a] / kRefine;
  }
  return out;
}

TransformField sample_deformation(const DeformationSpec& spec, std::uint64_t seed) {
  const DeformationSpec s = spec.resolved();
  if (s.amplitude == 0.0) return TransformField::identity(s.domain);
  std::mt19937_64 rng(seed);
  return exponentiate(sample_velocity_grid(s, rng).dense(s.domain));
}

std::vector<double> jacobian_determinants(const TransformField& phi) {
  const GridGeometry& g = phi.geometry();
  const int d = g.dimension();
  std::vector<double> out;
  for (std::size_t f = 0; f < g.node_count(); ++f) {
    auto idx = g.unflatten(f);
    bool interior = true;
    for (int a = 0; a < d; ++a) {
      interior = interior && idx[static_cast<std::size_t>(a)] > 0 &&
                 idx[static_cast<std::size_t>(a)] < g.shape[static_cast<std::size_t>(a)] - 1;
    }
    if (!interior) continue;
    Mat j = Mat::Identity(d, d);
    for (int b = 0; b < d; ++b) {
      auto lo = idx;
      auto hi = idx;
      --lo[static_cast<std::size_t>(b)];
      ++hi[static_cast<std::size_t>(b)];
      const Vec du = phi.displacement_at_node(g.flatten(hi)) - phi.displacement_at_node(g.flatten(lo));
      j.col(b) += du / (2.0 * g.spacing[b]);
    }
    out.push_back(j.determinant());
  }
  return out;
}

std::string annotator_kind_name(AnnotatorKind k) {
  switch (k) {
    case AnnotatorKind::FixedIsotropic: return "fixed_isotropic";
    case AnnotatorKind::EllipseLognormal: return "ellipse_lognormal";
    case AnnotatorKind::MultiExpert: return "multi_expert";
  }
  return "unknown";
}

AnnotatorKind parse_annotator_kind(const std::string& name) {
  if (name == "fixed_isotropic") return AnnotatorKind::FixedIsotropic;
  if (name == "ellipse_lognormal") return AnnotatorKind::EllipseLognormal;
  if (name == "multi_expert") return AnnotatorKind::MultiExpert;
  throw ValidationError("invalid_config", "unknown annotator kind '" + name + "'");
}

void AnnotatorProfile::validate() const {
  const bool ok = sigma >= 0.0 && median_radius > 0.0 && log_sigma >= 0.0 && radius_scale > 0.0 &&
                  experts >= 1 && alpha > 0.0 && alpha < 1.0 && sigma_min > 0.0;
  if (!ok) throw ValidationError("invalid_config", "annotator profile parameters out of range");
}

void to_json(nlohmann::json& j, const AnnotatorProfile& p) {
  j = {{"kind", annotator_kind_name(p.kind)}, {"sigma", p.sigma},
       {"median_radius", p.median_radius},    {"log_sigma", p.log_sigma},
       {"radius_scale", p.radius_scale},      {"experts", p.experts},
       {"alpha", p.alpha},                    {"sigma_min", p.sigma_min}};
}

void from_json(const nlohmann::json& j, AnnotatorProfile& p) {
  p = AnnotatorProfile{};
  p.kind = parse_annotator_kind(j.value("kind", std::string("fixed_isotropic")));
  p.sigma = j.value("sigma", p.sigma);
  p.median_radius = j.value("median_radius", p.median_radius);
  p.log_sigma = j.value("log_sigma", p.log_sigma);
  p.radius_scale = j.value("radius_scale", p.radius_scale);
  p.experts = j.value("experts", p.experts);
  p.alpha = j.value("alpha", p.alpha);
  p.sigma_min = j.value("sigma_min", p.sigma_min);
  p.validate();
}

AnnotatorReply simulate_annotator(const AnnotatorProfile& profile, const Vec& x,
                                  const TransformField& phi, std::mt19937_64& rng) {
  profile.validate();
  const int d = phi.dimension();
  require_dimension(x, d, "simulate_annotator");
  if (!phi.contains(x)) throw DomainError("simulate_annotator: point outside the field");
  const Vec truth = phi(x);
  const double floor_var = profile.sigma_min * profile.sigma_min;

  switch (profile.kind) {
    case AnnotatorKind::FixedIsotropic: {
      const Vec y = truth + profile.sigma * standard_normal(d, rng);
      const Mat sigma = Mat::Identity(d, d) * (profile.sigma * profile.sigma);
      return {y, floor_eigenvalues(sigma, floor_var)};
    }
    case AnnotatorKind::EllipseLognormal: {
      std::normal_distribution<double> n(0.0, 1.0);
      Ellipse e;
      e.center = truth;
      e.radii.resize(d);
      for (int i = 0; i < d; ++i) {
        e.radii[i] = profile.radius_scale * profile.median_radius * std::exp(profile.log_sigma * n(rng));
      }
      e.axes = random_rotation(d, rng);
      e.alpha = profile.alpha;
      const Mat sigma = covariance_from_ellipse(e);
      const Mat root = e.axes * (e.radii / gamma_from_alpha(e.alpha, d)).asDiagonal();
      const Vec y = truth + root * standard_normal(d, rng);
      return {y, floor_eigenvalues(sigma, floor_var)};
    }
    case AnnotatorKind::MultiExpert: {
      PointList draws;
      for (int m = 0; m < profile.experts; ++m) {
        draws.push_back(truth + profile.sigma * standard_normal(d, rng));
      }
      FusedAnnotation f = fuse_pointwise(draws, profile.sigma_min);
      return {f.mean, f.sigma};
    }
  }
  throw ValidationError("invalid_config", "unknown annotator kind");
}

AnnotatorReply simulate_annotator(const AnnotatorProfile& profile, const Vec& x,
                                  const TransformField& phi, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return simulate_annotator(profile, x, phi, rng);
}

std::mt19937_64 make_stream(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32),
                    0x5eedu};
  return std::mt19937_64(seq);
}

}  // namespace regmark
