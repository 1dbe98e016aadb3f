#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "regmark/synth.hpp"
#include "support.hpp"

using namespace regmark;

namespace {

DeformationSpec spec128(double amplitude) {
  DeformationSpec s;
  s.domain = GridGeometry::pixels({128, 128});
  s.amplitude = amplitude;
  return s;
}

// Forward Euler on dx/dt = v(x), t in [0, 1].
Vec euler_flow(const TransformField& v, Vec x, int steps) {
  const double h = 1.0 / steps;
  for (int i = 0; i < steps; ++i) x += h * v.displacement(x);
  return x;
}

}  // namespace

TEST(Synth, ScalingAndSquaringMatchesEuler) {
  const auto s = spec128(5.0).resolved();
  std::mt19937_64 rng(71);
  const auto v = sample_velocity_grid(s, rng).dense(s.domain);
  const auto phi = exponentiate(v);
  double worst = 0;
  for (std::size_t i = 0; i < s.domain.node_count(); i += 97) {
    const Vec x = s.domain.node(i);
    worst = std::max(worst, (phi(x) - euler_flow(v, x, 1024)).norm());
  }
  EXPECT_LT(worst, 0.1);
}

TEST(Synth, InverseByNegatedVelocity) {
  const auto s = spec128(4.0).resolved();
  std::mt19937_64 rng(72);
  const auto v = sample_velocity_grid(s, rng).dense(s.domain);
  const auto fwd = exponentiate(v);
  const auto back = exponentiate(scaled(v, -1.0));
  const double margin = 16.0;
  for (std::size_t i = 0; i < s.domain.node_count(); i += 53) {
    const Vec x = s.domain.node(i);
    if (!s.domain.contains(x, margin)) continue;
    EXPECT_LT((back(fwd(x)) - x).norm(), 0.2);
  }
}

TEST(Synth, DiffeomorphicAndSeeded) {
  const auto s = spec128(-1.0);
  const auto a = sample_deformation(s, 5);
  const auto b = sample_deformation(s, 5);
  const auto c = sample_deformation(s, 6);
  EXPECT_EQ(a.component(0), b.component(0));
  EXPECT_NE(a.component(0), c.component(0));
  EXPECT_GT(a.max_norm(), 0.5);
  for (double j : jacobian_determinants(a)) EXPECT_GT(j, 0.0);
  const auto id = sample_deformation(spec128(0.0), 5);
  EXPECT_EQ(id.max_norm(), 0.0);
}

TEST(Synth, DefaultsResolve) {
  const auto r = spec128(-1.0).resolved();
  EXPECT_EQ(r.control_spacing, 127.0 / 8.0);
  EXPECT_DOUBLE_EQ(r.amplitude, 0.3 * r.control_spacing);
}

TEST(Synth, Works3d) {
  DeformationSpec s;
  s.domain = GridGeometry::pixels({24, 20, 16});
  const auto phi = sample_deformation(s, 3);
  EXPECT_EQ(phi.dimension(), 3);
  for (double j : jacobian_determinants(phi)) EXPECT_GT(j, 0.0);
}

TEST(Annotators, FixedIsotropicMoments) {
  const auto phi = sample_deformation(spec128(-1.0), 8);
  AnnotatorProfile p;
  p.sigma = 1.5;
  std::mt19937_64 rng(73);
  const Vec x = oracle::vec2(40, 70);
  const int n = 20000;
  Vec mean = Vec::Zero(2);
  double sq = 0;
  for (int i = 0; i < n; ++i) {
    const auto r = simulate_annotator(p, x, phi, rng);
    EXPECT_LT((r.sigma - 2.25 * Mat::Identity(2, 2)).norm(), 1e-12);
    const Vec e = r.y - phi(x);
    mean += e;
    sq += e.squaredNorm();
  }
  mean /= n;
  EXPECT_LT(mean.norm(), 3.0 * 1.5 * std::sqrt(2.0 / n));
  EXPECT_NEAR(sq / n, 2 * 2.25, 3.0 * 2.25 * std::sqrt(2.0 * 2 / n) * 2);
}

TEST(Annotators, EllipseResidualsWhitenToChiSquared) {
  const auto phi = sample_deformation(spec128(-1.0), 9);
  AnnotatorProfile p;
  p.kind = AnnotatorKind::EllipseLognormal;
  p.median_radius = 4.0;
  std::mt19937_64 rng(74);
  const Vec x = oracle::vec2(64, 64);
  const int n = 20000;
  double m2 = 0;
  int inside = 0;
  for (int i = 0; i < n; ++i) {
    const auto r = simulate_annotator(p, x, phi, rng);
    const Vec e = r.y - phi(x);
    const double q = e.dot(r.sigma.ldlt().solve(e));
    m2 += q;
    inside += q <= -2.0 * std::log(p.alpha);
  }
  // Floor rarely binds at this radius; E[q] = d and P(inside) = 1 - alpha.
  EXPECT_NEAR(m2 / n, 2.0, 0.06);
  EXPECT_NEAR(static_cast<double>(inside) / n, 0.99, 3.0 * std::sqrt(0.99 * 0.01 / n));
}

TEST(Annotators, MultiExpertConsistency) {
  const auto phi = sample_deformation(spec128(-1.0), 10);
  AnnotatorProfile p;
  p.kind = AnnotatorKind::MultiExpert;
  p.experts = 4;
  p.sigma = 2.0;
  std::mt19937_64 rng(75);
  const Vec x = oracle::vec2(30, 90);
  const int n = 20000;
  Mat mean_sigma = Mat::Zero(2, 2);
  double err_sq = 0;
  for (int i = 0; i < n; ++i) {
    const auto r = simulate_annotator(p, x, phi, rng);
    mean_sigma += r.sigma;
    err_sq += (r.y - phi(x)).squaredNorm();
  }
  // Unbiased sample covariance of the raters; fused mean has variance sigma^2 / m.
  EXPECT_LT((mean_sigma / n - 4.0 * Mat::Identity(2, 2)).norm(), 0.15);
  EXPECT_NEAR(err_sq / n, 2 * 4.0 / 4, 0.05);
}

TEST(Annotators, RejectsOutsidePoints) {
  const auto phi = sample_deformation(spec128(-1.0), 11);
  EXPECT_THROW(simulate_annotator(AnnotatorProfile{}, oracle::vec2(-1, 5), phi, 1u), DomainError);
  AnnotatorProfile bad;
  bad.sigma = -1;
  EXPECT_THROW(bad.validate(), ValidationError);
  EXPECT_THROW(parse_annotator_kind("oracle"), ValidationError);
}

TEST(Annotators, ProfileJsonRoundTrip) {
  AnnotatorProfile p;
  p.kind = AnnotatorKind::EllipseLognormal;
  p.radius_scale = 5;
  const nlohmann::json j = p;
  const auto back = j.get<AnnotatorProfile>();
  EXPECT_EQ(back.kind, p.kind);
  EXPECT_EQ(back.radius_scale, 5);
}

TEST(Streams, IndependentAndReproducible) {
  auto a = make_stream(1, 0), b = make_stream(1, 0), c = make_stream(1, 1), d = make_stream(2, 0);
  const auto va = a();
  EXPECT_EQ(va, b());
  EXPECT_NE(va, c());
  EXPECT_NE(va, d());
}
