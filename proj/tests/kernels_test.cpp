#include <cmath>
#include <random>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <gtest/gtest.h>

#include "regmark/kernels.hpp"
#include "regmark/stats.hpp"
#include "support.hpp"

using namespace regmark;

namespace {

double integral(BasisKind kind) {
  auto f = [kind](double r) { return eval_basis(kind, r); };
  if (kind == BasisKind::Wendland1) {
    return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, 0.0, 1.0);
  }
  boost::math::quadrature::exp_sinh<double> q;
  return q.integrate(f);
}

}  // namespace

TEST(Kernels, RescaledIntegralsAgree) {
  const double w = integral(BasisKind::Wendland1);
  EXPECT_NEAR(w, 1.0 / 3.0, 1e-12);
  EXPECT_NEAR(integral(BasisKind::Gaussian), w, 1e-9);
  EXPECT_NEAR(integral(BasisKind::InverseQuadratic), w, 1e-9);
}

TEST(Kernels, WendlandCompactSupport) {
  for (double r : {1.0, 1.0 + 1e-15, 1.5, 100.0}) EXPECT_EQ(eval_basis(BasisKind::Wendland1, r), 0.0);
  EXPECT_GT(eval_basis(BasisKind::Wendland1, 1.0 - 1e-6), 0.0);
  const KernelSpec spec = KernelSpec::ladder(BasisKind::Wendland1, 4.0, 3, 2);
  EXPECT_EQ(bundle_value(spec, 16.0), 0.0);
  EXPECT_GT(bundle_value(spec, 15.9), 0.0);
}

TEST(Kernels, BasisValuesAtZeroAndNegativeDistance) {
  for (BasisKind kind : {BasisKind::Gaussian, BasisKind::InverseQuadratic, BasisKind::Wendland1}) {
    EXPECT_EQ(eval_basis(kind, 0.0), 1.0);
    EXPECT_THROW(eval_basis(kind, -0.1), DomainError);
    for (double r = 0.05; r < 3.0; r += 0.05) {
      EXPECT_NEAR(eval_basis(kind, r), oracle::naive_basis(kind, r), 1e-14);
    }
  }
}

TEST(Kernels, RescaleConstantsClosedForm) {
  const auto c = rescale_constants();
  EXPECT_NEAR(c.gaussian, 2.0 / (3.0 * std::sqrt(std::numbers::pi)), 1e-16);
  EXPECT_NEAR(c.inverse_quadratic, 2.0 / (3.0 * std::numbers::pi), 1e-16);
  EXPECT_EQ(c.wendland, 1.0);
}

TEST(Kernels, LadderIsDyadic) {
  const KernelSpec spec = KernelSpec::ladder(BasisKind::Gaussian, 5.0, 4, 3, 0.5);
  EXPECT_EQ(spec.scales, (std::vector<double>{5.0, 10.0, 20.0, 40.0}));
  EXPECT_EQ(spec.weights, std::vector<double>(4, 0.5));
  EXPECT_EQ(spec.dimension, 3);
  EXPECT_DOUBLE_EQ(spec.variance(), 2.0);
  EXPECT_EQ(KernelSpec::scales_for_extent(10.0, 128.0), 5u);
  EXPECT_EQ(KernelSpec::scales_for_extent(10.0, 10.0), 1u);
}

TEST(Kernels, ValidateRejectsBrokenSpecs) {
  KernelSpec s = KernelSpec::ladder(BasisKind::Gaussian, 5.0, 2, 2);
  s.weights = {0.0, 0.0};
  EXPECT_THROW(s.validate(), ValidationError);
  s = KernelSpec::ladder(BasisKind::Gaussian, 5.0, 2, 2);
  s.scales = {5.0, 5.0};
  EXPECT_THROW(s.validate(), ValidationError);
  s = KernelSpec::ladder(BasisKind::Gaussian, 5.0, 2, 2);
  s.weights = {1.0, -1.0};
  EXPECT_THROW(s.validate(), ValidationError);
  s = KernelSpec::ladder(BasisKind::Gaussian, 5.0, 2, 2);
  s.dimension = 4;
  EXPECT_THROW(s.validate(), ValidationError);
}

TEST(Kernels, CovarianceBlocksMatchNaive) {
  std::mt19937_64 rng(7);
  for (BasisKind kind : {BasisKind::Gaussian, BasisKind::InverseQuadratic, BasisKind::Wendland1}) {
    for (int d : {2, 3}) {
      const KernelSpec spec = KernelSpec::ladder(kind, 6.0, 3, d, 1.3);
      PointList a, b;
      for (int i = 0; i < 7; ++i) a.push_back(oracle::random_point(rng, d, 0, 40));
      for (int i = 0; i < 4; ++i) b.push_back(oracle::random_point(rng, d, 0, 40));
      EXPECT_LT((cross_covariance(spec, a, b) - oracle::naive_cov(spec, a, b)).norm(), 1e-12);
      const Mat g = gram_matrix(spec, a);
      EXPECT_TRUE(is_symmetric_psd(g, 1e-10));
      EXPECT_LT((cross_column(spec, a, b[0]) - oracle::naive_cov(spec, a, {b[0]})).norm(), 1e-12);
      EXPECT_LT((kernel_eval(spec, a[0], a[0]) - spec.variance() * Mat::Identity(d, d)).norm(), 1e-14);
    }
  }
}

TEST(Kernels, GramAddsNoiseBlocks) {
  const KernelSpec spec = KernelSpec::ladder(BasisKind::Wendland1, 6.0, 2, 2);
  const PointList pts{oracle::vec2(0, 0), oracle::vec2(3, 1)};
  std::vector<Mat> noise{Mat::Identity(2, 2) * 0.5, Mat::Identity(2, 2) * 2.0};
  const Mat diff = gram_matrix(spec, pts, noise) - gram_matrix(spec, pts);
  EXPECT_NEAR(diff(0, 0), 0.5, 1e-14);
  EXPECT_NEAR(diff(3, 3), 2.0, 1e-14);
  EXPECT_NEAR(diff(0, 2), 0.0, 1e-14);
}

TEST(Kernels, JsonRoundTrip) {
  const KernelSpec spec = KernelSpec::ladder(BasisKind::InverseQuadratic, 2.5, 3, 3, 0.25);
  const nlohmann::json j = spec;
  EXPECT_EQ(j.get<KernelSpec>(), spec);
  EXPECT_EQ(parse_basis(basis_name(BasisKind::Gaussian)), BasisKind::Gaussian);
  EXPECT_THROW(parse_basis("cubic"), ValidationError);
}
