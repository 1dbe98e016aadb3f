#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "regmark/hyperparameters.hpp"
#include "support.hpp"

using namespace regmark;

namespace {

// Leave-one-out negative log predictive density by explicit refits.
double loo_by_refit(const KernelSpec& spec, const std::vector<Annotation>& anns) {
  double total = 0.0;
  const int d = spec.dimension;
  for (std::size_t l = 0; l < anns.size(); ++l) {
    std::vector<Annotation> rest;
    for (std::size_t j = 0; j < anns.size(); ++j)
      if (j != l) rest.push_back(anns[j]);
    const auto post = oracle::naive_posterior(spec, rest, {anns[l].x});
    const Mat c = post.cov + anns[l].sigma;
    const Vec r = anns[l].y - post.mean;
    total += 0.5 * d * std::log(2.0 * std::numbers::pi) + 0.5 * std::log(c.determinant()) +
             0.5 * r.dot(c.partialPivLu().solve(r));
  }
  return total;
}

}  // namespace

TEST(Gpp, LossMatchesExplicitLeaveOneOut) {
  std::mt19937_64 rng(21);
  for (BasisKind kind : {BasisKind::Gaussian, BasisKind::Wendland1}) {
    for (int d : {2, 3}) {
      KernelSpec spec = KernelSpec::ladder(kind, 8.0, 3, d);
      spec.weights = {0.7, 2.0, 0.3};
      const auto anns = oracle::random_annotations(rng, d, 9, 0, 60);
      const double ref = loo_by_refit(spec, anns);
      EXPECT_NEAR(gpp_loss(spec, anns), ref, 1e-8 * std::abs(ref));
    }
  }
}

TEST(Gpp, ObjectiveRelatesToLoss) {
  std::mt19937_64 rng(22);
  const KernelSpec spec = KernelSpec::ladder(BasisKind::Gaussian, 8.0, 2, 2);
  const auto anns = oracle::random_annotations(rng, 2, 7, 0, 40);
  const double expect = 7.0 * std::log(2.0 * std::numbers::pi) + gpp_objective(spec, anns) / 2.0;
  EXPECT_NEAR(gpp_loss(spec, anns), expect, 1e-10);
}

TEST(Gpp, NeedsTwoAnnotations) {
  std::mt19937_64 rng(23);
  const KernelSpec spec = KernelSpec::ladder(BasisKind::Gaussian, 8.0, 2, 2);
  const auto anns = oracle::random_annotations(rng, 2, 1, 0, 40);
  EXPECT_THROW(estimate_hyperparameters(anns, spec), InsufficientDataError);
}

TEST(Gpp, FitNeverIncreasesLossAndKeepsZeroWeights) {
  std::mt19937_64 rng(24);
  KernelSpec init = KernelSpec::ladder(BasisKind::Wendland1, 6.0, 3, 2);
  init.weights = {1.0, 0.0, 1.0};
  const auto anns = oracle::random_annotations(rng, 2, 25, 0, 80);
  const auto fit = estimate_hyperparameters(anns, init);
  ASSERT_FALSE(fit.loss_history.empty());
  for (std::size_t i = 1; i < fit.loss_history.size(); ++i) {
    EXPECT_LE(fit.loss_history[i], fit.loss_history[i - 1] + 1e-12);
  }
  EXPECT_EQ(fit.spec.weights[1], 0.0);
  EXPECT_EQ(fit.spec.scales, init.scales);
  EXPECT_NEAR(fit.loss_history.back(), gpp_objective(fit.spec, anns), 1e-8 * std::abs(fit.loss_history.back()));
  EXPECT_LE(gpp_objective(fit.spec, anns), gpp_objective(init, anns));
}
