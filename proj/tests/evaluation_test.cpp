#include <cmath>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "regmark/evaluation.hpp"
#include "support.hpp"

using namespace regmark;

TEST(Norms, HandValues) {
  const std::vector<double> e{0.0, 3.0, 4.0};
  EXPECT_NEAR(p_norm(e, Norm::L1), 7.0 / 3.0, 1e-15);
  EXPECT_NEAR(p_norm(e, Norm::L2), std::sqrt(25.0 / 3.0), 1e-15);
  EXPECT_EQ(p_norm(e, Norm::Linf), 4.0);
  EXPECT_EQ(norm_name(Norm::L2), "s2");
  EXPECT_THROW(p_norm(std::vector<double>{}, Norm::L1), Error);
}

TEST(Norms, LandmarkScoreUsesAnnotatedTargets) {
  const PointMap shift = [](const Vec& x) { return Vec(x + oracle::vec2(3, 0)); };
  std::vector<Annotation> anns{{oracle::vec2(0, 0), oracle::vec2(0, 0), Mat::Identity(2, 2)},
                               {oracle::vec2(5, 5), oracle::vec2(8, 9), Mat::Identity(2, 2)}};
  // Errors 3 and 4.
  EXPECT_NEAR(landmark_score(shift, anns, Norm::L1), 3.5, 1e-14);
  EXPECT_EQ(landmark_score(shift, anns, Norm::Linf), 4.0);
}

TEST(Spearman, HandValues) {
  const std::vector<double> p{1, 2, 3};
  EXPECT_NEAR(*spearman(p, std::vector<double>{1, 3, 2}), 0.5, 1e-15);
  EXPECT_NEAR(*spearman(p, std::vector<double>{30, 20, 10}), -1.0, 1e-15);
  EXPECT_FALSE(spearman(p, std::vector<double>{2, 2, 2}).has_value());
  EXPECT_THROW(spearman(std::vector<double>{1}, std::vector<double>{1}), Error);
  EXPECT_THROW(spearman(p, std::vector<double>{1, 2}), Error);
}

TEST(Spearman, TiesUsePearsonOfAverageRanks) {
  const std::vector<double> a{1, 2, 2, 3}, b{1, 3, 2, 4};
  // Average ranks (1, 2.5, 2.5, 4) vs (1, 3, 2, 4), Pearson by hand.
  const double r = 0.9486832980505138;
  EXPECT_NEAR(*spearman(a, b), r, 1e-12);
}

TEST(L2, DecompositionMatchesMonteCarlo) {
  std::mt19937_64 rng(51);
  const KernelSpec k = KernelSpec::ladder(BasisKind::Gaussian, 8.0, 2, 2);
  GpSession s(k);
  for (const auto& a : oracle::random_annotations(rng, 2, 5, 0, 40)) s.add_annotation(a);
  const PointList t = oracle::spaced_points(rng, 2, 6, 0, 40, 4.0);
  const PointMap phi_hat = [](const Vec& x) { return Vec(x + oracle::vec2(0.5 * std::sin(x[0]), 1.0)); };
  const auto dec = expected_l2_decomposition(phi_hat, s, t);
  EXPECT_NEAR(dec.expected_sq, dec.mean_term + dec.trace_term, 1e-12);

  const Mat cov = s.posterior_covariance(t);
  Vec mu(12), target(12);
  for (std::size_t i = 0; i < t.size(); ++i) {
    mu.segment(static_cast<Eigen::Index>(2 * i), 2) = s.posterior_mean(t[i]);
    target.segment(static_cast<Eigen::Index>(2 * i), 2) = phi_hat(t[i]);
  }
  Eigen::SelfAdjointEigenSolver<Mat> es(cov);
  const Mat root = es.eigenvectors() * es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();
  std::normal_distribution<double> n(0, 1);
  const int draws = 40000;
  double acc = 0;
  for (int i = 0; i < draws; ++i) {
    Vec z(12);
    for (auto& v : z) v = n(rng);
    acc += (mu + root * z - target).squaredNorm();
  }
  EXPECT_NEAR(acc / draws, dec.expected_sq, 0.02 * dec.expected_sq);
}

TEST(Scores, ProposedApproachesLandmarkForExactAnnotations) {
  std::mt19937_64 rng(52);
  const KernelSpec k = KernelSpec::ladder(BasisKind::Wendland1, 10.0, 3, 2);
  GpOptions o;
  o.sigma_min = 1e-8;
  GpSession s(k, {}, o);
  std::vector<Annotation> anns;
  for (const auto& x : oracle::spaced_points(rng, 2, 8, 0, 60, 6.0)) {
    Annotation a{x, x + oracle::random_point(rng, 2, -3, 3), Mat::Zero(2, 2)};
    anns.push_back(a);
    s.add_annotation(a);
  }
  PointList xs;
  for (const auto& a : anns) xs.push_back(a.x);
  const PointMap phi_hat = [](const Vec& x) { return Vec(1.01 * x); };
  for (Norm p : {Norm::L1, Norm::L2, Norm::Linf}) {
    EXPECT_NEAR(proposed_score(phi_hat, s, xs, p), landmark_score(phi_hat, anns, p), 1e-5);
  }
}

TEST(Scores, TripleAndReport) {
  const PointMap id = [](const Vec& x) { return x; };
  const PointMap shift = [](const Vec& x) { return Vec(x + oracle::vec2(0, 2)); };
  const auto triple = score_triple(shift, id, {oracle::vec2(0, 0), oracle::vec2(1, 1)});
  EXPECT_EQ(triple, (ScoreTriple{2.0, 2.0, 2.0}));

  const auto report = make_report("proposed", {"a", "b", "c"}, {{1, 3, 5}, {1, 1, 1}, {2, 3, 2}});
  EXPECT_EQ(report.ranks, (std::vector<int>{2, 1, 3}));
  std::ostringstream os;
  write_report_csv(os, report);
  EXPECT_EQ(os.str(), "candidate_id,s1,s2,sinf,rank\na,1,3,5,2\nb,1,1,1,1\nc,2,3,2,3\n");
  EXPECT_EQ(ordinal_ranks(std::vector<double>{5, 5, 1}), (std::vector<int>{2, 3, 1}));
}

TEST(Scores, ProposedRankingMatchesExpectedSquaredError) {
  std::mt19937_64 rng(53);
  GpSession s(KernelSpec::ladder(BasisKind::Gaussian, 8.0, 3, 2));
  for (const auto& a : oracle::random_annotations(rng, 2, 10, 0, 60)) s.add_annotation(a);
  const PointList t = oracle::spaced_points(rng, 2, 10, 0, 60, 3.0);
  std::vector<double> s2, esq;
  for (int c = 0; c < 12; ++c) {
    const Vec shift = oracle::random_point(rng, 2, -4, 4);
    const PointMap phi_hat = [shift](const Vec& x) { return Vec(x + shift); };
    s2.push_back(proposed_score(phi_hat, s, t, Norm::L2));
    esq.push_back(expected_l2_decomposition(phi_hat, s, t).expected_sq);
  }
  EXPECT_EQ(ordinal_ranks(s2), ordinal_ranks(esq));
}
