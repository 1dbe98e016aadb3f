#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "regmark/protocol.hpp"
#include "regmark/suggestion.hpp"
#include "support.hpp"

using namespace regmark;

namespace {

KernelSpec test_kernel() {
  KernelSpec k = KernelSpec::ladder(BasisKind::Wendland1, 8.0, 3, 2);
  k.weights = {1.0, 0.6, 0.3};
  return k;
}

GpOptions exact_targets() {
  GpOptions o;
  o.target_noise = 0.0;
  return o;
}

struct Instance {
  std::vector<Annotation> anns;
  PointList targets;
  PointList candidates;
};

// T and C drawn from one spaced pool so that some candidates are targets.
Instance random_instance(std::mt19937_64& rng, std::size_t nt, std::size_t nc, std::size_t nl) {
  Instance in;
  const auto pool = oracle::spaced_points(rng, 2, nt + nc, 0, 60, 5.0);
  in.targets.assign(pool.begin(), pool.begin() + static_cast<long>(nt));
  std::uniform_int_distribution<int> coin(0, 2);
  for (std::size_t i = 0; i < nc; ++i) {
    const std::size_t j = coin(rng) == 0 ? i % nt : nt + i;
    in.candidates.push_back(pool[j]);
  }
  in.anns = oracle::random_annotations(rng, 2, nl, 0, 60);
  return in;
}

}  // namespace

TEST(Targets, ValidateAndContains) {
  TargetSet t{{oracle::vec2(1, 2), oracle::vec2(3, 4)}, "t", false};
  EXPECT_NO_THROW(t.validate());
  EXPECT_TRUE(t.contains(oracle::vec2(3, 4)));
  EXPECT_FALSE(t.contains(oracle::vec2(3, 4.0000001)));
  EXPECT_TRUE(TargetSet::whole().contains(oracle::vec2(-100, 7)));
  t.points.push_back(oracle::vec2(1, 2));
  try {
    t.validate();
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_EQ(e.code(), "duplicate_targets");
  }
  TargetSet empty;
  EXPECT_THROW(empty.validate(), ValidationError);
}

TEST(DeltaH, ChainRuleAgainstDirectEntropy) {
  std::mt19937_64 rng(41);
  const KernelSpec k = test_kernel();
  for (int rep = 0; rep < 15; ++rep) {
    const auto in = random_instance(rng, 1 + rep % 12, 1 + rep % 8, rep % 7);
    GpSession s(k, {}, exact_targets());
    for (const auto& a : in.anns) s.add_annotation(a);
    const TargetSet t{in.targets, "t", false};
    const double h_t = oracle::direct_target_entropy(k, in.anns, in.targets);
    EXPECT_NEAR(s.joint_entropy(in.targets), h_t, 1e-9);
    for (const auto& x : in.candidates) {
      const double direct = oracle::direct_conditional_entropy(k, in.anns, in.targets, x);
      EXPECT_NEAR(h_t - delta_h(s, x, t), direct, 1e-8) << "rep " << rep;
    }
  }
}

TEST(DeltaH, WholeDomainIsMarginalEntropy) {
  std::mt19937_64 rng(42);
  GpSession s(test_kernel());
  for (const auto& a : oracle::random_annotations(rng, 2, 4, 0, 40)) s.add_annotation(a);
  const Vec x = oracle::vec2(12.5, 30);
  const double ref = oracle::gaussian_entropy(s.posterior_at(x).cov);
  EXPECT_NEAR(delta_h(s, x, TargetSet::whole()), ref, 1e-10);
}

TEST(DeltaH, OutsideTargetsIsMutualInformation) {
  // Far from every target under a compact kernel, x carries no information.
  GpSession s(test_kernel());
  const TargetSet t{{oracle::vec2(0, 0), oracle::vec2(5, 0)}, "t", false};
  EXPECT_NEAR(delta_h(s, oracle::vec2(500, 500), t), 0.0, 1e-12);
  EXPECT_GT(delta_h(s, oracle::vec2(2, 1), t), 0.0);
}

TEST(Suggest, EntropyMatchesBruteForce) {
  std::mt19937_64 rng(43);
  const KernelSpec k = test_kernel();
  for (int rep = 0; rep < 10; ++rep) {
    const auto in = random_instance(rng, 6, 7, 3);
    GpSession s(k, {}, exact_targets());
    for (const auto& a : in.anns) s.add_annotation(a);
    CandidateSet c(in.candidates);
    c.consume(static_cast<std::size_t>(rep) % c.size());
    std::size_t best = 0;
    double best_h = INFINITY;
    for (std::size_t i = 0; i < c.size(); ++i) {
      if (c.consumed[i]) continue;
      const double h = oracle::direct_conditional_entropy(k, in.anns, in.targets, c.points[i]);
      if (h < best_h - 1e-12) {
        best_h = h;
        best = i;
      }
    }
    const auto sug = suggest_next_entropy(s, c, {in.targets, "t", false});
    EXPECT_EQ(sug.index, best) << "rep " << rep;
  }
}

TEST(Suggest, EntropyTiesPickLowestIndex) {
  GpSession s(test_kernel());
  // Two far-apart candidates with identical prior entropy.
  CandidateSet c({oracle::vec2(0, 0), oracle::vec2(300, 0), oracle::vec2(0, 300)});
  EXPECT_EQ(suggest_next_entropy(s, c, TargetSet::whole()).index, 0u);
  c.consume(0);
  EXPECT_EQ(suggest_next_entropy(s, c, TargetSet::whole()).index, 1u);
  c.consume(1);
  c.consume(2);
  EXPECT_THROW(suggest_next_entropy(s, c, TargetSet::whole()), EmptyPoolError);
}

TEST(Suggest, ScoresAreIndependentOfAnnotatedValues) {
  std::mt19937_64 rng(44);
  const auto in = random_instance(rng, 8, 8, 5);
  GpSession a(test_kernel()), b(test_kernel());
  for (auto ann : in.anns) {
    a.add_annotation(ann);
    ann.y += oracle::vec2(17.0, -3.0);
    b.add_annotation(ann);
  }
  const TargetSet t{in.targets, "t", false};
  const auto sa = score_candidates(a, CandidateSet(in.candidates), t);
  const auto sb = score_candidates(b, CandidateSet(in.candidates), t);
  ASSERT_EQ(sa.size(), sb.size());
  for (std::size_t i = 0; i < sa.size(); ++i) EXPECT_EQ(sa[i].delta_h, sb[i].delta_h);
}

TEST(Suggest, HeuristicIsFarthestPoint) {
  std::mt19937_64 rng(45);
  const auto pts = oracle::spaced_points(rng, 2, 15, 0, 100, 2.0);
  CandidateSet c(pts);
  const PointList annotated{oracle::vec2(50, 50), oracle::vec2(10, 90)};
  std::size_t best = 0;
  double best_d = -1;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    double m = INFINITY;
    for (const auto& a : annotated) m = std::min(m, (pts[i] - a).norm());
    if (m > best_d) {
      best_d = m;
      best = i;
    }
  }
  EXPECT_EQ(suggest_next_heuristic(annotated, c, 1).index, best);
  c.consume(best);
  EXPECT_NE(suggest_next_heuristic(annotated, c, 1).index, best);
}

TEST(Suggest, HeuristicFirstPickIsSeeded) {
  CandidateSet c({oracle::vec2(0, 0), oracle::vec2(1, 0), oracle::vec2(2, 0), oracle::vec2(3, 0)});
  EXPECT_EQ(suggest_next_heuristic({}, c, 9).index, suggest_next_heuristic({}, c, 9).index);
}

TEST(Suggest, RandomIsUniform) {
  PointList pts;
  for (int i = 0; i < 10; ++i) pts.push_back(oracle::vec2(i, 0));
  CandidateSet c(pts);
  c.consume(3);
  std::mt19937_64 rng(46);
  std::vector<int> hits(10, 0);
  const int n = 90000;
  for (int i = 0; i < n; ++i) ++hits[suggest_next_random(c, rng).index];
  EXPECT_EQ(hits[3], 0);
  const double p = 1.0 / 9.0;
  const double sd = std::sqrt(n * p * (1 - p));
  for (int i = 0; i < 10; ++i) {
    if (i == 3) continue;
    EXPECT_LT(std::abs(hits[i] - n * p), 3.0 * sd) << i;
  }
}

TEST(Suggest, UniformIndexRange) {
  std::mt19937_64 rng(47);
  for (int i = 0; i < 1000; ++i) EXPECT_LT(uniform_index(rng, 7), 7u);
  EXPECT_THROW(uniform_index(rng, 0), DomainError);
}

TEST(Suggest, StrategyNames) {
  for (Strategy s : {Strategy::Entropy, Strategy::Heuristic, Strategy::Random})
    EXPECT_EQ(parse_strategy(strategy_name(s)), s);
  EXPECT_THROW(parse_strategy("greedy"), ValidationError);
}
