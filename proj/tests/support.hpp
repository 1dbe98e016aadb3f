#pragma once

// Shared fixtures and independent reference computations for the tests.

#include <cmath>
#include <numbers>
#include <random>

#include "regmark/gp_session.hpp"

namespace regmark::oracle {

inline Vec vec2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

inline Vec random_point(std::mt19937_64& rng, int d, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  Vec p(d);
  for (int i = 0; i < d; ++i) p[i] = u(rng);
  return p;
}

/// Random SPD matrix with eigenvalues in [lo, hi].
inline Mat random_spd(std::mt19937_64& rng, int d, double lo, double hi) {
  std::normal_distribution<double> n(0.0, 1.0);
  Mat g(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) g(i, j) = n(rng);
  Eigen::HouseholderQR<Mat> qr(g);
  const Mat q = qr.householderQ();
  std::uniform_real_distribution<double> u(lo, hi);
  Vec ev(d);
  for (int i = 0; i < d; ++i) ev[i] = u(rng);
  return q * ev.asDiagonal() * q.transpose();
}

/// Radial functions written out from their closed forms.
inline double naive_basis(BasisKind kind, double r) {
  switch (kind) {
    case BasisKind::Gaussian: {
      const double a = 2.0 / (3.0 * std::sqrt(std::numbers::pi));
      return std::exp(-(r * r) / (a * a));
    }
    case BasisKind::InverseQuadratic: {
      const double a = 2.0 / (3.0 * std::numbers::pi);
      return 1.0 / (1.0 + r * r / (a * a));
    }
    case BasisKind::Wendland1:
      return r >= 1.0 ? 0.0 : (4.0 * r + 1.0) * std::pow(1.0 - r, 4);
  }
  return 0.0;
}

inline double naive_scalar_kernel(const KernelSpec& k, const Vec& a, const Vec& b) {
  const double r = (a - b).norm();
  double s = 0.0;
  for (std::size_t i = 0; i < k.scales.size(); ++i) s += k.weights[i] * naive_basis(k.basis, r / k.scales[i]);
  return s;
}

inline Mat naive_cov(const KernelSpec& k, const PointList& a, const PointList& b) {
  const int d = k.dimension;
  Mat m = Mat::Zero(static_cast<Eigen::Index>(a.size()) * d, static_cast<Eigen::Index>(b.size()) * d);
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j)
      m.block(static_cast<Eigen::Index>(i) * d, static_cast<Eigen::Index>(j) * d, d, d) =
          naive_scalar_kernel(k, a[i], b[j]) * Mat::Identity(d, d);
  return m;
}

/// Dense GP posterior over `query` given noisy annotations (identity mean),
/// with every matrix inverse done by LU.
struct NaivePosterior {
  Vec mean;  // stacked
  Mat cov;
};

inline NaivePosterior naive_posterior(const KernelSpec& k, const std::vector<Annotation>& annotations,
                                      const PointList& query) {
  const int d = k.dimension;
  PointList xs;
  Vec resid(static_cast<Eigen::Index>(annotations.size()) * d);
  Mat noise = Mat::Zero(resid.size(), resid.size());
  for (std::size_t l = 0; l < annotations.size(); ++l) {
    xs.push_back(annotations[l].x);
    resid.segment(static_cast<Eigen::Index>(l) * d, d) = annotations[l].y - annotations[l].x;
    noise.block(static_cast<Eigen::Index>(l) * d, static_cast<Eigen::Index>(l) * d, d, d) = annotations[l].sigma;
  }
  Vec prior(static_cast<Eigen::Index>(query.size()) * d);
  for (std::size_t i = 0; i < query.size(); ++i) prior.segment(static_cast<Eigen::Index>(i) * d, d) = query[i];
  const Mat kqq = naive_cov(k, query, query);
  if (annotations.empty()) return {prior, kqq};
  const Mat kaa = naive_cov(k, xs, xs) + noise;
  const Mat kaq = naive_cov(k, xs, query);
  const Mat inv = kaa.partialPivLu().inverse();
  return {prior + kaq.transpose() * inv * resid, kqq - kaq.transpose() * inv * kaq};
}

inline double gaussian_entropy(const Mat& cov) {
  const double n = static_cast<double>(cov.rows());
  return 0.5 * n * std::log(2.0 * std::numbers::pi * std::numbers::e) +
         0.5 * std::log(cov.partialPivLu().determinant());
}

/// Conditional covariance of block `keep` given block `given` of a joint cov.
inline Mat condition(const Mat& joint, const std::vector<Eigen::Index>& keep,
                     const std::vector<Eigen::Index>& given) {
  auto pick = [&](const std::vector<Eigen::Index>& r, const std::vector<Eigen::Index>& c) {
    Mat m(static_cast<Eigen::Index>(r.size()), static_cast<Eigen::Index>(c.size()));
    for (std::size_t i = 0; i < r.size(); ++i)
      for (std::size_t j = 0; j < c.size(); ++j) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = joint(r[i], c[j]);
    return m;
  };
  const Mat kk = pick(keep, keep);
  if (given.empty()) return kk;
  const Mat kg = pick(keep, given);
  const Mat gg = pick(given, given);
  return kk - kg * gg.partialPivLu().solve(kg.transpose());
}

inline std::vector<Annotation> random_annotations(std::mt19937_64& rng, int d, std::size_t count,
                                                  double lo, double hi) {
  std::vector<Annotation> out;
  std::normal_distribution<double> n(0.0, 2.0);
  for (std::size_t i = 0; i < count; ++i) {
    Annotation a;
    a.x = random_point(rng, d, lo, hi);
    a.y = a.x;
    for (int c = 0; c < d; ++c) a.y[c] += n(rng);
    a.sigma = random_spd(rng, d, 0.1, 4.0);
    out.push_back(a);
  }
  return out;
}

/// H(Phi_T | A) from the dense noiseless joint posterior over T.
inline double direct_target_entropy(const KernelSpec& k, const std::vector<Annotation>& anns,
                                    const PointList& targets) {
  return gaussian_entropy(naive_posterior(k, anns, targets).cov);
}

/// H(Phi_{T minus x} | A, Phi_x) computed directly: joint posterior over
/// T (plus x when it is not a member), then a Schur complement on x.
inline double direct_conditional_entropy(const KernelSpec& k, const std::vector<Annotation>& anns,
                                         const PointList& targets, const Vec& x) {
  const int d = k.dimension;
  PointList all = targets;
  std::size_t xi = targets.size();
  for (std::size_t i = 0; i < targets.size(); ++i)
    if (targets[i] == x) xi = i;
  if (xi == targets.size()) all.push_back(x);
  const Mat joint = naive_posterior(k, anns, all).cov;
  std::vector<Eigen::Index> keep, given;
  for (std::size_t i = 0; i < all.size(); ++i)
    for (int c = 0; c < d; ++c)
      (i == xi ? given : keep).push_back(static_cast<Eigen::Index>(i) * d + c);
  if (keep.empty()) return 0.0;
  return gaussian_entropy(condition(joint, keep, given));
}

/// Points in [lo, hi]^d at least `spacing` apart (rejection sampling).
inline PointList spaced_points(std::mt19937_64& rng, int d, std::size_t n, double lo, double hi,
                               double spacing) {
  PointList out;
  while (out.size() < n) {
    Vec p = random_point(rng, d, lo, hi);
    for (auto& v : p) v = std::round(v * 4.0) / 4.0;
    bool ok = true;
    for (const auto& q : out) ok = ok && (p - q).norm() >= spacing;
    if (ok) out.push_back(p);
  }
  return out;
}

}  // namespace regmark::oracle
