#include "regmark/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <boost/math/special_functions/gamma.hpp>

namespace regmark {

double chi2_cdf(double x, int dof) {
  if (dof < 1) throw DomainError("chi2_cdf: degrees of freedom must be positive");
  if (!(x > 0.0)) return 0.0;
  if (std::isinf(x)) return 1.0;
  return boost::math::gamma_p(0.5 * dof, 0.5 * x);
}

double gamma_from_alpha(double alpha, int d) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw DomainError("gamma_from_alpha: alpha must lie in (0, 1)");
  }
  if (d < 1) throw DomainError("gamma_from_alpha: dimension must be positive");
  // P(chi2_d > gamma^2) = alpha.
  return std::sqrt(2.0 * boost::math::gamma_q_inv(0.5 * d, alpha));
}

double spd_log_det(const Mat& a) {
  Eigen::LLT<Mat> llt(a);
  if (llt.info() != Eigen::Success) {
    throw NumericalError("log-determinant: matrix is not positive definite");
  }
  const auto diag = llt.matrixLLT().diagonal();
  double sum = 0.0;
  for (Eigen::Index i = 0; i < diag.size(); ++i) sum += std::log(diag(i));
  return 2.0 * sum;
}

Mat symmetrized(const Mat& a) { return 0.5 * (a + a.transpose()); }

Mat clip_to_psd(const Mat& a) {
  Mat s = symmetrized(a);
  Eigen::SelfAdjointEigenSolver<Mat> eig(s);
  if (eig.eigenvalues().minCoeff() >= 0.0) return s;
  const Vec clipped = eig.eigenvalues().cwiseMax(0.0);
  return eig.eigenvectors() * clipped.asDiagonal() * eig.eigenvectors().transpose();
}

bool is_symmetric_psd(const Mat& a, double tol) {
  if (a.rows() != a.cols() || a.size() == 0) return false;
  if (!a.allFinite()) return false;
  const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
  if ((a - a.transpose()).cwiseAbs().maxCoeff() > tol * scale) return false;
  Eigen::SelfAdjointEigenSolver<Mat> eig(symmetrized(a));
  return eig.eigenvalues().minCoeff() >= -tol * scale;
}

JitteredCholesky cholesky_with_jitter(const Mat& a) {
  JitteredCholesky out;
  out.llt.compute(a);
  if (out.llt.info() == Eigen::Success) return out;
  const double mean_diag = std::max(a.diagonal().mean(), 1e-300);
  double jitter = 1e-10 * mean_diag;
  for (int attempt = 0; attempt < 4; ++attempt, jitter *= 100.0) {
    Mat shifted = a;
    shifted.diagonal().array() += jitter;
    out.llt.compute(shifted);
    if (out.llt.info() == Eigen::Success) {
      out.jitter = jitter;
      return out;
    }
  }
  throw NumericalError("Cholesky factorization failed after jitter escalation");
}

std::vector<double> average_ranks(std::span<const double> values) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i + 1;
    while (j < n && values[order[j]] == values[order[i]]) ++j;
    const double rank = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t k = i; k < j; ++k) ranks[order[k]] = rank;
    i = j;
  }
  return ranks;
}

double median(std::vector<double> values) { return quantile(std::move(values), 0.5); }

double quantile(std::vector<double> values, double q) {
  if (values.empty()) throw DomainError("quantile of an empty sample");
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

}  // namespace regmark
