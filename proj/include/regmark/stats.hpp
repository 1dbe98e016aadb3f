#pragma once

#include <span>
#include <vector>

#include "regmark/types.hpp"

namespace regmark {

/// CDF of the chi-squared distribution with `dof` degrees of freedom.
double chi2_cdf(double x, int dof);

/// Solves chi2_cdf(gamma^2, d) = 1 - alpha for gamma > 0 by bisection.
double gamma_from_alpha(double alpha, int d);

/// Cholesky log-determinant of a symmetric positive definite matrix. Throws
/// NumericalError when the factorization fails.
double spd_log_det(const Mat& a);

/// Forces exact symmetry: (A + A^T) / 2.
Mat symmetrized(const Mat& a);

/// Symmetrizes and clips negative eigenvalues to zero.
Mat clip_to_psd(const Mat& a);

/// True when `a` is square, symmetric within `tol` (relative to its largest
/// entry) and has no eigenvalue below -tol * scale.
bool is_symmetric_psd(const Mat& a, double tol = 1e-12);

/// Result of a Cholesky factorization that may have needed diagonal jitter.
struct JitteredCholesky {
  Eigen::LLT<Mat> llt;
  double jitter = 0.0;  // absolute value added to the diagonal
};

/// Factorizes `a`, adding 1e-10 * mean(diag) * I on failure and escalating by
/// x100 at most three times. Throws NumericalError if all attempts fail.
JitteredCholesky cholesky_with_jitter(const Mat& a);

/// Ranks with ties assigned their average rank, 1-based.
std::vector<double> average_ranks(std::span<const double> values);

double median(std::vector<double> values);

/// Linear-interpolated quantile, q in [0, 1].
double quantile(std::vector<double> values, double q);

}  // namespace regmark
