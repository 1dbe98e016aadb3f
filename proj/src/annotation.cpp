#include "regmark/annotation.hpp"

#include <cmath>

#include "regmark/stats.hpp"

namespace regmark {

void Annotation::validate() const {
  const auto d = x.size();
  if (d != 2 && d != 3) throw ValidationError("invalid_annotation", "annotation dimension must be 2 or 3");
  if (y.size() != d || sigma.rows() != d || sigma.cols() != d) {
    throw ValidationError("invalid_annotation", "annotation x, y and sigma must share dimension");
  }
  if (!x.allFinite() || !y.allFinite()) {
    throw ValidationError("invalid_annotation", "annotation coordinates must be finite");
  }
  if (!is_symmetric_psd(sigma, 1e-12)) {
    throw ValidationError("invalid_covariance", "annotation covariance must be symmetric PSD");
  }
}

void Ellipse::validate() const {
  const auto d = center.size();
  if (axes.rows() != d || axes.cols() != d || radii.size() != d) {
    throw ValidationError("invalid_ellipse", "ellipse axes and radii must match its dimension");
  }
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw ValidationError("invalid_ellipse", "ellipse alpha must lie in (0, 1)");
  }
  for (Eigen::Index i = 0; i < d; ++i) {
    if (!(radii(i) > 0.0) || !std::isfinite(radii(i))) {
      throw ValidationError("invalid_ellipse", "ellipse radii must be positive");
    }
  }
  const Mat gram = axes.transpose() * axes;
  if ((gram - Mat::Identity(d, d)).cwiseAbs().maxCoeff() > 1e-9) {
    throw ValidationError("invalid_ellipse", "ellipse axes must be orthonormal");
  }
}

Mat covariance_from_ellipse(const Ellipse& e) {
  e.validate();
  const int d = static_cast<int>(e.center.size());
  const double gamma = gamma_from_alpha(e.alpha, d);
  const Vec variances = (e.radii / gamma).array().square();
  return symmetrized(e.axes * variances.asDiagonal() * e.axes.transpose());
}

Ellipse ellipse_from_covariance(const Mat& sigma, const Vec& center, double alpha) {
  if (sigma.rows() != sigma.cols() || sigma.rows() != center.size()) {
    throw DimensionError("ellipse_from_covariance: shape mismatch");
  }
  if (!is_symmetric_psd(sigma, 1e-12)) {
    throw ValidationError("invalid_covariance", "ellipse_from_covariance: sigma must be symmetric PSD");
  }
  const int d = static_cast<int>(center.size());
  Eigen::SelfAdjointEigenSolver<Mat> eig(symmetrized(sigma));
  Ellipse e;
  e.center = center;
  e.axes = eig.eigenvectors();
  e.radii = gamma_from_alpha(alpha, d) * eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  e.alpha = alpha;
  return e;
}

Mat floor_eigenvalues(const Mat& sigma, double floor_variance) {
  Eigen::SelfAdjointEigenSolver<Mat> eig(symmetrized(sigma));
  if (eig.eigenvalues().minCoeff() >= floor_variance) return symmetrized(sigma);
  const Vec floored = eig.eigenvalues().cwiseMax(floor_variance);
  return symmetrized(eig.eigenvectors() * floored.asDiagonal() * eig.eigenvectors().transpose());
}

FusedAnnotation fuse_pointwise(const PointList& points, double sigma_min) {
  if (points.empty()) throw InsufficientDataError("fuse_pointwise: no points");
  const auto d = points.front().size();
  for (const auto& p : points) require_dimension(p, d, "fuse_pointwise");

  FusedAnnotation out;
  out.mean = Vec::Zero(d);
  for (const auto& p : points) out.mean += p;
  out.mean /= static_cast<double>(points.size());

  Mat cov = Mat::Zero(d, d);
  if (points.size() >= 2) {
    for (const auto& p : points) {
      const Vec c = p - out.mean;
      cov += c * c.transpose();
    }
    cov /= static_cast<double>(points.size() - 1);
  }
  out.sigma = floor_eigenvalues(cov, sigma_min * sigma_min);
  return out;
}

}  // namespace regmark
