#pragma once

#include <iosfwd>
#include <span>
#include <vector>

#include "json.hpp"
#include "regmark/types.hpp"

namespace regmark {

inline constexpr double kDefaultAlpha = 0.01;

/// A queried fixed-image location `x`, the annotated moving-image location
/// `y`, and the covariance of the annotation error (pixel^2).
struct Annotation {
  Vec x;
  Vec y;
  Mat sigma;

  int dimension() const { return static_cast<int>(x.size()); }

  /// Shapes agree, sigma symmetric within 1e-12 and PSD.
  void validate() const;
};

/// Confidence region: the true location lies inside with probability 1 - alpha.
struct Ellipse {
  Vec center;
  Mat axes;   // columns are the orthonormal directions v_i
  Vec radii;  // semi-axis lengths r_i, pixels
  double alpha = kDefaultAlpha;

  void validate() const;
};

/// Sigma = V diag((r_i / gamma)^2) V^T with gamma from the chi-squared quantile.
Mat covariance_from_ellipse(const Ellipse& e);

/// Inverse map: axes are eigenvectors of sigma, radii = gamma sqrt(eigenvalues).
Ellipse ellipse_from_covariance(const Mat& sigma, const Vec& center,
                                double alpha = kDefaultAlpha);

/// Raises every eigenvalue of a symmetric matrix to at least `floor_variance`.
Mat floor_eigenvalues(const Mat& sigma, double floor_variance);

struct FusedAnnotation {
  Vec mean;
  Mat sigma;
};

/// Gaussian fit to several raters' points: sample mean and unbiased sample
/// covariance, floored at sigma_min^2 on every eigenvalue.
FusedAnnotation fuse_pointwise(const PointList& points, double sigma_min = kSigmaMin);

/// CSV with header x0..,y0..,s00,s01,.. (upper triangle of sigma, row-major).
void write_annotations_csv(std::ostream& os, std::span<const Annotation> annotations);
std::vector<Annotation> read_annotations_csv(std::istream& is);

void to_json(nlohmann::json& j, const Annotation& a);
void from_json(const nlohmann::json& j, Annotation& a);

/// Reads either format, chosen by file extension (.csv or .json).
std::vector<Annotation> load_annotations(const std::string& path);
void save_annotations(const std::string& path, std::span<const Annotation> annotations);

}  // namespace regmark
