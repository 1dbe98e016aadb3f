#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "regmark/annotation.hpp"
#include "regmark/block_inverse.hpp"
#include "regmark/kernels.hpp"
#include "regmark/types.hpp"

namespace regmark {

/// Gaussian marginal of the posterior deformation at one point.
struct PosteriorGaussian {
  Vec mean;
  Mat cov;
};

struct GpOptions {
  /// Every annotation covariance is floored at sigma_min^2 per eigenvalue.
  double sigma_min = kSigmaMin;
  /// Variance of the pseudo-observations of the target set used by the
  /// candidate-outside-targets entropy branch. Zero conditions on exact
  /// values (dense target lattices may then be numerically singular).
  double target_noise = kSigmaMin * kSigmaMin;
};

/// d/2 log(2 pi e): entropy of a standard d-variate normal minus log-det term.
double gaussian_entropy_constant(int dimension);

/// Posterior Gaussian process over the deformation given noisy annotations.
///
/// Keeps the inverse of K_AA = K_XX + diag(Sigma_l) up to date through
/// block updates, plus (optionally) the inverse of the joint matrix over
/// [target points; annotations] used for candidates outside the target set.
/// Copies are independent values; const members are safe to call from many
/// threads at once.
class GpSession {
 public:
  explicit GpSession(KernelSpec spec, PointMap mean = {}, GpOptions options = {});

  const KernelSpec& spec() const { return spec_; }
  const GpOptions& options() const { return options_; }
  int dimension() const { return spec_.dimension; }
  std::size_t size() const { return annotations_.size(); }
  const std::vector<Annotation>& annotations() const { return annotations_; }
  const PointList& locations() const { return locations_; }
  bool has_custom_mean() const { return static_cast<bool>(mean_); }

  /// Cached (Ld x Ld) inverse of the noisy Gram matrix.
  const Mat& inverse_gram() const { return inverse_.inverse(); }

  /// Dense K_AA assembled from scratch (for checks and diagnostics).
  Mat gram() const;

  /// Appends an annotation (sigma floored at sigma_min^2) and updates every
  /// cached inverse by a block update.
  void add_annotation(Annotation a);

  Vec prior_mean(const Vec& x) const;

  /// K_X(x): blocks k(x_l, x) stacked over the annotations.
  Mat annotation_column(const Vec& x) const;

  PosteriorGaussian posterior_at(const Vec& x) const;
  Vec posterior_mean(const Vec& x) const;
  Mat posterior_cross_cov(const Vec& x, const Vec& x2) const;

  /// K_TT|A for a list of points (symmetrized, not clipped).
  Mat posterior_covariance(const PointList& points) const;

  /// H(Phi_T | A) in nats. Throws ValidationError on duplicate points and
  /// NumericalError when the conditional covariance is singular. A positive
  /// `nugget` is added to the diagonal first, giving the entropy of noisy
  /// pseudo-observations of Phi_T.
  double joint_entropy(const PointList& points, double nugget = 0.0) const;

  /// 1/2 log det of the posterior covariance at x.
  double log_det_conditional(const Vec& x) const;

  /// Attaches a target set, caching the inverse of K over [T; A].
  void attach_targets(PointList targets);
  void detach_targets();
  bool has_targets() const { return targets_ != nullptr; }
  const PointList& target_points() const;

  /// 1/2 log det cov(phi(x) | Phi_T, A), with T the attached targets.
  double log_det_conditional_given_targets(const Vec& x) const;

 private:
  struct TargetCache {
    PointList points;
    BlockInverse inverse;  // ordered [targets; annotations]
  };

  void refresh_weights();

  KernelSpec spec_;
  PointMap mean_;
  GpOptions options_;
  std::vector<Annotation> annotations_;
  PointList locations_;
  BlockInverse inverse_;
  Vec weights_;  // K_AA^-1 (Y - mu(X))
  std::shared_ptr<const TargetCache> targets_;
};

/// Value-semantics form: returns a new session with `a` appended.
GpSession add_annotation(const GpSession& session, Annotation a);

/// Session JSON: {"kernel", "annotations", "mean": "identity", "sigma_min"}.
/// Caches are rebuilt on load; custom mean functions cannot be persisted.
nlohmann::json session_to_json(const GpSession& session);
GpSession session_from_json(const nlohmann::json& j);

}  // namespace regmark
