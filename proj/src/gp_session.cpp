#include "regmark/gp_session.hpp"

#include <cmath>
#include <numbers>

#include "regmark/stats.hpp"

namespace regmark {

double gaussian_entropy_constant(int dimension) {
  return 0.5 * dimension * std::log(2.0 * std::numbers::pi * std::numbers::e);
}

GpSession::GpSession(KernelSpec spec, PointMap mean, GpOptions options)
    : spec_(std::move(spec)), mean_(std::move(mean)), options_(options) {
  spec_.validate();
  if (!(options_.sigma_min > 0.0)) {
    throw ValidationError("invalid_options", "sigma_min must be positive");
  }
  if (!(options_.target_noise >= 0.0)) {
    throw ValidationError("invalid_options", "target_noise must be nonnegative");
  }
  weights_.resize(0);
}

Vec GpSession::prior_mean(const Vec& x) const { return mean_ ? mean_(x) : x; }

Mat GpSession::gram() const {
  std::vector<Mat> noise;
  noise.reserve(annotations_.size());
  for (const auto& a : annotations_) noise.push_back(a.sigma);
  return gram_matrix(spec_, locations_, noise);
}

void GpSession::add_annotation(Annotation a) {
  a.validate();
  require_dimension(a.x, spec_.dimension, "add_annotation");
  a.sigma = floor_eigenvalues(a.sigma, options_.sigma_min * options_.sigma_min);

  const Mat coupling = annotation_column(a.x);
  const Mat corner = kernel_eval(spec_, a.x, a.x) + a.sigma;
  const double jitter = inverse_.append(coupling, corner);
  if (jitter > 0.0) a.sigma.diagonal().array() += jitter;

  if (targets_) {
    auto next = std::make_shared<TargetCache>(*targets_);
    Mat target_coupling(coupling.rows() + static_cast<Eigen::Index>(next->points.size()) *
                                              spec_.dimension,
                        spec_.dimension);
    target_coupling << cross_column(spec_, next->points, a.x), coupling;
    next->inverse.append(target_coupling, kernel_eval(spec_, a.x, a.x) + a.sigma);
    targets_ = std::move(next);
  }

  locations_.push_back(a.x);
  annotations_.push_back(std::move(a));
  refresh_weights();
}

void GpSession::refresh_weights() {
  const int d = spec_.dimension;
  Vec residual(static_cast<Eigen::Index>(annotations_.size()) * d);
  for (std::size_t l = 0; l < annotations_.size(); ++l) {
    residual.segment(static_cast<Eigen::Index>(l) * d, d) =
        annotations_[l].y - prior_mean(annotations_[l].x);
  }
  weights_ = inverse_.inverse() * residual;
}

Mat GpSession::annotation_column(const Vec& x) const {
  return cross_column(spec_, locations_, x);
}

Vec GpSession::posterior_mean(const Vec& x) const {
  require_dimension(x, spec_.dimension, "posterior_mean");
  Vec mean = prior_mean(x);
  if (annotations_.empty()) return mean;
  return mean + annotation_column(x).transpose() * weights_;
}

PosteriorGaussian GpSession::posterior_at(const Vec& x) const {
  require_dimension(x, spec_.dimension, "posterior_at");
  PosteriorGaussian out;
  out.mean = prior_mean(x);
  Mat cov = kernel_eval(spec_, x, x);
  if (!annotations_.empty()) {
    const Mat kx = annotation_column(x);
    out.mean += kx.transpose() * weights_;
    cov -= kx.transpose() * inverse_.inverse() * kx;
  }
  out.cov = clip_to_psd(cov);
  return out;
}

Mat GpSession::posterior_cross_cov(const Vec& x, const Vec& x2) const {
  Mat cov = kernel_eval(spec_, x, x2);
  if (annotations_.empty()) return cov;
  return cov - annotation_column(x).transpose() * inverse_.inverse() * annotation_column(x2);
}

Mat GpSession::posterior_covariance(const PointList& points) const {
  Mat cov = cross_covariance(spec_, points, points);
  if (!annotations_.empty()) {
    const Mat kxt = cross_covariance(spec_, locations_, points);
    cov -= kxt.transpose() * inverse_.inverse() * kxt;
  }
  return symmetrized(cov);
}

double GpSession::joint_entropy(const PointList& points, double nugget) const {
  if (points.empty()) throw ValidationError("empty_targets", "joint_entropy: no target points");
  for (std::size_t i = 0; i < points.size(); ++i) {
    require_dimension(points[i], spec_.dimension, "joint_entropy");
    for (std::size_t j = 0; j < i; ++j) {
      if ((points[i] - points[j]).norm() == 0.0) {
        throw ValidationError("duplicate_targets", "joint_entropy: target points must be distinct");
      }
    }
  }
  Mat cov = posterior_covariance(points);
  if (nugget < 0.0) throw DomainError("joint_entropy: negative nugget");
  cov.diagonal().array() += nugget;
  double log_det = 0.0;
  try {
    log_det = spd_log_det(cov);
  } catch (const NumericalError&) {
    throw NumericalError("joint_entropy: degenerate conditional covariance");
  }
  return gaussian_entropy_constant(spec_.dimension) * static_cast<double>(points.size()) +
         0.5 * log_det;
}

double GpSession::log_det_conditional(const Vec& x) const {
  return 0.5 * std::log(posterior_at(x).cov.determinant());
}

void GpSession::attach_targets(PointList targets) {
  for (const auto& t : targets) require_dimension(t, spec_.dimension, "attach_targets");
  auto cache = std::make_shared<TargetCache>();
  cache->points = std::move(targets);
  Mat k_tt = cross_covariance(spec_, cache->points, cache->points);
  k_tt.diagonal().array() += options_.target_noise;
  cache->inverse = BlockInverse(k_tt);
  PointList prefix = cache->points;
  for (const auto& a : annotations_) {
    Mat coupling = cross_column(spec_, prefix, a.x);
    cache->inverse.append(coupling, kernel_eval(spec_, a.x, a.x) + a.sigma);
    prefix.push_back(a.x);
  }
  targets_ = std::move(cache);
}

void GpSession::detach_targets() { targets_.reset(); }

const PointList& GpSession::target_points() const {
  if (!targets_) throw ValidationError("no_targets", "no target set attached to the session");
  return targets_->points;
}

double GpSession::log_det_conditional_given_targets(const Vec& x) const {
  if (!targets_) throw ValidationError("no_targets", "no target set attached to the session");
  require_dimension(x, spec_.dimension, "log_det_conditional_given_targets");
  const int d = spec_.dimension;
  const auto n_t = static_cast<Eigen::Index>(targets_->points.size()) * d;
  Mat column(n_t + static_cast<Eigen::Index>(annotations_.size()) * d, d);
  column.topRows(n_t) = cross_column(spec_, targets_->points, x);
  if (!annotations_.empty()) column.bottomRows(column.rows() - n_t) = annotation_column(x);
  const Mat cov =
      kernel_eval(spec_, x, x) - column.transpose() * targets_->inverse.inverse() * column;
  return 0.5 * std::log(clip_to_psd(cov).determinant());
}

GpSession add_annotation(const GpSession& session, Annotation a) {
  GpSession next = session;
  next.add_annotation(std::move(a));
  return next;
}

nlohmann::json session_to_json(const GpSession& session) {
  if (session.has_custom_mean()) {
    throw ValidationError("unsupported_mean", "sessions with a custom mean cannot be persisted");
  }
  return nlohmann::json{{"kernel", session.spec()},
                        {"annotations", session.annotations()},
                        {"mean", "identity"},
                        {"sigma_min", session.options().sigma_min},
                        {"target_noise", session.options().target_noise}};
}

GpSession session_from_json(const nlohmann::json& j) {
  try {
    if (j.value("mean", std::string("identity")) != "identity") {
      throw ValidationError("unsupported_mean", "only the identity mean can be loaded");
    }
    GpOptions options;
    options.sigma_min = j.value("sigma_min", kSigmaMin);
    options.target_noise = j.value("target_noise", kSigmaMin * kSigmaMin);
    GpSession session(j.at("kernel").get<KernelSpec>(), {}, options);
    for (const auto& a : j.at("annotations")) session.add_annotation(a.get<Annotation>());
    return session;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("invalid_session", std::string("session JSON: ") + e.what());
  }
}

}  // namespace regmark
