#include "regmark/hyperparameters.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "regmark/stats.hpp"

namespace regmark {
namespace {

Vec residuals(std::span<const Annotation> annotations, const PointMap& mean, int d) {
  Vec r(static_cast<Eigen::Index>(annotations.size()) * d);
  for (std::size_t l = 0; l < annotations.size(); ++l) {
    const Vec& x = annotations[l].x;
    r.segment(static_cast<Eigen::Index>(l) * d, d) = annotations[l].y - (mean ? mean(x) : x);
  }
  return r;
}

Mat noisy_gram(const KernelSpec& spec, std::span<const Annotation> annotations) {
  PointList xs;
  std::vector<Mat> noise;
  for (const auto& a : annotations) {
    xs.push_back(a.x);
    noise.push_back(a.sigma);
  }
  return gram_matrix(spec, xs, noise);
}

}  // namespace

double gpp_objective(const KernelSpec& spec, std::span<const Annotation> annotations,
                     const PointMap& mean) {
  if (annotations.size() < 2) {
    throw InsufficientDataError("GPP loss needs at least two annotations");
  }
  const int d = spec.dimension;
  const Mat k = noisy_gram(spec, annotations);
  const auto chol = cholesky_with_jitter(k);
  const Mat k_inv = chol.llt.solve(Mat::Identity(k.rows(), k.cols()));
  const Vec q = k_inv * residuals(annotations, mean, d);

  double total = 0.0;
  for (std::size_t l = 0; l < annotations.size(); ++l) {
    const auto off = static_cast<Eigen::Index>(l) * d;
    const Mat block = symmetrized(k_inv.block(off, off, d, d));
    const Eigen::LLT<Mat> llt(block);
    if (llt.info() != Eigen::Success) {
      throw NumericalError("GPP loss: diagonal block of the inverse is not positive definite");
    }
    const Vec ql = q.segment(off, d);
    total += ql.dot(llt.solve(ql)) - spd_log_det(block);
  }
  return total;
}

double gpp_loss(const KernelSpec& spec, std::span<const Annotation> annotations,
                const PointMap& mean) {
  const double ld = static_cast<double>(annotations.size()) * spec.dimension;
  return 0.5 * ld * std::log(2.0 * std::numbers::pi) +
         0.5 * gpp_objective(spec, annotations, mean);
}

HyperparameterFit estimate_hyperparameters(std::span<const Annotation> annotations,
                                           const KernelSpec& initial,
                                           const OptimizerSettings& settings,
                                           const PointMap& mean) {
  initial.validate();
  if (annotations.size() < 2) {
    throw InsufficientDataError("hyperparameter estimation needs at least two annotations");
  }
  for (const auto& a : annotations) require_dimension(a.x, initial.dimension, "annotation");

  // Only strictly positive weights are free; they are optimized in log space.
  std::vector<std::size_t> free;
  for (std::size_t s = 0; s < initial.weights.size(); ++s) {
    if (initial.weights[s] > 0.0) free.push_back(s);
  }
  const auto n = static_cast<Eigen::Index>(free.size());

  auto spec_at = [&](const Vec& z) {
    KernelSpec spec = initial;
    for (Eigen::Index i = 0; i < n; ++i) spec.weights[free[i]] = std::exp(z(i));
    return spec;
  };
  auto objective = [&](const Vec& z) {
    try {
      return gpp_objective(spec_at(z), annotations, mean);
    } catch (const NumericalError&) {
      return std::numeric_limits<double>::infinity();
    }
  };
  auto gradient = [&](const Vec& z) {
    Vec g(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      Vec zp = z;
      Vec zm = z;
      zp(i) += settings.gradient_step;
      zm(i) -= settings.gradient_step;
      g(i) = (objective(zp) - objective(zm)) / (2.0 * settings.gradient_step);
    }
    return g;
  };

  HyperparameterFit fit;
  Vec z(n);
  for (Eigen::Index i = 0; i < n; ++i) z(i) = std::log(initial.weights[free[i]]);
  double f = gpp_objective(spec_at(z), annotations, mean);
  fit.loss_history.push_back(f);

  Vec g = gradient(z);
  Vec dir = -g;
  for (int iter = 0; iter < settings.max_iterations; ++iter) {
    if (!g.allFinite() || g.norm() < 1e-12) {
      fit.converged = true;
      break;
    }
    double slope = g.dot(dir);
    if (!(slope < 0.0)) {
      dir = -g;
      slope = -g.squaredNorm();
    }
    // Backtracking Armijo line search; accepted points never raise the loss.
    double step = 1.0 / std::max(1.0, dir.norm());
    double f_new = f;
    Vec z_new = z;
    bool accepted = false;
    for (int k = 0; k < 60; ++k, step *= 0.5) {
      z_new = z + step * dir;
      f_new = objective(z_new);
      if (std::isfinite(f_new) && f_new <= f + 1e-4 * step * slope) {
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      fit.converged = true;
      break;
    }
    const double change = std::abs(f - f_new) / std::max(std::abs(f), 1e-12);
    z = z_new;
    f = f_new;
    fit.loss_history.push_back(f);
    fit.iterations = iter + 1;
    if (change < settings.relative_tolerance) {
      fit.converged = true;
      break;
    }
    const Vec g_new = gradient(z);
    const double beta = std::max(0.0, g_new.dot(g_new - g) / std::max(g.squaredNorm(), 1e-300));
    dir = -g_new + beta * dir;
    g = g_new;
  }
  fit.spec = spec_at(z);
  return fit;
}

}  // namespace regmark
