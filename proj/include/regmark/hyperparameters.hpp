#pragma once

#include <span>
#include <vector>

#include "regmark/annotation.hpp"
#include "regmark/kernels.hpp"

namespace regmark {

struct OptimizerSettings {
  int max_iterations = 200;
  double relative_tolerance = 1e-7;
  double gradient_step = 1e-5;  // central differences in log-weight space
};

struct HyperparameterFit {
  KernelSpec spec;
  std::vector<double> loss_history;  // objective at every accepted iterate
  int iterations = 0;
  bool converged = false;
};

/// Block form of the leave-one-out predictive loss:
///   sum_l [ q_l^T D_ll^-1 q_l - log det D_ll ]
/// with D_ll the l-th diagonal block of K_AA^-1 and q = K_AA^-1 (Y - mu(X)).
double gpp_objective(const KernelSpec& spec, std::span<const Annotation> annotations,
                     const PointMap& mean = {});

/// Leave-one-out negative log predictive density,
///   -sum_l log N(y_l; mu_{|A(l)}(x_l), k_{|A(l)}(x_l, x_l) + Sigma_l)
///   = (L d / 2) log(2 pi) + gpp_objective / 2.
double gpp_loss(const KernelSpec& spec, std::span<const Annotation> annotations,
                const PointMap& mean = {});

/// Fits the bundle weights (scales fixed) by minimizing gpp_objective over
/// log-weights with nonlinear conjugate gradients. Weights that start at zero
/// stay at zero.
HyperparameterFit estimate_hyperparameters(std::span<const Annotation> annotations,
                                           const KernelSpec& initial,
                                           const OptimizerSettings& settings = {},
                                           const PointMap& mean = {});

}  // namespace regmark
