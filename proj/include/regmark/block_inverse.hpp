#pragma once

#include "regmark/types.hpp"

namespace regmark {

/// Inverse of a symmetric positive definite matrix that grows by appending
/// block rows/columns. Each append solves only the Schur complement of the
/// new corner block:
///
///   [A  B]^-1   [A^-1 + W S^-1 W^T   -W S^-1]
///   [B' C]    = [-S^-1 W^T            S^-1  ],  W = A^-1 B,  S = C - B' W.
class BlockInverse {
 public:
  BlockInverse() = default;

  /// Dense inverse of `initial` through a (jittered) Cholesky factorization.
  explicit BlockInverse(const Mat& initial);

  /// Appends coupling B (n x m) and corner C (m x m). Returns the diagonal
  /// jitter that had to be added to C (0 when none).
  double append(const Mat& coupling, const Mat& corner);

  const Mat& inverse() const { return inverse_; }
  Eigen::Index size() const { return inverse_.rows(); }
  double initial_jitter() const { return initial_jitter_; }

 private:
  Mat inverse_;
  double initial_jitter_ = 0.0;
};

}  // namespace regmark
