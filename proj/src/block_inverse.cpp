#include "regmark/block_inverse.hpp"

#include "regmark/stats.hpp"

namespace regmark {

BlockInverse::BlockInverse(const Mat& initial) {
  if (initial.size() == 0) return;
  const auto chol = cholesky_with_jitter(symmetrized(initial));
  initial_jitter_ = chol.jitter;
  inverse_ = symmetrized(chol.llt.solve(Mat::Identity(initial.rows(), initial.cols())));
}

double BlockInverse::append(const Mat& coupling, const Mat& corner) {
  const Eigen::Index n = inverse_.rows();
  const Eigen::Index m = corner.rows();
  if (coupling.rows() != n || coupling.cols() != m || corner.cols() != m) {
    throw DimensionError("BlockInverse::append: block shapes do not match");
  }
  if (n == 0) {
    const auto chol = cholesky_with_jitter(symmetrized(corner));
    inverse_ = symmetrized(chol.llt.solve(Mat::Identity(m, m)));
    return chol.jitter;
  }
  const Mat w = inverse_ * coupling;
  const Mat schur = symmetrized(corner - coupling.transpose() * w);
  const auto chol = cholesky_with_jitter(schur);
  const Mat schur_inv = symmetrized(chol.llt.solve(Mat::Identity(m, m)));
  const Mat w_s = w * schur_inv;

  Mat next(n + m, n + m);
  next.topLeftCorner(n, n) = inverse_ + w_s * w.transpose();
  next.topRightCorner(n, m) = -w_s;
  next.bottomLeftCorner(m, n) = -w_s.transpose();
  next.bottomRightCorner(m, m) = schur_inv;
  inverse_ = symmetrized(next);
  return chol.jitter;
}

}  // namespace regmark
