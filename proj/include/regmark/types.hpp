#pragma once

#include <cstddef>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace regmark {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using PointList = std::vector<Vec>;

/// Maps a point of the fixed-image domain to the moving-image domain.
using PointMap = std::function<Vec(const Vec&)>;

/// Lower bound on the standard deviation of any annotation noise, in pixels.
inline constexpr double kSigmaMin = 0.25;

/// Base class of every error thrown by the library. `code()` is a short
/// machine-readable tag that the HTTP layer forwards to clients.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& what)
      : std::runtime_error(what), code_(std::move(code)) {}
  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

class DomainError : public Error {
 public:
  explicit DomainError(const std::string& what) : Error("domain_error", what) {}
};

class DimensionError : public Error {
 public:
  explicit DimensionError(const std::string& what) : Error("dimension_mismatch", what) {}
};

class ValidationError : public Error {
 public:
  ValidationError(const std::string& code, const std::string& what) : Error(code, what) {}
  explicit ValidationError(const std::string& what) : Error("invalid_input", what) {}
};

class NumericalError : public Error {
 public:
  explicit NumericalError(const std::string& what) : Error("numerical_failure", what) {}
};

class InsufficientDataError : public Error {
 public:
  explicit InsufficientDataError(const std::string& what) : Error("insufficient_data", what) {}
};

class EmptyPoolError : public Error {
 public:
  explicit EmptyPoolError(const std::string& what) : Error("empty_pool", what) {}
};

inline void require_dimension(const Vec& p, Eigen::Index d, const char* what) {
  if (p.size() != d) {
    throw DimensionError(std::string(what) + ": expected dimension " + std::to_string(d) +
                         ", got " + std::to_string(p.size()));
  }
}

}  // namespace regmark
