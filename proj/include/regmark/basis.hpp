#pragma once

namespace regmark {

/// Radial basis function family used at every scale of a kernel bundle.
enum class BasisKind { Gaussian, InverseQuadratic, Wendland1 };

/// Integral-normalization radii; r_W is fixed at 1 and the other two make the
/// integrals over [0, inf) agree with the Wendland function.
struct RescaleConstants {
  double gaussian;           // 2 / (3 sqrt(pi))
  double inverse_quadratic;  // 2 / (3 pi)
  double wendland;           // 1
};

inline constexpr RescaleConstants kRescale{
    0.37612638903183754,  // 2 / (3 * sqrt(pi))
    0.21220659078919379,  // 2 / (3 * pi)
    1.0,
};

inline constexpr double basis_radius(BasisKind kind) {
  switch (kind) {
    case BasisKind::Gaussian:
      return kRescale.gaussian;
    case BasisKind::InverseQuadratic:
      return kRescale.inverse_quadratic;
    case BasisKind::Wendland1:
      return kRescale.wendland;
  }
  return 1.0;
}

}  // namespace regmark
