#pragma once

// Data-parallel inner loops with a scalar reference implementation and an
// AVX2 variant. The variant is chosen once at startup from CPUID; tests can
// pin either path with force_level().

#include <optional>
#include <span>

#include "regmark/basis.hpp"

namespace regmark::simd {

enum class Level { Scalar, Avx2 };

const char* level_name(Level level);

/// Best level supported by both the build and the running CPU.
Level detected_level();

/// Level used by the dispatched entry points below.
Level active_level();

/// Pins the dispatch level (nullopt restores auto-detection). Throws
/// std::invalid_argument for a level the CPU cannot run.
void force_level(std::optional<Level> level);

/// Parameters of one kernel bundle: scaled distance at scale s is
/// dist * inv_radii[s], with inv_radii[s] = 1 / (rho_s * r_kind).
struct BundleParams {
  BasisKind kind;
  std::span<const double> inv_radii;
  std::span<const double> weights;
};

/// out[i] = sum_s weights[s] * K(dist[i] * inv_radii[s]).
void radial_bundle(const BundleParams& params, std::span<const double> dist,
                   std::span<double> out);

/// A 2-D displacement field sampled on the integer lattice
/// {0..nx-1} x {0..ny-1}, row-major with x fastest.
struct Field2d {
  std::span<const double> ux;
  std::span<const double> uy;
  int nx;
  int ny;
};

/// Composition of displacement fields: out(p) = inner(p) + outer(p + inner(p)),
/// i.e. the displacement of (id + outer) o (id + inner). The outer field is
/// sampled bilinearly with coordinates clamped to the lattice.
void compose_2d(const Field2d& outer, const Field2d& inner, std::span<double> out_x,
                std::span<double> out_y);

namespace scalar {
void radial_bundle(const BundleParams& params, std::span<const double> dist,
                   std::span<double> out);
void compose_2d(const Field2d& outer, const Field2d& inner, std::span<double> out_x,
                std::span<double> out_y);
}  // namespace scalar

namespace avx2 {
void radial_bundle(const BundleParams& params, std::span<const double> dist,
                   std::span<double> out);
void compose_2d(const Field2d& outer, const Field2d& inner, std::span<double> out_x,
                std::span<double> out_y);
}  // namespace avx2

}  // namespace regmark::simd
