#include "regmark/simd/dispatch.hpp"

#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string_view>

namespace regmark::simd {
namespace {

bool cpu_has_avx2() {
#if defined(REGMARK_HAVE_AVX2_TU) && (defined(__x86_64__) || defined(__i386__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

std::atomic<int> g_forced{-1};

}  // namespace

const char* level_name(Level level) {
  switch (level) {
    case Level::Scalar:
      return "scalar";
    case Level::Avx2:
      return "avx2";
  }
  return "unknown";
}

// REGMARK_SIMD=scalar in the environment disables the AVX2 path.
Level detected_level() {
  static const Level level = [] {
    const char* env = std::getenv("REGMARK_SIMD");
    if (env && std::string_view(env) == "scalar") return Level::Scalar;
    return cpu_has_avx2() ? Level::Avx2 : Level::Scalar;
  }();
  return level;
}

Level active_level() {
  const int forced = g_forced.load(std::memory_order_relaxed);
  return forced < 0 ? detected_level() : static_cast<Level>(forced);
}

void force_level(std::optional<Level> level) {
  if (!level) {
    g_forced.store(-1);
    return;
  }
  if (*level == Level::Avx2 && detected_level() != Level::Avx2) {
    throw std::invalid_argument("AVX2 is not available on this CPU/build");
  }
  g_forced.store(static_cast<int>(*level));
}

void radial_bundle(const BundleParams& params, std::span<const double> dist,
                   std::span<double> out) {
#if defined(REGMARK_HAVE_AVX2_TU)
  if (active_level() == Level::Avx2) return avx2::radial_bundle(params, dist, out);
#endif
  scalar::radial_bundle(params, dist, out);
}

void compose_2d(const Field2d& outer, const Field2d& inner, std::span<double> out_x,
                std::span<double> out_y) {
#if defined(REGMARK_HAVE_AVX2_TU)
  if (active_level() == Level::Avx2) return avx2::compose_2d(outer, inner, out_x, out_y);
#endif
  scalar::compose_2d(outer, inner, out_x, out_y);
}

}  // namespace regmark::simd
