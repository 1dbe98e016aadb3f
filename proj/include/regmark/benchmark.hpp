#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "regmark/kernels.hpp"
#include "regmark/synth.hpp"

namespace regmark {

enum class TargetMode { Full, Quadrant };

struct KernelConfig {
  BasisKind basis = BasisKind::Wendland1;
  double rho1 = 10.0;
  std::size_t scales = 0;       // 0: enough dyadic scales to span the domain
  std::vector<double> weights;  // empty: learned on a training deformation
  std::size_t training_annotations = 40;
  double initial_weight = 1.0;
};

struct RankingConfig {
  bool enabled = false;
  std::size_t candidates = 20;  // K perturbed transformations
  std::size_t budget = 25;      // annotations used for scoring
  Strategy strategy = Strategy::Entropy;
  double min_amplitude = 0.25;  // true s2 of the best and worst candidate, pixels
  double max_amplitude = 5.0;
  int target_stride = 4;
};

struct BenchmarkConfig {
  std::size_t runs = 10;
  std::uint64_t seed = 1;
  int threads = 0;  // 0: hardware concurrency
  std::vector<int> domain{128, 128};
  double control_spacing = 0.0;
  double amplitude = -1.0;
  std::vector<Strategy> strategies{Strategy::Entropy, Strategy::Heuristic, Strategy::Random};
  std::size_t budget = 30;
  std::size_t candidates = 60;
  std::size_t evaluation_points = 60;
  AnnotatorProfile annotator;
  TargetMode target_mode = TargetMode::Full;
  int target_lattice = 8;  // quadrant mode: lattice points per axis
  KernelConfig kernel;
  RankingConfig ranking;
  bool save_fields = false;

  void validate() const;
};

void to_json(nlohmann::json& j, const BenchmarkConfig& c);
/// Unknown keys and out-of-range values throw ValidationError("invalid_config").
void from_json(const nlohmann::json& j, BenchmarkConfig& c);
BenchmarkConfig load_benchmark_config(const std::string& path);

struct RankingRecord {
  std::vector<double> true_s2;
  std::array<std::optional<double>, 3> spearman_landmark;
  std::array<std::optional<double>, 3> spearman_proposed;
  std::array<double, 3> mae_landmark{};
  std::array<double, 3> mae_proposed{};
};

struct RunRecord {
  std::size_t run = 0;
  std::uint64_t seed = 0;
  /// RMSE of the posterior mean on the evaluation points after 0..budget
  /// annotations, per strategy name.
  std::map<std::string, std::vector<double>> rmse;
  std::optional<RankingRecord> ranking;
  std::optional<TransformField> truth;  // kept when save_fields is set
};

struct BenchmarkResult {
  BenchmarkConfig config;
  KernelSpec kernel;
  std::vector<RunRecord> runs;
};

/// Kernel used by every run: explicit weights, or weights fitted by the
/// leave-one-out loss on a training deformation that no run sees.
KernelSpec benchmark_kernel(const BenchmarkConfig& config);

/// One repetition; deterministic in (config, kernel, run index).
RunRecord run_single(const BenchmarkConfig& config, const KernelSpec& kernel, std::size_t run);

/// All repetitions, in parallel over runs.
BenchmarkResult run_benchmark(const BenchmarkConfig& config);

/// Long format: run,strategy,iteration,metric,value.
std::string results_csv(const BenchmarkResult& result);

/// Medians and deciles per strategy and of paired differences.
nlohmann::json summary_json(const BenchmarkResult& result);

/// Writes results.csv, summary.json, kernel.json (and fields/ if requested).
void write_benchmark_outputs(const BenchmarkResult& result, const std::filesystem::path& out_dir);

}  // namespace regmark
