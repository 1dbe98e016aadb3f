// Command-line entry points: benchmark, evaluate, maps, serve.

#include <csignal>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "regmark/benchmark.hpp"
#include "regmark/evaluation.hpp"
#include "regmark/http_api.hpp"
#include "regmark/image_io.hpp"
#include "regmark/maps.hpp"

// After Eigen: <resolv.h> defines a _res macro that clashes with it.
#include "httplib.h"

namespace fs = std::filesystem;
using namespace regmark;

namespace {

httplib::Server* g_server = nullptr;

void stop_server(int) {
  if (g_server != nullptr) g_server->stop();
}

KernelSpec load_kernel(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("io_error", "cannot open kernel " + path);
  nlohmann::json j;
  in >> j;
  return j.get<KernelSpec>();
}

PointList load_points(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("io_error", "cannot open " + path);
  nlohmann::json j;
  in >> j;
  PointList pts;
  for (const auto& p : j) {
    const auto v = p.get<std::vector<double>>();
    pts.push_back(Eigen::Map<const Vec>(v.data(), static_cast<Eigen::Index>(v.size())));
  }
  return pts;
}

PointList lattice_points(const GridGeometry& g, int stride) {
  const GridGeometry s = g.strided(stride);
  PointList pts;
  for (std::size_t f = 0; f < s.node_count(); ++f) pts.push_back(s.node(f));
  return pts;
}

struct BenchmarkArgs {
  std::string config;
  std::string out = "benchmark_out";
  std::optional<std::uint64_t> seed;
  std::optional<std::string> strategy;
  std::optional<std::string> kernel;
  std::optional<std::size_t> budget;
  std::optional<double> alpha;
  std::optional<std::size_t> runs;
  std::optional<int> threads;
};

int cmd_benchmark(const BenchmarkArgs& a) {
  BenchmarkConfig c = load_benchmark_config(a.config);
  if (a.seed) c.seed = *a.seed;
  if (a.strategy) c.strategies = {parse_strategy(*a.strategy)};
  if (a.budget) c.budget = *a.budget;
  if (a.alpha) c.annotator.alpha = *a.alpha;
  if (a.runs) c.runs = *a.runs;
  if (a.threads) c.threads = *a.threads;
  if (a.kernel) {
    const KernelSpec k = load_kernel(*a.kernel);
    c.kernel.basis = k.basis;
    c.kernel.rho1 = k.scales.front();
    c.kernel.scales = k.scales.size();
    c.kernel.weights = k.weights;
  }
  if (c.ranking.enabled && std::find(c.strategies.begin(), c.strategies.end(), c.ranking.strategy) ==
                               c.strategies.end()) {
    c.ranking.enabled = false;
  }
  c.validate();
  const BenchmarkResult r = run_benchmark(c);
  write_benchmark_outputs(r, a.out);
  std::cout << "wrote " << (fs::path(a.out) / "results.csv").string() << " and summary.json ("
            << r.runs.size() << " runs)\n";
  return 0;
}

struct EvaluateArgs {
  std::string annotations;
  std::string transforms;
  std::string kernel;
  std::string out = "evaluation_out";
  std::optional<std::string> targets;
  int stride = 0;
  double sigma_min = kSigmaMin;
};

int cmd_evaluate(const EvaluateArgs& a) {
  const auto annotations = load_annotations(a.annotations);
  const KernelSpec kernel = load_kernel(a.kernel);
  GpOptions opt;
  opt.sigma_min = a.sigma_min;
  GpSession session(kernel, {}, opt);
  for (const auto& an : annotations) session.add_annotation(an);

  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(a.transforms)) {
    if (e.path().extension() == ".json") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) throw ValidationError("no transforms (*.json) in " + a.transforms);

  std::vector<std::string> ids;
  std::vector<ScoreTriple> landmark, proposed;
  std::optional<PointList> targets;
  if (a.targets) targets = load_points(*a.targets);
  for (const auto& f : files) {
    const TransformField phi = load_field(f.string());
    if (phi.dimension() != kernel.dimension) {
      throw DimensionError(f.filename().string() + ": transform and kernel dimensions differ");
    }
    if (!targets) {
      targets = lattice_points(phi.geometry(), a.stride > 0 ? a.stride : default_map_stride(phi.dimension()));
    }
    const PointMap map = phi.as_map();
    ids.push_back(f.stem().string());
    ScoreTriple l{};
    if (!annotations.empty()) {
      l = {landmark_score(map, annotations, Norm::L1), landmark_score(map, annotations, Norm::L2),
           landmark_score(map, annotations, Norm::Linf)};
    }
    landmark.push_back(l);
    proposed.push_back(score_triple(map, [&](const Vec& x) { return session.posterior_mean(x); }, *targets));
  }
  fs::create_directories(a.out);
  std::ofstream lo(fs::path(a.out) / "landmark_scores.csv");
  write_report_csv(lo, make_report("landmark", ids, landmark));
  std::ofstream po(fs::path(a.out) / "proposed_scores.csv");
  write_report_csv(po, make_report("proposed", ids, proposed));
  std::cout << "scored " << ids.size() << " transforms\n";
  return 0;
}

struct MapsArgs {
  std::string session;
  std::string transform;
  std::string out = "maps_out";
  std::optional<std::string> fixed;
  int stride = 0;
};

int cmd_maps(const MapsArgs& a) {
  std::ifstream in(a.session);
  if (!in) throw ValidationError("io_error", "cannot open session " + a.session);
  nlohmann::json j;
  in >> j;
  const GpSession session = session_from_json(j);
  const TransformField phi = load_field(a.transform);
  if (phi.dimension() != session.dimension()) throw DimensionError("transform and session dimensions differ");
  const GridGeometry& full = phi.geometry();
  const GridGeometry grid = full.strided(a.stride > 0 ? a.stride : default_map_stride(full.dimension()));

  const ScalarImage error = resample(error_heat_map(phi.as_map(), session, grid), full);
  const ScalarImage entropy = resample(entropy_map(session, grid), full);
  fs::create_directories(a.out);
  const fs::path out(a.out);
  export_map((out / "error_map").string(), error);
  export_map((out / "entropy_map").string(), entropy);
  if (full.dimension() == 2) {
    std::optional<ScalarImage> fixed;
    if (a.fixed) fixed = read_image(*a.fixed);
    write_png((out / "blended_map.png").string(), blended_map(error, entropy, fixed ? &*fixed : nullptr));
    write_png((out / "error_map_color.png").string(), render_error_map(error));
  }
  std::cout << "maps written to " << out.string() << "\n";
  return 0;
}

struct ServeArgs {
  std::string host = "127.0.0.1";
  int port = 8080;
  std::optional<std::string> data_dir;
  std::optional<std::string> log_dir;
};

int cmd_serve(const ServeArgs& a) {
  ApiConfig config;
  if (a.data_dir) {
    config.data_dir = *a.data_dir;
  } else if (const char* env = std::getenv("REGMARK_DATA_DIR")) {
    config.data_dir = env;
  }
  SessionStore store(a.log_dir ? std::optional<fs::path>(*a.log_dir) : std::nullopt);
  store.restore();
  httplib::Server server;
  register_routes(server, store, config);
  g_server = &server;
  std::signal(SIGINT, stop_server);
  std::signal(SIGTERM, stop_server);
  std::cout << "listening on http://" << a.host << ':' << a.port << "/v1\n" << std::flush;
  if (!server.listen(a.host, a.port)) {
    std::cerr << "error: cannot listen on " << a.host << ':' << a.port << "\n";
    return 1;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"regmark: annotation-driven evaluation of image registration"};
  app.require_subcommand(1);

  BenchmarkArgs bench;
  auto* b = app.add_subcommand("benchmark", "run synthetic strategy/ranking benchmarks");
  b->add_option("--config", bench.config, "benchmark JSON config")->required()->check(CLI::ExistingFile);
  b->add_option("--out", bench.out, "output directory");
  b->add_option("--seed", bench.seed, "base seed (overrides config)");
  b->add_option("--strategy", bench.strategy, "run a single strategy: entropy|heuristic|random");
  b->add_option("--kernel", bench.kernel, "kernel JSON with fixed weights");
  b->add_option("--budget", bench.budget, "annotation budget");
  b->add_option("--alpha", bench.alpha, "ellipse confidence level of the simulated annotator");
  b->add_option("--runs", bench.runs, "number of repetitions");
  b->add_option("--threads", bench.threads, "worker threads (0 = all cores)");

  EvaluateArgs eval;
  auto* e = app.add_subcommand("evaluate", "score candidate transformations");
  e->add_option("--annotations", eval.annotations, "annotations (.csv or .json)")->required()->check(CLI::ExistingFile);
  e->add_option("--transforms", eval.transforms, "directory of transform headers (*.json)")->required()->check(CLI::ExistingDirectory);
  e->add_option("--kernel", eval.kernel, "kernel JSON")->required()->check(CLI::ExistingFile);
  e->add_option("--out", eval.out, "output directory");
  e->add_option("--targets", eval.targets, "JSON list of target points (default: lattice)");
  e->add_option("--stride", eval.stride, "target lattice stride");
  e->add_option("--sigma-min", eval.sigma_min, "annotation noise floor, pixels");

  MapsArgs maps;
  auto* m = app.add_subcommand("maps", "render error, entropy and blended maps");
  m->add_option("--session", maps.session, "session JSON")->required()->check(CLI::ExistingFile);
  m->add_option("--transform", maps.transform, "transform header (.json)")->required()->check(CLI::ExistingFile);
  m->add_option("--out", maps.out, "output directory");
  m->add_option("--fixed", maps.fixed, "fixed image for the blended map");
  m->add_option("--stride", maps.stride, "map grid stride");

  ServeArgs serve;
  auto* s = app.add_subcommand("serve", "HTTP annotation service under /v1");
  s->add_option("--host", serve.host, "bind address");
  s->add_option("--port", serve.port, "port");
  s->add_option("--data-dir", serve.data_dir, "image root (default: $REGMARK_DATA_DIR)");
  s->add_option("--log-dir", serve.log_dir, "persist sessions here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& err) {
    return app.exit(err);
  } catch (const CLI::ParseError& err) {
    std::cerr << "error: " << err.what() << "\n\n";
    const CLI::App* sub = app.get_subcommands().empty() ? &app : app.get_subcommands().front();
    std::cerr << sub->help();
    return 2;
  }

  try {
    if (*b) return cmd_benchmark(bench);
    if (*e) return cmd_evaluate(eval);
    if (*m) return cmd_maps(maps);
    if (*s) return cmd_serve(serve);
  } catch (const Error& err) {
    std::cerr << "error [" << err.code() << "]: " << err.what() << "\n";
    return 1;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 1;
  }
  return 0;
}
