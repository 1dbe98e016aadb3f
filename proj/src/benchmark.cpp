#include "regmark/benchmark.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "regmark/evaluation.hpp"
#include "regmark/hyperparameters.hpp"
#include "regmark/parallel.hpp"
#include "regmark/protocol.hpp"
#include "regmark/stats.hpp"

namespace regmark {

namespace {

constexpr std::uint64_t kDeformationStream = 0;
constexpr std::uint64_t kPlacementStream = 1;
constexpr std::uint64_t kRankingStream = 2;
constexpr std::uint64_t kStrategyStream = 10;
constexpr std::uint64_t kAnnotationStream = 1000;
constexpr std::uint64_t kTrainingSalt = 0x747261696e696e67ULL;

[[noreturn]] void bad_config(const std::string& what) {
  throw ValidationError("invalid_config", "benchmark config: " + what);
}

GridGeometry domain_geometry(const BenchmarkConfig& c) { return GridGeometry::pixels(c.domain); }

DeformationSpec deformation_spec(const BenchmarkConfig& c) {
  return DeformationSpec{domain_geometry(c), c.control_spacing, c.amplitude}.resolved();
}

// Distinct integer points drawn uniformly inside the domain minus a margin.
PointList place_points(const GridGeometry& g, double margin, std::size_t count,
                       std::mt19937_64& rng) {
  const int d = g.dimension();
  std::vector<int> lo(static_cast<std::size_t>(d)), hi(static_cast<std::size_t>(d));
  double available = 1.0;
  for (int a = 0; a < d; ++a) {
    const int n = g.shape[static_cast<std::size_t>(a)];
    const double m = std::min(margin, (n - 1) / 4.0);
    lo[static_cast<std::size_t>(a)] = static_cast<int>(std::ceil(m));
    hi[static_cast<std::size_t>(a)] = static_cast<int>(std::floor(n - 1 - m));
    available *= hi[static_cast<std::size_t>(a)] - lo[static_cast<std::size_t>(a)] + 1;
  }
  if (available < 2.0 * static_cast<double>(count)) bad_config("domain too small for the landmarks");
  std::set<std::vector<int>> seen;
  PointList pts;
  while (pts.size() < count) {
    std::vector<int> idx(static_cast<std::size_t>(d));
    for (int a = 0; a < d; ++a) {
      const auto ua = static_cast<std::size_t>(a);
      idx[ua] = lo[ua] + static_cast<int>(uniform_index(rng, static_cast<std::size_t>(hi[ua] - lo[ua] + 1)));
    }
    if (!seen.insert(idx).second) continue;
    Vec p(d);
    for (int a = 0; a < d; ++a) p[a] = idx[static_cast<std::size_t>(a)];
    pts.push_back(p);
  }
  return pts;
}

// Regular lattice over the lower corner block [margin, extent/2]^d.
PointList quadrant_lattice(const GridGeometry& g, double margin, int per_axis) {
  const int d = g.dimension();
  std::vector<double> lo(static_cast<std::size_t>(d)), hi(static_cast<std::size_t>(d));
  for (int a = 0; a < d; ++a) {
    const double extent = g.shape[static_cast<std::size_t>(a)] - 1;
    lo[static_cast<std::size_t>(a)] = std::min(margin, extent / 4.0);
    hi[static_cast<std::size_t>(a)] = extent / 2.0;
  }
  GridGeometry lattice;
  lattice.origin = Eigen::Map<const Vec>(lo.data(), d);
  lattice.spacing.resize(d);
  for (int a = 0; a < d; ++a) {
    lattice.spacing[a] = (hi[static_cast<std::size_t>(a)] - lo[static_cast<std::size_t>(a)]) /
                         std::max(1, per_axis - 1);
  }
  lattice.shape.assign(static_cast<std::size_t>(d), per_axis);
  PointList pts;
  for (std::size_t f = 0; f < lattice.node_count(); ++f) pts.push_back(lattice.node(f));
  return pts;
}

PointList stride_lattice(const GridGeometry& g, double margin, int stride) {
  PointList pts;
  const int d = g.dimension();
  for (std::size_t f = 0; f < g.node_count(); ++f) {
    const auto idx = g.unflatten(f);
    bool keep = true;
    for (int a = 0; a < d; ++a) {
      const auto ua = static_cast<std::size_t>(a);
      const double m = std::min(margin, (g.shape[ua] - 1) / 4.0);
      keep = keep && idx[ua] % stride == 0 && idx[ua] >= m && idx[ua] <= g.shape[ua] - 1 - m;
    }
    if (keep) pts.push_back(g.node(f));
  }
  return pts;
}

double rmse(const GpSession& session, const TransformField& phi, const PointList& points) {
  double s = 0.0;
  for (const auto& x : points) s += (session.posterior_mean(x) - phi(x)).squaredNorm();
  return std::sqrt(s / static_cast<double>(points.size()));
}

const char* target_mode_name(TargetMode m) { return m == TargetMode::Full ? "full" : "quadrant"; }

RankingRecord ranking_experiment(const BenchmarkConfig& c, const KernelSpec& kernel,
                                 const TransformField& phi, std::span<const Annotation> annotations,
                                 double margin, std::uint64_t run_seed) {
  const RankingConfig& rc = c.ranking;
  const GridGeometry g = domain_geometry(c);
  const PointList t = stride_lattice(g, margin, rc.target_stride);
  if (t.empty()) bad_config("ranking target lattice is empty");

  GpSession session(kernel);
  for (const auto& a : annotations) session.add_annotation(a);
  std::vector<Vec> mu(t.size()), truth(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) {
    mu[i] = session.posterior_mean(t[i]);
    truth[i] = phi(t[i]);
  }

  const std::size_t k_count = rc.candidates;
  auto rng = make_stream(run_seed, kRankingStream);
  const DeformationSpec perturbation = deformation_spec(c);

  std::array<std::vector<double>, 3> true_s, landmark_s, proposed_s;
  for (std::size_t k = 0; k < k_count; ++k) {
    const double target_s2 =
        rc.min_amplitude + (rc.max_amplitude - rc.min_amplitude) * static_cast<double>(k) /
                               static_cast<double>(k_count - 1);
    const TransformField w = sample_deformation(perturbation, rng());
    std::vector<double> wn(t.size());
    for (std::size_t i = 0; i < t.size(); ++i) wn[i] = w.displacement(t[i]).norm();
    const double w2 = p_norm(wn, Norm::L2);
    const double scale = w2 > 0.0 ? target_s2 / w2 : 0.0;
    auto phi_hat = [&](const Vec& x) -> Vec { return phi(x) + scale * w.displacement(x); };

    std::vector<double> e_true(t.size()), e_prop(t.size());
    for (std::size_t i = 0; i < t.size(); ++i) {
      const Vec v = phi_hat(t[i]);
      e_true[i] = (v - truth[i]).norm();
      e_prop[i] = (v - mu[i]).norm();
    }
    const Norm norms[3] = {Norm::L1, Norm::L2, Norm::Linf};
    for (int p = 0; p < 3; ++p) {
      true_s[static_cast<std::size_t>(p)].push_back(p_norm(e_true, norms[p]));
      proposed_s[static_cast<std::size_t>(p)].push_back(p_norm(e_prop, norms[p]));
      landmark_s[static_cast<std::size_t>(p)].push_back(landmark_score(phi_hat, annotations, norms[p]));
    }
  }

  RankingRecord r;
  r.true_s2 = true_s[1];
  for (std::size_t k = 1; k < k_count; ++k) {
    if (!(r.true_s2[k] > r.true_s2[k - 1])) {
      throw NumericalError("ranking candidates are not strictly ordered by true s2");
    }
  }
  for (std::size_t p = 0; p < 3; ++p) {
    r.spearman_landmark[p] = spearman(landmark_s[p], true_s[p]);
    r.spearman_proposed[p] = spearman(proposed_s[p], true_s[p]);
    double ml = 0.0, mp = 0.0;
    for (std::size_t k = 0; k < k_count; ++k) {
      ml += std::abs(landmark_s[p][k] - true_s[p][k]);
      mp += std::abs(proposed_s[p][k] - true_s[p][k]);
    }
    r.mae_landmark[p] = ml / static_cast<double>(k_count);
    r.mae_proposed[p] = mp / static_cast<double>(k_count);
  }
  return r;
}

}  // namespace

void BenchmarkConfig::validate() const {
  if (runs == 0) bad_config("runs must be >= 1");
  if (domain.size() != 2 && domain.size() != 3) bad_config("domain must be 2-D or 3-D");
  for (int n : domain) {
    if (n < 8) bad_config("domain sides must be >= 8");
  }
  if (strategies.empty()) bad_config("no strategies");
  for (std::size_t i = 0; i < strategies.size(); ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      if (strategies[i] == strategies[j]) bad_config("duplicate strategy");
    }
  }
  if (candidates == 0 || evaluation_points == 0) bad_config("need candidates and evaluation points");
  if (budget > candidates) bad_config("budget exceeds the candidate count");
  if (target_lattice < 2) bad_config("target_lattice must be >= 2");
  if (kernel.rho1 <= 0.0) bad_config("kernel rho1 must be positive");
  if (kernel.weights.empty() && kernel.training_annotations < 2) {
    bad_config("weight learning needs at least two training annotations");
  }
  annotator.validate();
  if (ranking.enabled) {
    if (ranking.candidates < 2) bad_config("ranking needs at least two candidates");
    if (ranking.budget == 0 || ranking.budget > budget) bad_config("ranking budget out of range");
    if (std::find(strategies.begin(), strategies.end(), ranking.strategy) == strategies.end()) {
      bad_config("ranking strategy is not among the strategies");
    }
    if (!(ranking.min_amplitude >= 0.0 && ranking.max_amplitude > ranking.min_amplitude)) {
      bad_config("ranking amplitudes must satisfy 0 <= min < max");
    }
    if (ranking.target_stride < 1) bad_config("ranking target_stride must be >= 1");
  }
}

void to_json(nlohmann::json& j, const BenchmarkConfig& c) {
  nlohmann::json strategies = nlohmann::json::array();
  for (auto s : c.strategies) strategies.push_back(strategy_name(s));
  nlohmann::json kernel = {{"basis", basis_name(c.kernel.basis)},
                           {"rho1", c.kernel.rho1},
                           {"scales", c.kernel.scales},
                           {"training_annotations", c.kernel.training_annotations},
                           {"initial_weight", c.kernel.initial_weight}};
  if (!c.kernel.weights.empty()) kernel["weights"] = c.kernel.weights;
  j = {{"runs", c.runs},
       {"seed", c.seed},
       {"threads", c.threads},
       {"domain", c.domain},
       {"deformation", {{"control_spacing", c.control_spacing}, {"amplitude", c.amplitude}}},
       {"strategies", strategies},
       {"budget", c.budget},
       {"candidates", c.candidates},
       {"evaluation_points", c.evaluation_points},
       {"annotator", c.annotator},
       {"targets", {{"mode", target_mode_name(c.target_mode)}, {"lattice", c.target_lattice}}},
       {"kernel", kernel},
       {"ranking",
        {{"enabled", c.ranking.enabled},
         {"candidates", c.ranking.candidates},
         {"budget", c.ranking.budget},
         {"strategy", strategy_name(c.ranking.strategy)},
         {"min_amplitude", c.ranking.min_amplitude},
         {"max_amplitude", c.ranking.max_amplitude},
         {"target_stride", c.ranking.target_stride}}},
       {"save_fields", c.save_fields}};
}

void from_json(const nlohmann::json& j, BenchmarkConfig& c) {
  static const std::set<std::string> known = {
      "runs",       "seed",       "threads",           "domain",    "deformation",
      "strategies", "budget",     "candidates",        "evaluation_points",
      "annotator",  "targets",    "kernel",            "ranking",   "save_fields"};
  if (!j.is_object()) bad_config("top level must be an object");
  for (const auto& [key, value] : j.items()) {
    if (!known.count(key)) bad_config("unknown key '" + key + "'");
  }
  c = BenchmarkConfig{};
  try {
    c.runs = j.value("runs", c.runs);
    c.seed = j.value("seed", c.seed);
    c.threads = j.value("threads", c.threads);
    c.domain = j.value("domain", c.domain);
    if (j.contains("deformation")) {
      const auto& d = j.at("deformation");
      c.control_spacing = d.value("control_spacing", c.control_spacing);
      c.amplitude = d.value("amplitude", c.amplitude);
    }
    if (j.contains("strategies")) {
      c.strategies.clear();
      for (const auto& s : j.at("strategies")) c.strategies.push_back(parse_strategy(s.get<std::string>()));
    }
    c.budget = j.value("budget", c.budget);
    c.candidates = j.value("candidates", c.candidates);
    c.evaluation_points = j.value("evaluation_points", c.evaluation_points);
    if (j.contains("annotator")) c.annotator = j.at("annotator").get<AnnotatorProfile>();
    if (j.contains("targets")) {
      const auto& t = j.at("targets");
      const std::string mode = t.value("mode", std::string("full"));
      if (mode == "full") {
        c.target_mode = TargetMode::Full;
      } else if (mode == "quadrant") {
        c.target_mode = TargetMode::Quadrant;
      } else {
        bad_config("unknown target mode '" + mode + "'");
      }
      c.target_lattice = t.value("lattice", c.target_lattice);
    }
    if (j.contains("kernel")) {
      const auto& k = j.at("kernel");
      c.kernel.basis = parse_basis(k.value("basis", basis_name(c.kernel.basis)));
      c.kernel.rho1 = k.value("rho1", c.kernel.rho1);
      c.kernel.scales = k.value("scales", c.kernel.scales);
      c.kernel.weights = k.value("weights", c.kernel.weights);
      c.kernel.training_annotations = k.value("training_annotations", c.kernel.training_annotations);
      c.kernel.initial_weight = k.value("initial_weight", c.kernel.initial_weight);
    }
    if (j.contains("ranking")) {
      const auto& r = j.at("ranking");
      c.ranking.enabled = r.value("enabled", true);
      c.ranking.candidates = r.value("candidates", c.ranking.candidates);
      c.ranking.budget = r.value("budget", c.ranking.budget);
      c.ranking.strategy = parse_strategy(r.value("strategy", strategy_name(c.ranking.strategy)));
      c.ranking.min_amplitude = r.value("min_amplitude", c.ranking.min_amplitude);
      c.ranking.max_amplitude = r.value("max_amplitude", c.ranking.max_amplitude);
      c.ranking.target_stride = r.value("target_stride", c.ranking.target_stride);
    }
    c.save_fields = j.value("save_fields", c.save_fields);
  } catch (const nlohmann::json::exception& e) {
    bad_config(e.what());
  }
  c.validate();
}

BenchmarkConfig load_benchmark_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("io_error", "cannot open config " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    bad_config(e.what());
  }
  return j.get<BenchmarkConfig>();
}

KernelSpec benchmark_kernel(const BenchmarkConfig& c) {
  const GridGeometry g = domain_geometry(c);
  double extent = 0.0;
  for (int n : c.domain) extent = std::max(extent, static_cast<double>(n - 1));
  const std::size_t count =
      c.kernel.scales > 0 ? c.kernel.scales : KernelSpec::scales_for_extent(c.kernel.rho1, extent);
  KernelSpec spec = KernelSpec::ladder(c.kernel.basis, c.kernel.rho1, count, g.dimension(),
                                       c.kernel.initial_weight);
  if (!c.kernel.weights.empty()) {
    if (c.kernel.weights.size() != count) bad_config("kernel weights do not match the scale count");
    spec.weights = c.kernel.weights;
    spec.validate();
    return spec;
  }

  // Training data: a deformation and annotations that no run reuses.
  const std::uint64_t seed = c.seed ^ kTrainingSalt;
  auto rng = make_stream(seed, kDeformationStream);
  const TransformField phi = sample_deformation(deformation_spec(c), rng());
  auto place_rng = make_stream(seed, kPlacementStream);
  CandidateSet pool(place_points(g, 2.0 * phi.max_norm(), 2 * c.kernel.training_annotations, place_rng));
  std::vector<Annotation> annotations;
  PointList chosen;
  for (std::size_t i = 0; i < c.kernel.training_annotations; ++i) {
    const Suggestion s = suggest_next_heuristic(chosen, pool, place_rng);
    pool.consume(s.index);
    chosen.push_back(s.point);
    auto noise = make_stream(seed, kAnnotationStream + s.index);
    AnnotatorReply r = simulate_annotator(c.annotator, s.point, phi, noise);
    annotations.push_back({s.point, r.y, r.sigma});
  }
  return estimate_hyperparameters(annotations, spec).spec;
}

RunRecord run_single(const BenchmarkConfig& c, const KernelSpec& kernel, std::size_t run) {
  RunRecord rec;
  rec.run = run;
  rec.seed = c.seed + run;
  const GridGeometry g = domain_geometry(c);

  auto deform_rng = make_stream(rec.seed, kDeformationStream);
  const TransformField phi = sample_deformation(deformation_spec(c), deform_rng());
  const double margin = 2.0 * phi.max_norm();

  auto place_rng = make_stream(rec.seed, kPlacementStream);
  PointList landmarks = place_points(g, margin, c.candidates + c.evaluation_points, place_rng);
  const PointList candidate_points(landmarks.begin(),
                                   landmarks.begin() + static_cast<std::ptrdiff_t>(c.candidates));
  PointList evaluation(landmarks.begin() + static_cast<std::ptrdiff_t>(c.candidates), landmarks.end());

  TargetSet targets = TargetSet::whole();
  if (c.target_mode == TargetMode::Quadrant) {
    targets = TargetSet{quadrant_lattice(g, margin, c.target_lattice), "quadrant", false};
    evaluation = targets.points;
  }

  // The simulated user answers the same way at a given candidate whichever
  // strategy asks.
  std::vector<AnnotatorReply> replies;
  replies.reserve(candidate_points.size());
  for (std::size_t i = 0; i < candidate_points.size(); ++i) {
    auto noise = make_stream(rec.seed, kAnnotationStream + i);
    replies.push_back(simulate_annotator(c.annotator, candidate_points[i], phi, noise));
  }
  const CandidateSet pool(candidate_points);

  const double prior_rmse = rmse(GpSession(kernel), phi, evaluation);
  for (Strategy s : c.strategies) {
    ProtocolOptions opt;
    opt.strategy = s;
    opt.budget = c.budget;
    opt.seed = make_stream(rec.seed, kStrategyStream + static_cast<std::uint64_t>(s))();
    opt.metric = [&](const GpSession& session) { return rmse(session, phi, evaluation); };
    const Annotator annotator = [&](const Vec& x, std::size_t) {
      return replies[pool.find(x).value()];
    };
    const ProtocolResult result = run_protocol(GpSession(kernel), pool, targets, opt, annotator);
    auto& curve = rec.rmse[strategy_name(s)];
    curve.push_back(prior_rmse);
    for (const auto& e : result.trace) curve.push_back(*e.metric);

    if (c.ranking.enabled && s == c.ranking.strategy) {
      const auto& all = result.session.annotations();
      const std::span<const Annotation> used(all.data(), std::min(all.size(), c.ranking.budget));
      rec.ranking = ranking_experiment(c, kernel, phi, used, margin, rec.seed);
    }
  }
  if (c.save_fields) rec.truth = phi;
  return rec;
}

BenchmarkResult run_benchmark(const BenchmarkConfig& config) {
  config.validate();
  BenchmarkResult result{config, benchmark_kernel(config), std::vector<RunRecord>(config.runs)};
  parallel_for(
      config.runs, [&](std::size_t r) { result.runs[r] = run_single(config, result.kernel, r); },
      worker_count(config.threads));
  return result;
}

std::string results_csv(const BenchmarkResult& result) {
  std::ostringstream out;
  out << "run,strategy,iteration,metric,value\n";
  for (const auto& run : result.runs) {
    for (Strategy s : result.config.strategies) {
      const auto& curve = run.rmse.at(strategy_name(s));
      for (std::size_t i = 0; i < curve.size(); ++i) {
        out << run.run << ',' << strategy_name(s) << ',' << i << ",rmse," << format_double(curve[i])
            << '\n';
      }
    }
    if (run.ranking) {
      const auto& r = *run.ranking;
      const char* norms[3] = {"s1", "s2", "sinf"};
      const std::size_t it = result.config.ranking.budget;
      for (int method = 0; method < 2; ++method) {
        const char* name = method == 0 ? "landmark" : "proposed";
        const auto& rho = method == 0 ? r.spearman_landmark : r.spearman_proposed;
        const auto& mae = method == 0 ? r.mae_landmark : r.mae_proposed;
        for (std::size_t p = 0; p < 3; ++p) {
          out << run.run << ',' << name << ',' << it << ",spearman_" << norms[p] << ','
              << (rho[p] ? format_double(*rho[p]) : std::string("nan")) << '\n';
          out << run.run << ',' << name << ',' << it << ",mae_" << norms[p] << ','
              << format_double(mae[p]) << '\n';
        }
      }
    }
  }
  return out.str();
}

namespace {

nlohmann::json distribution(const std::vector<double>& v) {
  if (v.empty()) return nullptr;
  return {{"median", median(v)},
          {"decile_1", quantile(v, 0.1)},
          {"decile_9", quantile(v, 0.9)},
          {"mean", std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size())},
          {"count", v.size()}};
}

}  // namespace

nlohmann::json summary_json(const BenchmarkResult& result) {
  const auto& c = result.config;
  nlohmann::json j;
  j["config"] = c;
  j["kernel"] = result.kernel;

  nlohmann::json strategies = nlohmann::json::object();
  for (Strategy s : c.strategies) {
    const std::string name = strategy_name(s);
    nlohmann::json curve = nlohmann::json::array();
    for (std::size_t it = 0; it <= c.budget; ++it) {
      std::vector<double> v;
      for (const auto& run : result.runs) v.push_back(run.rmse.at(name).at(it));
      curve.push_back(distribution(v));
    }
    strategies[name] = {{"rmse", curve}};
  }
  j["strategies"] = strategies;

  nlohmann::json paired = nlohmann::json::object();
  for (std::size_t a = 0; a < c.strategies.size(); ++a) {
    for (std::size_t b = a + 1; b < c.strategies.size(); ++b) {
      const std::string na = strategy_name(c.strategies[a]);
      const std::string nb = strategy_name(c.strategies[b]);
      nlohmann::json curve = nlohmann::json::array();
      for (std::size_t it = 0; it <= c.budget; ++it) {
        std::vector<double> v;
        for (const auto& run : result.runs) v.push_back(run.rmse.at(na).at(it) - run.rmse.at(nb).at(it));
        curve.push_back(distribution(v));
      }
      paired[na + "-" + nb] = {{"rmse", curve}};
    }
  }
  j["paired_differences"] = paired;

  if (c.ranking.enabled) {
    nlohmann::json ranking = nlohmann::json::object();
    const char* norms[3] = {"s1", "s2", "sinf"};
    for (int method = 0; method < 2; ++method) {
      nlohmann::json m = nlohmann::json::object();
      for (std::size_t p = 0; p < 3; ++p) {
        std::vector<double> rho, mae;
        for (const auto& run : result.runs) {
          if (!run.ranking) continue;
          const auto& r = *run.ranking;
          const auto& sp = method == 0 ? r.spearman_landmark[p] : r.spearman_proposed[p];
          if (sp) rho.push_back(*sp);
          mae.push_back(method == 0 ? r.mae_landmark[p] : r.mae_proposed[p]);
        }
        m[std::string("spearman_") + norms[p]] = distribution(rho);
        m[std::string("mae_") + norms[p]] = distribution(mae);
      }
      ranking[method == 0 ? "landmark" : "proposed"] = m;
    }
    j["ranking"] = ranking;
  }
  return j;
}

void write_benchmark_outputs(const BenchmarkResult& result, const std::filesystem::path& out_dir) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  std::ofstream(out_dir / "results.csv") << results_csv(result);
  std::ofstream(out_dir / "summary.json") << summary_json(result).dump(2) << '\n';
  nlohmann::json k = result.kernel;
  std::ofstream(out_dir / "kernel.json") << k.dump(2) << '\n';
  if (result.config.save_fields) {
    fs::create_directories(out_dir / "fields");
    for (const auto& run : result.runs) {
      if (!run.truth) continue;
      char name[32];
      std::snprintf(name, sizeof name, "run_%04zu", run.run);
      save_field((out_dir / "fields" / name).string(), *run.truth);
    }
  }
  if (!fs::exists(out_dir / "results.csv")) {
    throw ValidationError("io_error", "cannot write to " + out_dir.string());
  }
}

}  // namespace regmark
