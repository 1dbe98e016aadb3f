#include "regmark/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>

#include "regmark/protocol.hpp"
#include "regmark/stats.hpp"

namespace regmark {

std::string norm_name(Norm p) {
  switch (p) {
    case Norm::L1: return "s1";
    case Norm::L2: return "s2";
    case Norm::Linf: return "sinf";
  }
  return "unknown";
}

double p_norm(std::span<const double> errors, Norm p) {
  if (errors.empty()) throw ValidationError("empty_targets", "p-norm of an empty error set");
  switch (p) {
    case Norm::L1: {
      double s = 0.0;
      for (double e : errors) s += e;
      return s / static_cast<double>(errors.size());
    }
    case Norm::L2: {
      double s = 0.0;
      for (double e : errors) s += e * e;
      return std::sqrt(s / static_cast<double>(errors.size()));
    }
    case Norm::Linf:
      return *std::max_element(errors.begin(), errors.end());
  }
  return 0.0;
}

namespace {

std::vector<double> error_norms(const PointMap& phi_hat, const PointMap& reference,
                                const PointList& targets) {
  if (targets.empty()) throw ValidationError("empty_targets", "target set is empty");
  std::vector<double> e;
  e.reserve(targets.size());
  for (const auto& x : targets) {
    const Vec a = phi_hat(x);
    const Vec b = reference(x);
    if (a.size() != b.size()) throw DimensionError("transformations disagree in dimension");
    e.push_back((a - b).norm());
  }
  return e;
}

}  // namespace

double p_norm_error(const PointMap& phi_hat, const PointMap& reference, const PointList& targets,
                    Norm p) {
  const auto e = error_norms(phi_hat, reference, targets);
  return p_norm(e, p);
}

double landmark_score(const PointMap& phi_hat, std::span<const Annotation> annotations, Norm p) {
  if (annotations.empty()) throw ValidationError("empty_annotations", "no annotations to score");
  std::vector<double> e;
  e.reserve(annotations.size());
  for (const auto& a : annotations) {
    const Vec v = phi_hat(a.x);
    if (v.size() != a.y.size()) throw DimensionError("transformation/annotation dimension mismatch");
    e.push_back((v - a.y).norm());
  }
  return p_norm(e, p);
}

double proposed_score(const PointMap& phi_hat, const GpSession& session, const PointList& targets,
                      Norm p) {
  return p_norm_error(phi_hat, [&](const Vec& x) { return session.posterior_mean(x); }, targets, p);
}

L2Decomposition expected_l2_decomposition(const PointMap& phi_hat, const GpSession& session,
                                          const PointList& targets) {
  if (targets.empty()) throw ValidationError("empty_targets", "target set is empty");
  L2Decomposition out;
  for (const auto& x : targets) {
    const PosteriorGaussian g = session.posterior_at(x);
    out.mean_term += (phi_hat(x) - g.mean).squaredNorm();
    out.trace_term += g.cov.trace();
  }
  out.expected_sq = out.mean_term + out.trace_term;
  return out;
}

std::optional<double> spearman(std::span<const double> predicted, std::span<const double> truth) {
  if (predicted.size() != truth.size()) throw DimensionError("spearman: length mismatch");
  if (predicted.size() < 2) throw ValidationError("spearman needs at least two scores");
  const auto ra = average_ranks(predicted);
  const Vec a = Eigen::Map<const Vec>(ra.data(), static_cast<Eigen::Index>(ra.size()));
  const auto rb = average_ranks(truth);
  const Vec b = Eigen::Map<const Vec>(rb.data(), static_cast<Eigen::Index>(rb.size()));
  const Vec ca = a.array() - a.mean();
  const Vec cb = b.array() - b.mean();
  const double na = ca.norm();
  const double nb = cb.norm();
  if (na == 0.0 || nb == 0.0) return std::nullopt;
  return std::clamp(ca.dot(cb) / (na * nb), -1.0, 1.0);
}

ScoreTriple score_triple(const PointMap& phi_hat, const PointMap& reference,
                         const PointList& targets) {
  const auto e = error_norms(phi_hat, reference, targets);
  return {p_norm(e, Norm::L1), p_norm(e, Norm::L2), p_norm(e, Norm::Linf)};
}

std::vector<int> ordinal_ranks(std::span<const double> values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t i, std::size_t j) { return values[i] < values[j]; });
  std::vector<int> ranks(values.size());
  for (std::size_t r = 0; r < order.size(); ++r) ranks[order[r]] = static_cast<int>(r + 1);
  return ranks;
}

ScoreReport make_report(std::string method, std::vector<std::string> ids,
                        std::vector<ScoreTriple> scores) {
  if (ids.size() != scores.size()) throw ValidationError("report: id/score count mismatch");
  std::vector<double> s2;
  for (const auto& s : scores) s2.push_back(s[1]);
  ScoreReport r{std::move(method), std::move(ids), std::move(scores), {}};
  r.ranks = ordinal_ranks(s2);
  return r;
}

void write_report_csv(std::ostream& out, const ScoreReport& report) {
  out << "candidate_id,s1,s2,sinf,rank\n";
  for (std::size_t k = 0; k < report.scores.size(); ++k) {
    const auto& s = report.scores[k];
    out << report.candidate_ids[k] << ',' << format_double(s[0]) << ',' << format_double(s[1])
        << ',' << format_double(s[2]) << ',' << report.ranks[k] << '\n';
  }
}

}  // namespace regmark
