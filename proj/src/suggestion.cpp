#include "regmark/suggestion.hpp"

#include <cmath>
#include <limits>
#include <optional>

#include "regmark/parallel.hpp"

namespace regmark {

namespace {

bool same_point(const Vec& a, const Vec& b) { return a.size() == b.size() && a == b; }

bool same_points(const PointList& a, const PointList& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!same_point(a[i], b[i])) return false;
  }
  return true;
}

// Session whose attached targets equal T, reusing `session` when possible.
const GpSession& with_targets(const GpSession& session, const TargetSet& targets,
                              std::optional<GpSession>& scratch) {
  if (session.has_targets() && same_points(session.target_points(), targets.points)) {
    return session;
  }
  scratch.emplace(session);
  scratch->attach_targets(targets.points);
  return *scratch;
}

double score_one(const GpSession& session, const Vec& x, const TargetSet& targets) {
  const double marginal = session.log_det_conditional(x);
  if (targets.contains(x)) {
    return gaussian_entropy_constant(session.dimension()) + marginal;
  }
  return marginal - session.log_det_conditional_given_targets(x);
}

void require_candidates(const CandidateSet& candidates) {
  if (candidates.consumed.size() != candidates.points.size()) {
    throw ValidationError("candidate set: consumed mask size mismatch");
  }
  if (candidates.remaining() == 0) throw EmptyPoolError("no unconsumed candidates left");
}

}  // namespace

TargetSet TargetSet::whole(std::string label) {
  TargetSet t;
  t.label = std::move(label);
  t.whole_domain = true;
  return t;
}

bool TargetSet::contains(const Vec& x) const {
  if (whole_domain) return true;
  for (const auto& p : points) {
    if (same_point(p, x)) return true;
  }
  return false;
}

void TargetSet::validate() const {
  if (whole_domain) return;
  if (points.empty()) throw ValidationError("empty_targets", "target set is empty");
  for (std::size_t i = 0; i < points.size(); ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      if (same_point(points[i], points[j])) {
        throw ValidationError("duplicate_targets", "target set contains duplicate points");
      }
    }
  }
}

CandidateSet::CandidateSet(PointList pts) : points(std::move(pts)), consumed(points.size(), false) {}

std::size_t CandidateSet::remaining() const {
  std::size_t n = 0;
  for (bool c : consumed) n += c ? 0 : 1;
  return n;
}

void CandidateSet::consume(std::size_t index) {
  if (index >= points.size()) throw DomainError("candidate index out of range");
  consumed[index] = true;
}

std::optional<std::size_t> CandidateSet::find(const Vec& x) const {
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (same_point(points[i], x)) return i;
  }
  return std::nullopt;
}

std::string strategy_name(Strategy s) {
  switch (s) {
    case Strategy::Entropy: return "entropy";
    case Strategy::Heuristic: return "heuristic";
    case Strategy::Random: return "random";
  }
  return "unknown";
}

Strategy parse_strategy(const std::string& name) {
  if (name == "entropy") return Strategy::Entropy;
  if (name == "heuristic") return Strategy::Heuristic;
  if (name == "random") return Strategy::Random;
  throw ValidationError("unknown_strategy", "unknown strategy '" + name + "'");
}

double delta_h(const GpSession& session, const Vec& x, const TargetSet& targets) {
  require_dimension(x, session.dimension(), "delta_h");
  if (targets.contains(x)) return score_one(session, x, targets);
  std::optional<GpSession> scratch;
  return score_one(with_targets(session, targets, scratch), x, targets);
}

std::vector<SuggestionScore> score_candidates(const GpSession& session,
                                              const CandidateSet& candidates,
                                              const TargetSet& targets) {
  require_candidates(candidates);
  std::vector<std::size_t> open;
  bool outside = false;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    if (candidates.consumed[i]) continue;
    require_dimension(candidates.points[i], session.dimension(), "candidate");
    open.push_back(i);
    outside = outside || !targets.contains(candidates.points[i]);
  }
  std::optional<GpSession> scratch;
  const GpSession& s = outside ? with_targets(session, targets, scratch) : session;

  std::vector<SuggestionScore> scores(open.size());
  parallel_for(open.size(), [&](std::size_t k) {
    scores[k] = {open[k], score_one(s, candidates.points[open[k]], targets)};
  });
  return scores;
}

Suggestion suggest_next_entropy(const GpSession& session, const CandidateSet& candidates,
                                const TargetSet& targets) {
  const auto scores = score_candidates(session, candidates, targets);
  const SuggestionScore* best = nullptr;
  for (const auto& s : scores) {
    if (!std::isfinite(s.delta_h)) continue;
    if (best == nullptr || s.delta_h > best->delta_h) best = &s;
  }
  if (best == nullptr) throw NumericalError("no candidate has a finite entropy score");
  return {best->index, candidates.points[best->index], best->delta_h};
}

std::size_t uniform_index(std::mt19937_64& rng, std::size_t n) {
  if (n == 0) throw DomainError("uniform_index: empty range");
  // Rejection sampling keeps the draw exactly uniform.
  const std::uint64_t bound = static_cast<std::uint64_t>(n);
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % bound;
  std::uint64_t v = rng();
  while (v >= limit) v = rng();
  return static_cast<std::size_t>(v % bound);
}

Suggestion suggest_next_random(const CandidateSet& candidates, std::mt19937_64& rng) {
  require_candidates(candidates);
  std::size_t k = uniform_index(rng, candidates.remaining());
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    if (candidates.consumed[i]) continue;
    if (k-- == 0) return {i, candidates.points[i], std::numeric_limits<double>::quiet_NaN()};
  }
  throw EmptyPoolError("no unconsumed candidates left");
}

Suggestion suggest_next_random(const CandidateSet& candidates, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return suggest_next_random(candidates, rng);
}

Suggestion suggest_next_heuristic(const PointList& annotated, const CandidateSet& candidates,
                                  std::mt19937_64& rng) {
  require_candidates(candidates);
  if (annotated.empty()) return suggest_next_random(candidates, rng);
  std::size_t best = candidates.size();
  double best_dist = -1.0;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    if (candidates.consumed[i]) continue;
    double nearest = std::numeric_limits<double>::infinity();
    for (const auto& a : annotated) {
      nearest = std::min(nearest, (candidates.points[i] - a).squaredNorm());
    }
    if (nearest > best_dist) {
      best_dist = nearest;
      best = i;
    }
  }
  return {best, candidates.points[best], std::numeric_limits<double>::quiet_NaN()};
}

Suggestion suggest_next_heuristic(const PointList& annotated, const CandidateSet& candidates,
                                  std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return suggest_next_heuristic(annotated, candidates, rng);
}

}  // namespace regmark
