#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "regmark/gp_session.hpp"
#include "regmark/grid.hpp"

namespace regmark {

/// Locations where registration accuracy matters. `whole_domain` stands for
/// T = Omega: every point is a member and no explicit list is kept.
struct TargetSet {
  PointList points;
  std::string label;
  bool whole_domain = false;

  static TargetSet whole(std::string label = "domain");

  /// Exact coordinate equality against the listed points.
  bool contains(const Vec& x) const;

  /// Points must be pairwise distinct and non-empty unless whole_domain.
  void validate() const;
};

/// Salient locations eligible for queries; consumed entries are never
/// suggested again.
struct CandidateSet {
  PointList points;
  std::vector<bool> consumed;

  CandidateSet() = default;
  explicit CandidateSet(PointList pts);

  std::size_t size() const { return points.size(); }
  std::size_t remaining() const;
  void consume(std::size_t index);
  std::optional<std::size_t> find(const Vec& x) const;
};

struct SuggestionScore {
  std::size_t index;
  double delta_h;
};

enum class Strategy { Entropy, Heuristic, Random };

std::string strategy_name(Strategy s);
Strategy parse_strategy(const std::string& name);

struct Suggestion {
  std::size_t index;
  Vec point;
  double delta_h;  // NaN for strategies that do not score candidates
};

/// Entropy reduction of a hypothetical exact observation at x.
///   x in T:     H(phi(x) | A)
///   x not in T: H(phi(x) | A) - H(phi(x) | Phi_T, A)
/// The second branch uses the session's attached targets when they match T,
/// otherwise a temporary copy with T attached.
double delta_h(const GpSession& session, const Vec& x, const TargetSet& targets);

/// delta_h for every unconsumed candidate, in candidate order.
std::vector<SuggestionScore> score_candidates(const GpSession& session,
                                              const CandidateSet& candidates,
                                              const TargetSet& targets);

/// Argmax of delta_h over unconsumed candidates, lowest index on ties.
Suggestion suggest_next_entropy(const GpSession& session, const CandidateSet& candidates,
                                const TargetSet& targets);

/// First pick uniform at random; afterwards the candidate farthest from every
/// annotated location (lowest index on ties).
Suggestion suggest_next_heuristic(const PointList& annotated, const CandidateSet& candidates,
                                  std::mt19937_64& rng);
Suggestion suggest_next_heuristic(const PointList& annotated, const CandidateSet& candidates,
                                  std::uint64_t seed);

/// Uniform over unconsumed candidates.
Suggestion suggest_next_random(const CandidateSet& candidates, std::mt19937_64& rng);
Suggestion suggest_next_random(const CandidateSet& candidates, std::uint64_t seed);

/// Integer in [0, n) from one 64-bit draw, independent of the standard
/// library's distribution implementation.
std::size_t uniform_index(std::mt19937_64& rng, std::size_t n);

struct HarrisOptions {
  double smoothing_sigma = 1.5;  // integration scale, pixels
  double kappa = 0.05;
  // det - kappa tr^3 is negative at an isotropic corner once kappa >= 1/27.
  double kappa_3d = 0.005;
  double min_spacing = 10.0;
  std::size_t max_count = 200;
  double relative_threshold = 0.01;  // of the strongest response
};

/// Harris response det(M) - kappa trace(M)^d of the Gaussian-smoothed
/// structure tensor M (d = 2 gives the usual det - kappa trace^2).
ScalarImage harris_response(const ScalarImage& image, double smoothing_sigma, double kappa);

/// Corner detection with non-maximum suppression; a constant image yields an
/// empty set. Nodes within the smoothing radius of the border are skipped.
CandidateSet detect_candidates(const ScalarImage& image, const HarrisOptions& options = {});

}  // namespace regmark
