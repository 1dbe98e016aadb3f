#pragma once

#include <array>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "regmark/gp_session.hpp"

namespace regmark {

enum class Norm { L1, L2, Linf };

std::string norm_name(Norm p);

/// ((1/n) sum e^p)^(1/p) over non-negative errors; max for Linf.
double p_norm(std::span<const double> errors, Norm p);

/// Norm of phi_hat(x) - reference(x) over the points of T.
double p_norm_error(const PointMap& phi_hat, const PointMap& reference, const PointList& targets,
                    Norm p);

/// Classical score: reference(x_l) = y_l over the annotated locations.
double landmark_score(const PointMap& phi_hat, std::span<const Annotation> annotations, Norm p);

/// Uncertainty-aware score: reference is the posterior mean.
double proposed_score(const PointMap& phi_hat, const GpSession& session, const PointList& targets,
                      Norm p);

/// E||phi - phi_hat||^2 summed over T under the posterior, split into the
/// squared distance to the posterior mean and the candidate-free trace term.
struct L2Decomposition {
  double expected_sq = 0.0;
  double mean_term = 0.0;
  double trace_term = 0.0;
};

L2Decomposition expected_l2_decomposition(const PointMap& phi_hat, const GpSession& session,
                                          const PointList& targets);

/// Rank correlation with average ranks for ties. Empty when either input is
/// constant (the coefficient is undefined there).
std::optional<double> spearman(std::span<const double> predicted, std::span<const double> truth);

/// s1, s2 and sinf for one candidate transformation.
using ScoreTriple = std::array<double, 3>;

ScoreTriple score_triple(const PointMap& phi_hat, const PointMap& reference,
                         const PointList& targets);

struct ScoreReport {
  std::string method;  // "landmark" or "proposed"
  std::vector<std::string> candidate_ids;
  std::vector<ScoreTriple> scores;
  std::vector<int> ranks;  // 1 = smallest s2; ties keep input order
};

ScoreReport make_report(std::string method, std::vector<std::string> ids,
                        std::vector<ScoreTriple> scores);

/// Columns: candidate_id,s1,s2,sinf,rank
void write_report_csv(std::ostream& out, const ScoreReport& report);

/// 1-based ranks of values in ascending order; ties broken by index.
std::vector<int> ordinal_ranks(std::span<const double> values);

}  // namespace regmark
