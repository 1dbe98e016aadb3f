#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "regmark/suggestion.hpp"

namespace regmark {

struct AnnotatorReply {
  Vec y;
  Mat sigma;
};

/// Called with the queried point and the 0-based iteration; exceptions abort
/// the protocol.
using Annotator = std::function<AnnotatorReply(const Vec& x, std::size_t iteration)>;

struct TraceEntry {
  std::size_t iteration = 0;
  Strategy strategy = Strategy::Entropy;
  Vec x;
  std::size_t candidate_index = 0;
  double delta_h = 0.0;  // NaN unless the strategy scored candidates
  double wall_ms = 0.0;  // time spent choosing the point
  std::optional<double> metric;
};

/// Suggest/annotate state machine shared by run_protocol and the HTTP
/// sessions. suggest() is idempotent until the pending point is annotated or
/// skipped, and all randomness comes from one generator seeded at creation.
class ProtocolDriver {
 public:
  ProtocolDriver(GpSession session, CandidateSet candidates, TargetSet targets, Strategy strategy,
                 std::uint64_t seed);

  /// Pending suggestion; nullopt once the pool is exhausted.
  std::optional<Suggestion> suggest();

  /// Adds the annotation, consuming the candidate at a.x if there is one,
  /// and appends a trace entry.
  void annotate(const Annotation& a);

  /// Drops the pending suggestion without annotating it.
  void skip();

  const GpSession& session() const { return session_; }
  GpSession& mutable_session() { return session_; }
  const CandidateSet& candidates() const { return candidates_; }
  const TargetSet& targets() const { return targets_; }
  Strategy strategy() const { return strategy_; }
  const std::vector<TraceEntry>& trace() const { return trace_; }
  std::vector<TraceEntry>& trace() { return trace_; }

 private:
  GpSession session_;
  CandidateSet candidates_;
  TargetSet targets_;
  Strategy strategy_;
  std::mt19937_64 rng_;
  std::optional<Suggestion> pending_;
  double pending_ms_ = 0.0;
  std::vector<TraceEntry> trace_;
};

struct ProtocolOptions {
  Strategy strategy = Strategy::Entropy;
  std::size_t budget = 0;
  std::uint64_t seed = 0;
  /// Stop early once the best delta_h falls below this (entropy only).
  std::optional<double> delta_h_floor;
  /// Evaluated after every annotation; stored in TraceEntry::metric.
  std::function<double(const GpSession&)> metric;
};

struct ProtocolResult {
  GpSession session;
  CandidateSet candidates;
  std::vector<TraceEntry> trace;
  bool aborted = false;
  std::string error;
};

/// Greedy annotation loop: suggest, query the annotator, add, repeat until
/// the budget is spent. A throwing annotator ends the loop with the partial
/// trace and `aborted` set.
ProtocolResult run_protocol(GpSession session, CandidateSet candidates, TargetSet targets,
                            const ProtocolOptions& options, const Annotator& annotator);

/// CSV header plus one row per entry: iteration,strategy,x0..,delta_h,wall_ms.
/// Numbers are written in shortest round-trip form.
void write_trace_csv(std::ostream& out, const std::vector<TraceEntry>& trace, int dimension);
std::string trace_csv(const std::vector<TraceEntry>& trace, int dimension);

/// Shortest decimal form that parses back to the same double.
std::string format_double(double v);

}  // namespace regmark
