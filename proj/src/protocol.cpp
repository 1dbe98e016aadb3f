#include "regmark/protocol.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>

namespace regmark {

namespace {

bool needs_target_cache(const CandidateSet& c, const TargetSet& t) {
  if (t.whole_domain) return false;
  for (std::size_t i = 0; i < c.size(); ++i) {
    if (!t.contains(c.points[i])) return true;
  }
  return false;
}

}  // namespace

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

ProtocolDriver::ProtocolDriver(GpSession session, CandidateSet candidates, TargetSet targets,
                               Strategy strategy, std::uint64_t seed)
    : session_(std::move(session)),
      candidates_(std::move(candidates)),
      targets_(std::move(targets)),
      strategy_(strategy),
      rng_(seed) {
  targets_.validate();
  if (candidates_.consumed.size() != candidates_.points.size()) {
    candidates_.consumed.assign(candidates_.points.size(), false);
  }
  for (const auto& p : candidates_.points) require_dimension(p, session_.dimension(), "candidate");
  for (const auto& p : targets_.points) require_dimension(p, session_.dimension(), "target");
  if (strategy_ == Strategy::Entropy && needs_target_cache(candidates_, targets_) &&
      !session_.has_targets()) {
    session_.attach_targets(targets_.points);
  }
}

std::optional<Suggestion> ProtocolDriver::suggest() {
  if (pending_) return pending_;
  if (candidates_.remaining() == 0) return std::nullopt;
  const auto start = std::chrono::steady_clock::now();
  switch (strategy_) {
    case Strategy::Entropy:
      pending_ = suggest_next_entropy(session_, candidates_, targets_);
      break;
    case Strategy::Heuristic:
      pending_ = suggest_next_heuristic(session_.locations(), candidates_, rng_);
      break;
    case Strategy::Random:
      pending_ = suggest_next_random(candidates_, rng_);
      break;
  }
  pending_ms_ = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
                    .count();
  return pending_;
}

void ProtocolDriver::annotate(const Annotation& a) {
  session_.add_annotation(a);
  TraceEntry e;
  e.iteration = trace_.size();
  e.strategy = strategy_;
  e.x = a.x;
  e.delta_h = std::numeric_limits<double>::quiet_NaN();
  if (pending_ && pending_->point == a.x) {
    e.candidate_index = pending_->index;
    e.delta_h = pending_->delta_h;
    e.wall_ms = pending_ms_;
  } else {
    e.candidate_index = candidates_.find(a.x).value_or(candidates_.size());
  }
  if (e.candidate_index < candidates_.size()) candidates_.consume(e.candidate_index);
  pending_.reset();
  trace_.push_back(std::move(e));
}

void ProtocolDriver::skip() {
  if (!pending_) suggest();
  if (!pending_) return;
  candidates_.consume(pending_->index);
  pending_.reset();
}

ProtocolResult run_protocol(GpSession session, CandidateSet candidates, TargetSet targets,
                            const ProtocolOptions& options, const Annotator& annotator) {
  if (options.budget > candidates.points.size()) {
    throw ValidationError("budget_exceeds_pool", "budget larger than the candidate set");
  }
  ProtocolDriver driver(std::move(session), std::move(candidates), std::move(targets),
                        options.strategy, options.seed);
  ProtocolResult result{driver.session(), driver.candidates(), {}, false, {}};
  for (std::size_t it = 0; it < options.budget; ++it) {
    auto s = driver.suggest();
    if (!s) break;
    if (options.delta_h_floor && options.strategy == Strategy::Entropy &&
        s->delta_h < *options.delta_h_floor) {
      break;
    }
    AnnotatorReply reply;
    try {
      reply = annotator(s->point, it);
    } catch (const std::exception& ex) {
      result.aborted = true;
      result.error = ex.what();
      break;
    }
    driver.annotate(Annotation{s->point, std::move(reply.y), std::move(reply.sigma)});
    if (options.metric) driver.trace().back().metric = options.metric(driver.session());
  }
  result.session = driver.session();
  result.candidates = driver.candidates();
  result.trace = driver.trace();
  return result;
}

void write_trace_csv(std::ostream& out, const std::vector<TraceEntry>& trace, int dimension) {
  out << "iteration,strategy";
  for (int c = 0; c < dimension; ++c) out << ",x" << c;
  out << ",delta_h,wall_ms\n";
  for (const auto& e : trace) {
    out << e.iteration << ',' << strategy_name(e.strategy);
    for (int c = 0; c < dimension; ++c) out << ',' << format_double(e.x[c]);
    out << ',' << format_double(e.delta_h) << ',' << format_double(e.wall_ms) << '\n';
  }
}

std::string trace_csv(const std::vector<TraceEntry>& trace, int dimension) {
  std::ostringstream out;
  write_trace_csv(out, trace, dimension);
  return out.str();
}

}  // namespace regmark
