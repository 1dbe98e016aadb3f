#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include "json.hpp"
#include "regmark/protocol.hpp"

namespace regmark {

/// Everything needed to start (or replay) an annotation session.
struct SessionSetup {
  std::string fixed_image;   // relative to the data directory, may be empty
  std::string moving_image;
  GridGeometry domain;
  KernelSpec kernel;
  GpOptions options;
  Strategy strategy = Strategy::Entropy;
  std::uint64_t seed = 0;
  PointList candidates;
  TargetSet targets;
  std::size_t entropy_subsample = 256;
};

void to_json(nlohmann::json& j, const SessionSetup& s);
void from_json(const nlohmann::json& j, SessionSetup& s);

class SessionNotFound : public Error {
 public:
  explicit SessionNotFound(const std::string& id) : Error("not_found", "unknown session '" + id + "'") {}
};

/// One live session. Mutations take the unique lock, queries the shared one.
class SessionRecord {
 public:
  SessionRecord(std::string id, SessionSetup setup);

  const std::string& id() const { return id_; }
  const SessionSetup& setup() const { return setup_; }

  /// Targets used for the entropy summary (at most setup.entropy_subsample).
  const PointList& summary_points() const { return summary_points_; }

  /// joint_entropy over summary_points with the target pseudo-noise.
  double entropy_summary() const;

  ProtocolDriver& driver() { return driver_; }
  const ProtocolDriver& driver() const { return driver_; }

  std::shared_mutex& mutex() const { return mutex_; }

 private:
  std::string id_;
  SessionSetup setup_;
  ProtocolDriver driver_;
  PointList summary_points_;
  mutable std::shared_mutex mutex_;
};

/// In-memory session map with an optional append-only log per session:
/// <dir>/<id>/session.json holds the setup, events.jsonl one line per
/// suggest/annotate/skip event, flushed before the call returns.
class SessionStore {
 public:
  explicit SessionStore(std::optional<std::filesystem::path> log_dir = std::nullopt);

  std::shared_ptr<SessionRecord> create(SessionSetup setup);
  std::shared_ptr<SessionRecord> get(const std::string& id) const;
  std::vector<std::string> ids() const;

  /// Mutations; the caller holds the record's unique lock. annotate() always
  /// computes the pending suggestion first, even when `a.x` differs from it.
  std::optional<Suggestion> suggest(SessionRecord& record);
  void annotate(SessionRecord& record, const Annotation& a);
  void skip(SessionRecord& record);

  /// Rebuilds every logged session by replaying its events.
  void restore();

  const std::optional<std::filesystem::path>& log_dir() const { return log_dir_; }

 private:
  void log_event(const SessionRecord& record, const nlohmann::json& event);

  std::optional<std::filesystem::path> log_dir_;
  mutable std::mutex mutex_;
  std::map<std::string, std::shared_ptr<SessionRecord>> sessions_;
  std::uint64_t next_id_ = 1;
};

/// Replays a session log directory into a fresh record.
std::shared_ptr<SessionRecord> replay_session(const std::filesystem::path& dir);

}  // namespace regmark
