#include "regmark/session_store.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace regmark {

namespace {

nlohmann::json points_json(const PointList& pts) {
  nlohmann::json a = nlohmann::json::array();
  for (const auto& p : pts) a.push_back(std::vector<double>(p.data(), p.data() + p.size()));
  return a;
}

PointList points_from(const nlohmann::json& j) {
  PointList pts;
  for (const auto& p : j) {
    const auto v = p.get<std::vector<double>>();
    pts.push_back(Eigen::Map<const Vec>(v.data(), static_cast<Eigen::Index>(v.size())));
  }
  return pts;
}

// Regular lattice over the domain with at most `limit` nodes.
PointList domain_subsample(const GridGeometry& g, std::size_t limit) {
  int stride = 1;
  while (g.strided(stride).node_count() > limit) ++stride;
  const GridGeometry s = g.strided(stride);
  PointList pts;
  for (std::size_t f = 0; f < s.node_count(); ++f) pts.push_back(s.node(f));
  return pts;
}

PointList even_subsample(const PointList& pts, std::size_t limit) {
  if (pts.size() <= limit) return pts;
  PointList out;
  for (std::size_t k = 0; k < limit; ++k) out.push_back(pts[k * pts.size() / limit]);
  return out;
}

}  // namespace

void to_json(nlohmann::json& j, const SessionSetup& s) {
  j = {{"fixed_image", s.fixed_image},
       {"moving_image", s.moving_image},
       {"domain", s.domain},
       {"kernel", s.kernel},
       {"sigma_min", s.options.sigma_min},
       {"target_noise", s.options.target_noise},
       {"strategy", strategy_name(s.strategy)},
       {"seed", s.seed},
       {"candidates", points_json(s.candidates)},
       {"targets",
        {{"whole_domain", s.targets.whole_domain},
         {"label", s.targets.label},
         {"points", points_json(s.targets.points)}}},
       {"entropy_subsample", s.entropy_subsample}};
}

void from_json(const nlohmann::json& j, SessionSetup& s) {
  s = SessionSetup{};
  s.fixed_image = j.value("fixed_image", std::string());
  s.moving_image = j.value("moving_image", std::string());
  s.domain = j.at("domain").get<GridGeometry>();
  s.kernel = j.at("kernel").get<KernelSpec>();
  s.options.sigma_min = j.value("sigma_min", kSigmaMin);
  s.options.target_noise = j.value("target_noise", kSigmaMin * kSigmaMin);
  s.strategy = parse_strategy(j.at("strategy").get<std::string>());
  s.seed = j.value("seed", std::uint64_t{0});
  s.candidates = points_from(j.at("candidates"));
  const auto& t = j.at("targets");
  s.targets.whole_domain = t.value("whole_domain", false);
  s.targets.label = t.value("label", std::string());
  s.targets.points = points_from(t.value("points", nlohmann::json::array()));
  s.entropy_subsample = j.value("entropy_subsample", std::size_t{256});
}

SessionRecord::SessionRecord(std::string id, SessionSetup setup)
    : id_(std::move(id)),
      setup_(std::move(setup)),
      driver_(GpSession(setup_.kernel, {}, setup_.options), CandidateSet(setup_.candidates),
              setup_.targets, setup_.strategy, setup_.seed) {
  setup_.domain.validate();
  if (setup_.domain.dimension() != setup_.kernel.dimension) {
    throw DimensionError("session domain and kernel dimensions differ");
  }
  if (setup_.entropy_subsample == 0) throw ValidationError("entropy_subsample must be >= 1");
  summary_points_ = setup_.targets.whole_domain
                        ? domain_subsample(setup_.domain, setup_.entropy_subsample)
                        : even_subsample(setup_.targets.points, setup_.entropy_subsample);
}

double SessionRecord::entropy_summary() const {
  return driver_.session().joint_entropy(summary_points_, setup_.options.target_noise);
}

SessionStore::SessionStore(std::optional<std::filesystem::path> log_dir)
    : log_dir_(std::move(log_dir)) {
  if (log_dir_) std::filesystem::create_directories(*log_dir_);
}

std::shared_ptr<SessionRecord> SessionStore::create(SessionSetup setup) {
  std::lock_guard lock(mutex_);
  char buf[32];
  std::string id;
  do {
    std::snprintf(buf, sizeof buf, "s%06llu", static_cast<unsigned long long>(next_id_++));
    id = buf;
  } while (sessions_.count(id) || (log_dir_ && std::filesystem::exists(*log_dir_ / id)));
  auto record = std::make_shared<SessionRecord>(id, std::move(setup));
  if (log_dir_) {
    const auto dir = *log_dir_ / id;
    std::filesystem::create_directories(dir);
    nlohmann::json j = record->setup();
    std::ofstream out(dir / "session.json");
    out << j.dump(2) << '\n';
    out.flush();
    if (!out) throw ValidationError("io_error", "cannot write session log");
  }
  sessions_[id] = record;
  return record;
}

std::shared_ptr<SessionRecord> SessionStore::get(const std::string& id) const {
  std::lock_guard lock(mutex_);
  auto it = sessions_.find(id);
  if (it == sessions_.end()) throw SessionNotFound(id);
  return it->second;
}

std::vector<std::string> SessionStore::ids() const {
  std::lock_guard lock(mutex_);
  std::vector<std::string> out;
  for (const auto& [id, _] : sessions_) out.push_back(id);
  return out;
}

void SessionStore::log_event(const SessionRecord& record, const nlohmann::json& event) {
  if (!log_dir_) return;
  std::ofstream out(*log_dir_ / record.id() / "events.jsonl", std::ios::app);
  out << event.dump() << '\n';
  out.flush();
  if (!out) throw ValidationError("io_error", "cannot append to session log");
}

std::optional<Suggestion> SessionStore::suggest(SessionRecord& record) {
  return record.driver().suggest();
}

// Every annotation is preceded by a suggestion so that generator use is the
// same live, on replay and in run_protocol.
void SessionStore::annotate(SessionRecord& record, const Annotation& a) {
  record.driver().suggest();
  record.driver().annotate(a);
  log_event(record, {{"type", "annotation"}, {"annotation", a}});
}

void SessionStore::skip(SessionRecord& record) {
  const auto s = record.driver().suggest();
  if (!s) return;
  record.driver().skip();
  log_event(record, {{"type", "skip"}, {"index", s->index}});
}

std::shared_ptr<SessionRecord> replay_session(const std::filesystem::path& dir) {
  nlohmann::json setup_json;
  std::ifstream(dir / "session.json") >> setup_json;
  auto record = std::make_shared<SessionRecord>(dir.filename().string(), setup_json.get<SessionSetup>());
  std::ifstream events(dir / "events.jsonl");
  std::string line;
  while (std::getline(events, line)) {
    if (line.empty()) continue;
    nlohmann::json e;
    try {
      e = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception&) {
      break;  // torn final line from a crash mid-write
    }
    const std::string type = e.at("type").get<std::string>();
    if (type == "annotation") {
      record->driver().suggest();
      record->driver().annotate(e.at("annotation").get<Annotation>());
    } else if (type == "skip") {
      record->driver().suggest();
      record->driver().skip();
    }
  }
  return record;
}

void SessionStore::restore() {
  if (!log_dir_) return;
  std::lock_guard lock(mutex_);
  for (const auto& entry : std::filesystem::directory_iterator(*log_dir_)) {
    if (!entry.is_directory() || !std::filesystem::exists(entry.path() / "session.json")) continue;
    auto record = replay_session(entry.path());
    sessions_[record->id()] = record;
  }
}

}  // namespace regmark
