#include "regmark/http_api.hpp"

#include <cmath>
#include <numbers>

#include "regmark/image_io.hpp"
#include "regmark/maps.hpp"
#include "regmark/stats.hpp"

// After Eigen: <resolv.h> defines a _res macro that clashes with it.
#include "httplib.h"

namespace regmark {

namespace {

using nlohmann::json;

class HttpError : public Error {
 public:
  HttpError(int status, std::string code, const std::string& what)
      : Error(std::move(code), what), status_(status) {}
  int status() const { return status_; }

 private:
  int status_;
};

Vec vec_from(const json& j, const char* what) {
  if (!j.is_array()) throw ValidationError("invalid_payload", std::string(what) + " must be an array");
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const Vec>(v.data(), static_cast<Eigen::Index>(v.size()));
}

json vec_json(const Vec& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

json mat_json(const Mat& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    std::vector<double> row(static_cast<std::size_t>(m.cols()));
    for (Eigen::Index c = 0; c < m.cols(); ++c) row[static_cast<std::size_t>(c)] = m(r, c);
    rows.push_back(row);
  }
  return rows;
}

Mat mat_from(const json& j, int d, const char* what) {
  if (!j.is_array() || static_cast<int>(j.size()) != d) {
    throw ValidationError("dimension_mismatch", std::string(what) + " has the wrong shape");
  }
  Mat m(d, d);
  for (int r = 0; r < d; ++r) {
    const auto& row = j[static_cast<std::size_t>(r)];
    if (!row.is_array() || static_cast<int>(row.size()) != d) {
      throw ValidationError("dimension_mismatch", std::string(what) + " has the wrong shape");
    }
    for (int c = 0; c < d; ++c) m(r, c) = row[static_cast<std::size_t>(c)].get<double>();
  }
  return m;
}

PointList points_from(const json& j) {
  PointList pts;
  for (const auto& p : j) pts.push_back(vec_from(p, "point"));
  return pts;
}

void require_in_domain(const GridGeometry& g, const Vec& p, const char* what) {
  require_dimension(p, g.dimension(), what);
  if (!g.contains(p)) throw ValidationError("out_of_domain", std::string(what) + " lies outside the image");
}

json ellipse_json(const Ellipse& e) {
  return {{"center", vec_json(e.center)}, {"axes", mat_json(e.axes)}, {"radii", vec_json(e.radii)},
          {"alpha", e.alpha}};
}

json annotation_json(const Annotation& a) {
  return {{"x", vec_json(a.x)}, {"y", vec_json(a.y)}, {"sigma", mat_json(a.sigma)}};
}

json suggestion_json(const SessionRecord& r, const std::optional<Suggestion>& s) {
  const auto& d = r.driver();
  json j = {{"strategy", strategy_name(d.strategy())},
            {"iteration", d.trace().size()},
            {"remaining", d.candidates().remaining()}};
  if (!s) {
    j["done"] = true;
    return j;
  }
  j["done"] = false;
  j["index"] = s->index;
  j["point"] = vec_json(s->point);
  j["delta_h"] = std::isfinite(s->delta_h) ? json(s->delta_h) : json(nullptr);
  return j;
}

void send_json(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

int status_for(const Error& e) {
  if (const auto* h = dynamic_cast<const HttpError*>(&e)) return h->status();
  if (dynamic_cast<const SessionNotFound*>(&e)) return 404;
  if (dynamic_cast<const ValidationError*>(&e) || dynamic_cast<const DimensionError*>(&e) ||
      dynamic_cast<const DomainError*>(&e) || dynamic_cast<const InsufficientDataError*>(&e)) {
    return 422;
  }
  if (dynamic_cast<const EmptyPoolError*>(&e)) return 409;
  return 500;
}

// Wraps a handler so every failure becomes a JSON error body.
template <typename Fn>
httplib::Server::Handler guarded(Fn fn) {
  return [fn](const httplib::Request& req, httplib::Response& res) {
    try {
      fn(req, res);
    } catch (const Error& e) {
      send_json(res, status_for(e), {{"error", e.code()}, {"message", e.what()}});
    } catch (const json::parse_error& e) {
      send_json(res, 400, {{"error", "malformed_json"}, {"message", e.what()}});
    } catch (const json::exception& e) {
      send_json(res, 422, {{"error", "invalid_payload"}, {"message", e.what()}});
    } catch (const std::exception& e) {
      send_json(res, 500, {{"error", "internal"}, {"message", e.what()}});
    }
  };
}

json parse_body(const httplib::Request& req) {
  if (req.body.empty()) return json::object();
  return json::parse(req.body);
}

int int_param(const httplib::Request& req, const char* name, int fallback) {
  if (!req.has_param(name)) return fallback;
  try {
    return std::stoi(req.get_param_value(name));
  } catch (const std::exception&) {
    throw ValidationError("invalid_parameter", std::string("parameter ") + name + " is not an integer");
  }
}

ScalarImage load_image(const ApiConfig& config, const std::string& name) {
  return read_image(resolve_data_path(config, name).string());
}

PointMap load_transform(const ApiConfig& config, const httplib::Request& req, const GridGeometry& domain) {
  if (!req.has_param("transform")) return [](const Vec& x) { return x; };
  std::string name = req.get_param_value("transform");
  if (name.size() < 5 || name.substr(name.size() - 5) != ".json") name += ".json";
  auto field = std::make_shared<TransformField>(load_field(resolve_data_path(config, name).string()));
  if (field->dimension() != domain.dimension()) throw DimensionError("transform dimension mismatch");
  return [field](const Vec& x) { return (*field)(x); };
}

}  // namespace

std::filesystem::path resolve_data_path(const ApiConfig& config, const std::string& name) {
  if (name.empty() || name.find("..") != std::string::npos || name.front() == '/' ||
      name.find('\\') != std::string::npos) {
    throw ValidationError("invalid_name", "invalid file name '" + name + "'");
  }
  const auto path = config.data_dir / name;
  if (!std::filesystem::exists(path)) throw HttpError(404, "not_found", "no such file '" + name + "'");
  return path;
}

SessionSetup setup_from_request(const json& body, const ApiConfig& config) {
  if (!body.is_object()) throw ValidationError("invalid_payload", "body must be an object");
  SessionSetup s;
  s.fixed_image = body.value("fixed_image", std::string());
  s.moving_image = body.value("moving_image", std::string());
  std::optional<ScalarImage> fixed;
  if (!s.fixed_image.empty()) {
    fixed = load_image(config, s.fixed_image);
    s.domain = fixed->geometry;
  } else if (body.contains("domain")) {
    s.domain = body.at("domain").get<GridGeometry>();
  } else {
    throw ValidationError("invalid_payload", "either fixed_image or domain is required");
  }
  if (!s.moving_image.empty()) resolve_data_path(config, s.moving_image);
  const int d = s.domain.dimension();

  const json kernel = body.value("kernel", json::object());
  if (kernel.contains("scales") && kernel.at("scales").is_array()) {
    s.kernel = kernel.get<KernelSpec>();
  } else {
    double extent = 0.0;
    for (int a = 0; a < d; ++a) {
      extent = std::max(extent, (s.domain.shape[static_cast<std::size_t>(a)] - 1) * s.domain.spacing[a]);
    }
    const double rho1 = kernel.value("rho1", 10.0);
    const std::size_t count = kernel.value("scales", KernelSpec::scales_for_extent(rho1, extent));
    s.kernel = KernelSpec::ladder(parse_basis(kernel.value("basis", std::string("wendland1"))), rho1,
                                  count, d, kernel.value("weight", 1.0));
    if (kernel.contains("weights")) s.kernel.weights = kernel.at("weights").get<std::vector<double>>();
  }
  s.kernel.dimension = d;
  s.kernel.validate();

  s.options.sigma_min = body.value("sigma_min", kSigmaMin);
  s.options.target_noise = body.value("target_noise", s.options.sigma_min * s.options.sigma_min);
  s.strategy = parse_strategy(body.value("strategy", std::string("entropy")));
  s.seed = body.value("seed", std::uint64_t{0});
  s.entropy_subsample = body.value("entropy_subsample", std::size_t{256});

  const json cand = body.value("candidates", json::object());
  if (cand.contains("points")) {
    s.candidates = points_from(cand.at("points"));
  } else {
    if (!fixed) throw ValidationError("invalid_payload", "candidate detection needs a fixed image");
    HarrisOptions h;
    h.max_count = cand.value("max_count", h.max_count);
    h.min_spacing = cand.value("min_spacing", h.min_spacing);
    s.candidates = detect_candidates(*fixed, h).points;
  }
  for (const auto& p : s.candidates) require_in_domain(s.domain, p, "candidate");

  const json targets = body.value("targets", json::object());
  if (targets.contains("points")) {
    s.targets = TargetSet{points_from(targets.at("points")), targets.value("label", std::string("points")), false};
  } else if (targets.contains("region")) {
    const auto& r = targets.at("region");
    const Vec lo = vec_from(r.at("min"), "region.min");
    const Vec hi = vec_from(r.at("max"), "region.max");
    const int stride = r.value("stride", 1);
    if (stride < 1) throw ValidationError("invalid_payload", "region stride must be >= 1");
    require_dimension(lo, d, "region.min");
    require_dimension(hi, d, "region.max");
    const GridGeometry lattice = s.domain.strided(stride);
    PointList pts;
    for (std::size_t f = 0; f < lattice.node_count(); ++f) {
      const Vec p = lattice.node(f);
      if ((p.array() >= lo.array()).all() && (p.array() <= hi.array()).all()) pts.push_back(p);
    }
    s.targets = TargetSet{std::move(pts), targets.value("label", std::string("region")), false};
  } else {
    s.targets = TargetSet::whole(targets.value("label", std::string("domain")));
  }
  for (const auto& p : s.targets.points) require_in_domain(s.domain, p, "target");
  s.targets.validate();
  return s;
}

Annotation annotation_from_payload(const json& body, const GridGeometry& domain, const Vec* pending) {
  if (!body.is_object()) throw ValidationError("invalid_payload", "body must be an object");
  const int d = domain.dimension();
  Annotation a;
  if (body.contains("x")) {
    a.x = vec_from(body.at("x"), "x");
  } else if (pending != nullptr) {
    a.x = *pending;
  } else {
    throw ValidationError("no_pending_suggestion", "x omitted and no suggestion is pending");
  }
  if (!body.contains("y")) throw ValidationError("invalid_payload", "y is required");
  a.y = vec_from(body.at("y"), "y");
  require_in_domain(domain, a.x, "x");
  require_in_domain(domain, a.y, "y");

  if (body.contains("sigma")) {
    a.sigma = mat_from(body.at("sigma"), d, "sigma");
  } else if (body.contains("ellipse")) {
    const auto& e = body.at("ellipse");
    Ellipse el;
    el.center = a.y;
    el.radii = vec_from(e.at("radii"), "ellipse.radii");
    el.alpha = e.value("alpha", kDefaultAlpha);
    if (e.contains("axes")) {
      el.axes = mat_from(e.at("axes"), d, "ellipse.axes");
    } else if (d == 2) {
      const double t = e.value("angle_deg", 0.0) * std::numbers::pi / 180.0;
      el.axes.resize(2, 2);
      el.axes << std::cos(t), -std::sin(t), std::sin(t), std::cos(t);
    } else {
      el.axes = Mat::Identity(d, d);
    }
    a.sigma = covariance_from_ellipse(el);
  } else {
    throw ValidationError("invalid_payload", "either sigma or ellipse is required");
  }
  a.validate();
  return a;
}

void register_routes(httplib::Server& server, SessionStore& store, const ApiConfig& config) {
  server.Get("/v1/health", guarded([](const httplib::Request&, httplib::Response& res) {
    send_json(res, 200, {{"status", "ok"}});
  }));

  server.Post("/v1/sessions", guarded([&store, config](const httplib::Request& req, httplib::Response& res) {
    auto record = store.create(setup_from_request(parse_body(req), config));
    std::shared_lock lock(record->mutex());
    json setup = record->setup();
    send_json(res, 201, {{"id", record->id()}, {"setup", setup}, {"entropy", record->entropy_summary()}});
  }));

  server.Get("/v1/sessions/:id", guarded([&store](const httplib::Request& req, httplib::Response& res) {
    auto record = store.get(req.path_params.at("id"));
    std::shared_lock lock(record->mutex());
    json annotations = json::array();
    for (const auto& a : record->driver().session().annotations()) annotations.push_back(annotation_json(a));
    json setup = record->setup();
    send_json(res, 200,
              {{"id", record->id()},
               {"setup", setup},
               {"iteration", record->driver().trace().size()},
               {"remaining", record->driver().candidates().remaining()},
               {"annotations", annotations},
               {"entropy", record->entropy_summary()}});
  }));

  server.Get("/v1/sessions/:id/suggestion", guarded([&store](const httplib::Request& req, httplib::Response& res) {
    auto record = store.get(req.path_params.at("id"));
    std::unique_lock lock(record->mutex());
    const auto s = store.suggest(*record);
    send_json(res, 200, suggestion_json(*record, s));
  }));

  server.Post("/v1/sessions/:id/annotations", guarded([&store](const httplib::Request& req, httplib::Response& res) {
    auto record = store.get(req.path_params.at("id"));
    const json body = parse_body(req);
    std::unique_lock lock(record->mutex());
    auto& driver = record->driver();
    if (body.contains("expected_iteration") &&
        body.at("expected_iteration").get<std::size_t>() != driver.trace().size()) {
      throw HttpError(409, "conflict", "session advanced since the suggestion was fetched");
    }
    const auto pending = store.suggest(*record);
    const Vec* pending_x = pending ? &pending->point : nullptr;
    const Annotation a = annotation_from_payload(body, record->setup().domain, pending_x);
    const double before = record->entropy_summary();
    store.annotate(*record, a);
    const double after = record->entropy_summary();
    const Annotation& stored = driver.session().annotations().back();
    send_json(res, 200,
              {{"iteration", driver.trace().size()},
               {"remaining", driver.candidates().remaining()},
               {"entropy", after},
               {"entropy_change", before - after},
               {"annotation", annotation_json(stored)},
               {"ellipse", ellipse_json(ellipse_from_covariance(stored.sigma, stored.y, body.value("ellipse", json::object()).value("alpha", kDefaultAlpha)))}});
  }));

  server.Post("/v1/sessions/:id/skip", guarded([&store](const httplib::Request& req, httplib::Response& res) {
    auto record = store.get(req.path_params.at("id"));
    std::unique_lock lock(record->mutex());
    store.skip(*record);
    send_json(res, 200, suggestion_json(*record, store.suggest(*record)));
  }));

  server.Get("/v1/sessions/:id/trace", guarded([&store](const httplib::Request& req, httplib::Response& res) {
    auto record = store.get(req.path_params.at("id"));
    std::shared_lock lock(record->mutex());
    res.status = 200;
    res.set_content(trace_csv(record->driver().trace(), record->setup().domain.dimension()), "text/csv");
  }));

  server.Get("/v1/sessions/:id/maps/:kind", guarded([&store, config](const httplib::Request& req, httplib::Response& res) {
    auto record = store.get(req.path_params.at("id"));
    const std::string kind = req.path_params.at("kind");
    if (kind != "error" && kind != "entropy" && kind != "blended") {
      throw HttpError(404, "not_found", "unknown map kind '" + kind + "'");
    }
    const GridGeometry& domain = record->setup().domain;
    if (domain.dimension() != 2) throw DimensionError("PNG maps are available for 2-D sessions only");
    const int stride = int_param(req, "stride", default_map_stride(2));
    if (stride < 1) throw ValidationError("invalid_parameter", "stride must be >= 1");
    const GridGeometry grid = domain.strided(stride);
    const PointMap phi_hat = load_transform(config, req, domain);

    std::shared_lock lock(record->mutex());
    const GpSession& session = record->driver().session();
    Raster8 raster;
    if (kind == "error") {
      raster = render_error_map(resample(error_heat_map(phi_hat, session, grid), domain));
    } else if (kind == "entropy") {
      const ScalarImage h = resample(entropy_map(session, grid), domain);
      raster = to_gray8(h, h.min(), h.max());
    } else {
      const ScalarImage e = resample(error_heat_map(phi_hat, session, grid), domain);
      const ScalarImage h = resample(entropy_map(session, grid), domain);
      std::optional<ScalarImage> fixed;
      if (!record->setup().fixed_image.empty()) fixed = load_image(config, record->setup().fixed_image);
      raster = blended_map(e, h, fixed ? &*fixed : nullptr);
    }
    const auto png = encode_png(raster);
    res.status = 200;
    res.set_content(std::string(png.begin(), png.end()), "image/png");
  }));

  server.Get("/v1/images/:name/tile", guarded([config](const httplib::Request& req, httplib::Response& res) {
    const ScalarImage img = load_image(config, req.path_params.at("name"));
    const int d = img.geometry.dimension();
    const int width = img.geometry.shape[0];
    const int height = img.geometry.shape[1];
    const int x0 = int_param(req, "x0", 0);
    const int y0 = int_param(req, "y0", 0);
    const int w = int_param(req, "w", width - x0);
    const int h = int_param(req, "h", height - y0);
    const int z = d == 3 ? int_param(req, "z", img.geometry.shape[2] / 2) : 0;
    if (x0 < 0 || y0 < 0 || w < 1 || h < 1 || x0 + w > width || y0 + h > height ||
        (d == 3 && (z < 0 || z >= img.geometry.shape[2]))) {
      throw ValidationError("out_of_domain", "tile lies outside the image");
    }
    ScalarImage tile{GridGeometry::pixels({w, h}), std::vector<double>(static_cast<std::size_t>(w) * h)};
    for (int j = 0; j < h; ++j) {
      for (int i = 0; i < w; ++i) {
        std::vector<int> idx{x0 + i, y0 + j};
        if (d == 3) idx.push_back(z);
        tile.values[static_cast<std::size_t>(j) * w + i] = img.values[img.geometry.flatten(idx)];
      }
    }
    const double lo = req.has_param("lo") ? std::stod(req.get_param_value("lo")) : img.min();
    const double hi = req.has_param("hi") ? std::stod(req.get_param_value("hi")) : img.max();
    const auto png = encode_png(to_gray8(tile, lo, hi));
    res.status = 200;
    res.set_content(std::string(png.begin(), png.end()), "image/png");
  }));
}

}  // namespace regmark
