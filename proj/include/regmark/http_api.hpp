#pragma once

#include <filesystem>
#include <string>

#include "json.hpp"
#include "regmark/session_store.hpp"

namespace httplib {
class Server;
}

namespace regmark {

struct ApiConfig {
  std::filesystem::path data_dir = ".";  // root for image and transform names
};

/// Builds a session setup from a POST /v1/sessions body.
SessionSetup setup_from_request(const nlohmann::json& body, const ApiConfig& config);

/// Parses a POST .../annotations body: y plus either a raw "sigma" or an
/// "ellipse" {radii, angle_deg | axes, alpha}; x defaults to `pending`.
Annotation annotation_from_payload(const nlohmann::json& body, const GridGeometry& domain,
                                   const Vec* pending);

/// Resolves a client-supplied file name under the data directory, rejecting
/// anything that would escape it.
std::filesystem::path resolve_data_path(const ApiConfig& config, const std::string& name);

/// Installs the /v1 routes. Errors come back as {"error": code, "message"}.
void register_routes(httplib::Server& server, SessionStore& store, const ApiConfig& config);

}  // namespace regmark
