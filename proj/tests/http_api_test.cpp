#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include <gtest/gtest.h>

#include "regmark/http_api.hpp"
#include "regmark/image_io.hpp"
#include "support.hpp"

// Included last: its resolver header defines macros that clash with Eigen.
#include "httplib.h"

using namespace regmark;
using nlohmann::json;

namespace {

class ApiTest : public ::testing::Test {
 protected:
  void SetUp() override {
    data_ = std::filesystem::temp_directory_path() / "regmark_api_data";
    std::filesystem::remove_all(data_);
    std::filesystem::create_directories(data_);
    Raster8 img{40, 30, 1, {}};
    for (int y = 0; y < 30; ++y)
      for (int x = 0; x < 40; ++x) img.pixels.push_back(static_cast<std::uint8_t>((x * 6 + y) % 256));
    write_png((data_ / "fixed.png").string(), img);
    config_.data_dir = data_;
    register_routes(server_, store_, config_);
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
    client_ = std::make_unique<httplib::Client>("127.0.0.1", port_);
  }

  void TearDown() override {
    server_.stop();
    thread_.join();
    std::filesystem::remove_all(data_);
  }

  json post(const std::string& path, const json& body, int expect) {
    auto r = client_->Post(path, body.dump(), "application/json");
    EXPECT_TRUE(r);
    EXPECT_EQ(r->status, expect) << r->body;
    return json::parse(r->body);
  }

  json get(const std::string& path, int expect) {
    auto r = client_->Get(path);
    EXPECT_TRUE(r);
    EXPECT_EQ(r->status, expect) << r->body;
    return json::parse(r->body);
  }

  static json session_body() {
    json cand = json::array();
    for (int i = 0; i < 5; ++i)
      for (int j = 0; j < 3; ++j) cand.push_back({4 + 8 * i, 4 + 9 * j});
    return {{"domain", GridGeometry::pixels({40, 30})},
            {"kernel", {{"basis", "wendland1"}, {"rho1", 6.0}, {"scales", 3}}},
            {"strategy", "entropy"},
            {"seed", 3},
            {"candidates", {{"points", cand}}},
            {"targets", {{"region", {{"min", {0, 0}}, {"max", {20, 14}}, {"stride", 4}}}}}};
  }

  std::filesystem::path data_;
  ApiConfig config_;
  SessionStore store_;
  httplib::Server server_;
  std::thread thread_;
  int port_ = 0;
  std::unique_ptr<httplib::Client> client_;
};

// y depends only on x, so the HTTP loop and run_protocol see the same answers.
Vec answer(const Vec& x) { return x + oracle::vec2(0.1 * x[1], -0.05 * x[0]); }

std::string without_last_column(const std::string& csv) {
  std::istringstream in(csv);
  std::string line, out;
  while (std::getline(in, line)) out += line.substr(0, line.rfind(',')) + "\n";
  return out;
}

}  // namespace

TEST_F(ApiTest, Health) { EXPECT_EQ(get("/v1/health", 200)["status"], "ok"); }

TEST_F(ApiTest, MatchesLibraryProtocol) {
  const json body = session_body();
  const json created = post("/v1/sessions", body, 201);
  const std::string id = created["id"];
  const std::size_t budget = 9;
  for (std::size_t i = 0; i < budget; ++i) {
    const json s = get("/v1/sessions/" + id + "/suggestion", 200);
    EXPECT_EQ(s["iteration"], i);
    Vec x(2);
    x << s["point"][0].get<double>(), s["point"][1].get<double>();
    const Vec y = answer(x);
    post("/v1/sessions/" + id + "/annotations",
         {{"y", {y[0], y[1]}}, {"sigma", {{1.5, 0.2}, {0.2, 0.8}}}, {"expected_iteration", i}}, 200);
  }
  const auto trace = client_->Get("/v1/sessions/" + id + "/trace");
  ASSERT_TRUE(trace);
  EXPECT_EQ(trace->get_header_value("Content-Type"), "text/csv");

  const SessionSetup setup = setup_from_request(body, config_);
  ProtocolOptions o;
  o.strategy = Strategy::Entropy;
  o.budget = budget;
  o.seed = 3;
  Mat sigma(2, 2);
  sigma << 1.5, 0.2, 0.2, 0.8;
  const auto lib = run_protocol(GpSession(setup.kernel, {}, setup.options), CandidateSet(setup.candidates), setup.targets, o,
                                [&](const Vec& x, std::size_t) { return AnnotatorReply{answer(x), sigma}; });
  EXPECT_EQ(without_last_column(trace->body), without_last_column(trace_csv(lib.trace, 2)));
}

TEST_F(ApiTest, ErrorCodes) {
  EXPECT_EQ(get("/v1/sessions/s999999", 404)["error"], "not_found");
  const std::string id = post("/v1/sessions", session_body(), 201)["id"];
  EXPECT_EQ(post("/v1/sessions/" + id + "/annotations", {{"y", {1, 1}}, {"sigma", {{1, 0}, {0, 1}}}, {"expected_iteration", 3}}, 409)["error"],
            "conflict");
  EXPECT_EQ(post("/v1/sessions/" + id + "/annotations", {{"x", {100, 1}}, {"y", {1, 1}}, {"sigma", {{1, 0}, {0, 1}}}}, 422)["error"],
            "out_of_domain");
  EXPECT_EQ(post("/v1/sessions/" + id + "/annotations", {{"y", {1, 1, 1}}, {"sigma", {{1, 0}, {0, 1}}}}, 422)["error"],
            "dimension_mismatch");
  EXPECT_EQ(post("/v1/sessions/" + id + "/annotations", {{"y", {1, 1}}, {"sigma", {{1, 2}, {2, 1}}}}, 422)["error"],
            "invalid_covariance");
  auto bad = client_->Post("/v1/sessions", "{not json", "application/json");
  ASSERT_TRUE(bad);
  EXPECT_EQ(bad->status, 400);
  json no_domain = session_body();
  no_domain.erase("domain");
  post("/v1/sessions", no_domain, 422);
  get("/v1/sessions/" + id + "/maps/contour", 404);
}

TEST_F(ApiTest, EllipseSizeDrivesEntropyChange) {
  const std::string a = post("/v1/sessions", session_body(), 201)["id"];
  const std::string b = post("/v1/sessions", session_body(), 201)["id"];
  const json tight = post("/v1/sessions/" + a + "/annotations",
                          {{"y", {10, 10}}, {"x", {9, 9}}, {"ellipse", {{"radii", {0.5, 0.5}}, {"angle_deg", 0}}}}, 200);
  const json huge = post("/v1/sessions/" + b + "/annotations",
                         {{"y", {10, 10}}, {"x", {9, 9}}, {"ellipse", {{"radii", {40, 25}}, {"angle_deg", 30}}}}, 200);
  EXPECT_GT(tight["entropy_change"].get<double>(), huge["entropy_change"].get<double>());
  EXPECT_GT(huge["entropy_change"].get<double>(), 0.0);
  auto radii = huge["ellipse"]["radii"].get<std::vector<double>>();
  std::sort(radii.begin(), radii.end());
  EXPECT_NEAR(radii[0], 25.0, 1e-9);
  EXPECT_NEAR(radii[1], 40.0, 1e-9);
}

TEST_F(ApiTest, SkipAndSessionView) {
  const std::string id = post("/v1/sessions", session_body(), 201)["id"];
  const json first = get("/v1/sessions/" + id + "/suggestion", 200);
  const json next = post("/v1/sessions/" + id + "/skip", json::object(), 200);
  EXPECT_NE(next["index"], first["index"]);
  const json view = get("/v1/sessions/" + id, 200);
  EXPECT_EQ(view["iteration"], 0);
  // The skipped candidate leaves the pool.
  EXPECT_EQ(view["remaining"], 14);
}

TEST_F(ApiTest, MapsAndTiles) {
  json body = session_body();
  body.erase("domain");
  body["fixed_image"] = "fixed.png";
  const std::string id = post("/v1/sessions", body, 201)["id"];
  post("/v1/sessions/" + id + "/annotations", {{"y", {10, 10}}, {"x", {9, 9}}, {"sigma", {{1, 0}, {0, 1}}}}, 200);
  for (const char* kind : {"error", "entropy", "blended"}) {
    auto r = client_->Get("/v1/sessions/" + id + "/maps/" + kind + "?stride=3");
    ASSERT_TRUE(r);
    ASSERT_EQ(r->status, 200) << kind;
    EXPECT_EQ(r->get_header_value("Content-Type"), "image/png");
    std::ofstream(data_ / "out.png", std::ios::binary) << r->body;
    const auto raster = read_png((data_ / "out.png").string());
    EXPECT_EQ(raster.width, 40);
    EXPECT_EQ(raster.height, 30);
  }
  auto tile = client_->Get("/v1/images/fixed.png/tile?x0=5&y0=2&w=8&h=4");
  ASSERT_TRUE(tile);
  ASSERT_EQ(tile->status, 200);
  std::ofstream(data_ / "tile.png", std::ios::binary) << tile->body;
  const auto raster = read_png((data_ / "tile.png").string());
  EXPECT_EQ(raster.width, 8);
  EXPECT_EQ(raster.height, 4);
  get("/v1/images/fixed.png/tile?x0=38&w=8", 422);
  get("/v1/images/missing.png/tile", 404);
}

TEST_F(ApiTest, DataPathsStayInside) {
  EXPECT_THROW(resolve_data_path(config_, "../etc/passwd"), ValidationError);
  EXPECT_THROW(resolve_data_path(config_, "/etc/passwd"), ValidationError);
  EXPECT_NO_THROW(resolve_data_path(config_, "fixed.png"));
}
