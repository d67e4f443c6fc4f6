#include <gtest/gtest.h>

#include <filesystem>
#include <thread>

#include "fixtures.h"
#include "httplib.h"
#include "rallyviz/io.h"
#include "rallyviz/service.h"

namespace rallyviz {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::string src(const std::string& rel) { return std::string(RALLYVIZ_SOURCE_DIR) + "/" + rel; }

const json& project_body() {
  static const json body = {{"tracking", read_json(src("data/fixtures/rally_300.json"))},
                            {"tactics", read_json(src("data/fixtures/tactics_import.json"))}};
  return body;
}

ServiceConfig config(const std::string& name) {
  ServiceConfig c;
  c.data_dir = (fs::temp_directory_path() / ("rallyviz_service_" + name)).string();
  fs::remove_all(c.data_dir);
  c.corpus_path = src("data/corpus/sample_corpus.json");
  return c;
}

class HttpFixture : public ::testing::Test {
 protected:
  void SetUp() override {
    service_ = std::make_unique<Service>(config("http"));
    install_routes(server_, *service_);
    port_ = server_.bind_to_any_port("127.0.0.1");
    ASSERT_GT(port_, 0);
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
    client_ = std::make_unique<httplib::Client>("127.0.0.1", port_);
    client_->set_read_timeout(60, 0);
  }
  void TearDown() override {
    server_.stop();
    thread_.join();
  }

  std::string create() {
    auto res = client_->Post("/projects", project_body().dump(), "application/json");
    EXPECT_EQ(res->status, 201);
    return json::parse(res->body)["project_id"];
  }

  std::unique_ptr<Service> service_;
  httplib::Server server_;
  std::unique_ptr<httplib::Client> client_;
  std::thread thread_;
  int port_ = 0;
};

TEST_F(HttpFixture, AuthoringFlow) {
  EXPECT_EQ(client_->Get("/health")->status, 200);
  const std::string id = create();
  EXPECT_EQ(id, "p000001");

  auto res = client_->Get("/projects/" + id);
  ASSERT_EQ(res->status, 200);
  const json summary = json::parse(res->body);
  EXPECT_EQ(summary["pyramid"]["turn_count"], 6);
  EXPECT_EQ(summary["video"]["frame_count"], 300);

  res = client_->Get("/projects/" + id + "/timeline");
  const json timeline = json::parse(res->body);
  EXPECT_EQ(timeline["turns"].size(), 6u);
  EXPECT_EQ(timeline["turns"][0]["frame_span"], json({20, 64}));

  res = client_->Get("/projects/" + id + "/pyramid?from=100&to=120");
  EXPECT_EQ(json::parse(res->body)["turns"], json({"turn#1", "turn#2"}));
  EXPECT_EQ(client_->Get("/projects/" + id + "/pyramid?from=x&to=3")->status, 422);

  res = client_->Get("/projects/" + id + "/attributes?subject=Ball&frame=155&purpose=Entertainment");
  for (const auto& a : json::parse(res->body)["attributes"]) EXPECT_EQ(a["level"], "Object");

  const json sel = {{"subject", "Ball"}, {"frame", 70}, {"attributes", {"ball_trajectory", "ball_placement"}}};
  res = client_->Post("/projects/" + id + "/selections", sel.dump(), "application/json");
  ASSERT_EQ(res->status, 200) << res->body;
  const json added = json::parse(res->body);
  ASSERT_EQ(added["mappings"].size(), 2u);
  EXPECT_EQ(added["mappings"][0]["visual"], "Polyline");
  EXPECT_EQ(added["recommendations"][0]["source"], "Corpus");
  const std::string mid = added["mappings"][0]["mapping_id"];

  const json conflict = {{"subject", "Player A"}, {"frame", 70}, {"attributes", {"stroke_technique"}}};
  res = client_->Post("/projects/" + id + "/selections", conflict.dump(), "application/json");
  EXPECT_EQ(res->status, 409);
  EXPECT_EQ(json::parse(res->body)["error"]["code"], "Conflict");
  EXPECT_EQ(json::parse(client_->Get("/projects/" + id + "/scripts/main")->body)["mappings"].size(), 2u);

  res = client_->Patch("/projects/" + id + "/scripts/main/mappings/" + mid,
                       json({{"style", {{"color", "#00ff00"}}}}).dump(), "application/json");
  ASSERT_EQ(res->status, 200);
  res = client_->Patch("/projects/" + id + "/scripts/main/mappings/" + mid,
                       json({{"style", {{"opacity", 4}}}}).dump(), "application/json");
  EXPECT_EQ(res->status, 422);

  res = client_->Put("/projects/" + id + "/scripts/main/order", json({{"order", "FlashForward"}}).dump(),
                     "application/json");
  ASSERT_EQ(res->status, 200);
  res = client_->Put("/projects/" + id + "/scripts/main/order", json({{"order", "Grouped"}}).dump(),
                     "application/json");
  EXPECT_EQ(res->status, 200);
  EXPECT_EQ(client_->Get("/projects/" + id + "/schedule/main")->status, 422);
  client_->Put("/projects/" + id + "/scripts/main/order", json({{"order", "Linear"}}).dump(), "application/json");

  res = client_->Get("/projects/" + id + "/schedule/main");
  ASSERT_EQ(res->status, 200);
  const json sched = json::parse(res->body);
  EXPECT_EQ(sched["total_frames"], sched["schedule"]["frames"].size());

  res = client_->Get("/projects/" + id + "/preview/main/80");
  ASSERT_EQ(res->status, 200);
  EXPECT_EQ(res->get_header_value("Content-Type"), "image/svg+xml");
  EXPECT_EQ(res->get_header_value("X-Frame-Kind"), sched["schedule"]["frames"][80]["kind"].get<std::string>());
  const std::string etag = res->get_header_value("ETag");
  EXPECT_NE(res->body.find("#00ff00"), std::string::npos);
  auto again = client_->Get("/projects/" + id + "/preview/main/80", {{"If-None-Match", etag}});
  EXPECT_EQ(again->status, 304);
  EXPECT_TRUE(again->body.empty());
  EXPECT_EQ(client_->Get("/projects/" + id + "/preview/main/99999")->status, 404);
  EXPECT_EQ(client_->Get("/projects/" + id + "/preview/main/abc")->status, 422);

  res = client_->Delete("/projects/" + id + "/scripts/main/mappings/" + mid);
  ASSERT_EQ(res->status, 200);
  EXPECT_EQ(client_->Delete("/projects/" + id + "/scripts/main/mappings/" + mid)->status, 404);
  auto after = client_->Get("/projects/" + id + "/preview/main/80", {{"If-None-Match", etag}});
  EXPECT_EQ(after->status, 200);

  res = client_->Post("/projects/" + id + "/export/main", "", "application/json");
  ASSERT_EQ(res->status, 200);
  const json exported = json::parse(res->body);
  EXPECT_TRUE(fs::exists(exported["manifest"].get<std::string>()));
  EXPECT_EQ(exported["svg_count"], exported["total_frames"]);
}

TEST_F(HttpFixture, ErrorsAndUnknowns) {
  auto res = client_->Post("/projects", "{not json", "application/json");
  EXPECT_EQ(res->status, 422);
  json bad = project_body();
  bad["tracking"]["video"]["fps"] = -1;
  bad["corpus"] = {{"schema_version", 9}};
  res = client_->Post("/projects", bad.dump(), "application/json");
  ASSERT_EQ(res->status, 422);
  const json body = json::parse(res->body);
  ASSERT_EQ(body["diagnostics"].size(), 2u);
  EXPECT_EQ(body["diagnostics"][0]["file"], "tracking");
  EXPECT_EQ(body["diagnostics"][1]["file"], "corpus");
  EXPECT_EQ(client_->Get("/projects/p999999")->status, 404);
  EXPECT_EQ(client_->Get("/projects/../etc")->status, 404);
  const std::string id = create();
  EXPECT_EQ(client_->Get("/projects/" + id + "/scripts/nope")->status, 404);
  EXPECT_EQ(client_->Get("/projects/" + id + "/attributes?subject=Umpire&frame=3")->status, 422);
  EXPECT_EQ(json::parse(client_->Get("/projects")->body)["projects"], json({id}));
}

TEST(Service, PersistsAcrossRestart) {
  const ServiceConfig cfg = config("persist");
  std::string id;
  json script;
  {
    Service s(cfg);
    id = s.create_project(project_body())["project_id"];
    s.add_selections(id, {{"subject", "Ball"}, {"frame", 70}, {"attributes", {"ball_trajectory"}}, {"order", "ZigZag"}});
    script = s.get_script(id, "main");
    EXPECT_EQ(script["order"], "ZigZag");
    EXPECT_EQ(script["zigzag"]["anchor"], 70);
  }
  Service again(cfg);
  EXPECT_EQ(again.get_script(id, "main"), script);
  EXPECT_EQ(again.project_ids(), std::vector<std::string>{id});
  EXPECT_EQ(again.create_project(project_body())["project_id"], "p000002");
}

TEST(Service, PutScriptAndPreviewMatchesBatch) {
  Service s(config("put"));
  const std::string id = s.create_project(project_body())["project_id"];
  const json doc = read_json(src("data/fixtures/scripts/zigzag.json"));
  s.put_script(id, "zz", doc);
  const Rally rally = fixtures::fixture_rally(RALLYVIZ_SOURCE_DIR);
  const auto script = script_from_json(doc);
  const auto schedule = compile_schedule(script, rally.dataset.video);
  const auto overlays = build_overlays(script, schedule, rally);
  for (int n : {0, 150, 170, schedule.total_frames() - 1}) {
    const Preview p = s.preview(id, "zz", n);
    EXPECT_EQ(p.svg, render_frame(overlays[static_cast<size_t>(n)])) << n;
    EXPECT_EQ(p.source_frame, schedule.frames[static_cast<size_t>(n)].source_frame);
  }
  json too_long = doc;
  too_long["clip"] = {0, 400};
  EXPECT_THROW(s.put_script(id, "zz", too_long), Error);
}

TEST(Service, HitFrameSelectionRecommendsPerAttribute) {
  Service s(config("hit"));
  const std::string id = s.create_project(project_body())["project_id"];
  const json added = s.add_selections(
      id, {{"subject", "Ball"},
           {"frame", 110},
           {"order", "Linear"},
           {"attributes", {"ball_rotation_speed", "potential_placements", "potential_routes"}}});
  std::vector<std::string> visuals;
  for (const auto& m : added["mappings"]) visuals.push_back(m["visual"]);
  EXPECT_EQ(visuals, (std::vector<std::string>{"Label", "HeatmapRegion", "Polyline"}));

  const json before = s.schedule(id, "main");
  const json mappings = s.get_script(id, "main")["mappings"];
  s.set_order(id, "main", {{"order", "FlashForward"}});
  EXPECT_NE(s.schedule(id, "main")["schedule_digest"], before["schedule_digest"]);
  EXPECT_EQ(s.get_script(id, "main")["mappings"], mappings);
}

TEST(Service, PurposeFilterRejectsHigherLevels) {
  Service s(config("purpose"));
  const std::string id = s.create_project(project_body())["project_id"];
  try {
    s.add_selections(id, {{"subject", "Player B"}, {"frame", 155}, {"purpose", "Entertainment"},
                          {"attributes", {"stroke_technique"}}});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::Conflict);
  }
}

TEST(Service, TimelineGlyphs) {
  Service s(config("timeline"));
  const std::string id = s.create_project(project_body())["project_id"];
  const json t = s.timeline(id);
  const Rally rally = fixtures::fixture_rally(RALLYVIZ_SOURCE_DIR);
  ASSERT_EQ(t["glyphs"].size(), rally.events.strokes.size() + rally.events.bounces.size() + rally.events.net_hits.size());
  // Strokes and bounces interleave over a clean rally.
  for (size_t i = 1; i < t["glyphs"].size(); ++i) {
    EXPECT_NE(t["glyphs"][i]["color_class"], t["glyphs"][i - 1]["color_class"]) << i;
    EXPECT_LE(t["glyphs"][i - 1]["key_frame"].get<int>(), t["glyphs"][i]["key_frame"].get<int>());
  }

  // Two detections high above the table: a defined track that never meets a player or bounces.
  json empty = project_body();
  auto& frames = empty["tracking"]["frames"];
  for (auto& f : frames) f["ball"] = nullptr;
  frames.front()["ball"] = {{"center", {100.0, 40.0}}, {"bbox", {92.0, 32.0, 16.0, 16.0}}};
  frames.back()["ball"] = {{"center", {1800.0, 40.0}}, {"bbox", {1792.0, 32.0, 16.0, 16.0}}};
  const std::string quiet = s.create_project(empty)["project_id"];
  EXPECT_TRUE(s.timeline(quiet)["glyphs"].empty());
}

TEST(Service, MalformedTrackingNamesTheProblem) {
  Service s(config("malformed"));
  json body = project_body();
  body["tracking"]["frames"].erase(body["tracking"]["frames"].begin() + 10);
  try {
    s.create_project(body);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::Validation);
    EXPECT_NE(std::string(e.what()).find("non-contiguous frame_index"), std::string::npos) << e.what();
  }
}

TEST(Service, ExportsRunConcurrentlyAndRejectGrouped) {
  Service s(config("export"));
  const std::string id = s.create_project(project_body())["project_id"];
  s.put_script(id, "flashforward", read_json(src("data/fixtures/scripts/flashforward.json")));
  s.put_script(id, "zigzag", read_json(src("data/fixtures/scripts/zigzag.json")));
  json a, b;
  std::thread t1([&] { a = s.export_script(id, "flashforward"); });
  std::thread t2([&] { b = s.export_script(id, "zigzag"); });
  t1.join();
  t2.join();
  EXPECT_NE(a["manifest"], b["manifest"]);
  EXPECT_EQ(read_file(a["manifest"]), read_file(src("tests/golden/flashforward/manifest.json")));
  EXPECT_EQ(read_file(b["manifest"]), read_file(src("tests/golden/zigzag/manifest.json")));

  s.set_order(id, "flashforward", {{"order", "Grouped"}});
  try {
    s.export_script(id, "flashforward");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(http_status(e), 422);
    EXPECT_NE(std::string(e.what()).find("unsupported order"), std::string::npos);
  }
}

TEST(Service, StatusMapping) {
  EXPECT_EQ(http_status(Error(ErrorCode::Validation, "")), 422);
  EXPECT_EQ(http_status(Error(ErrorCode::NotFound, "")), 404);
  EXPECT_EQ(http_status(Error(ErrorCode::Conflict, "")), 409);
  EXPECT_EQ(http_status(Error(ErrorCode::UnsupportedOrder, "")), 422);
  EXPECT_EQ(http_status(Error(ErrorCode::Io, "")), 500);
}

}  // namespace
}  // namespace rallyviz
