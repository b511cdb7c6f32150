#include <gtest/gtest.h>

#include <httplib.h>

#include <set>
#include <thread>

#include "rallyanchor/codec.hpp"
#include "rallyanchor/oracle.hpp"
#include "rallyanchor/pipeline.hpp"
#include "rallyanchor/server.hpp"

using namespace rallyanchor;

namespace {

class ApiTest : public ::testing::Test {
 protected:
  void SetUp() override {
    SynthConfig cfg;
    cfg.seed = 2;
    match_id_ = run_pipeline(store_, serialize_track_file(generate_match(cfg).tracks), PipelineConfig{});
    rally_id_ = store_.match(match_id_).snapshot()->rallies.front().rally_id;
  }

  Json call(const std::string& method, const std::string& path, const Json& body = nullptr,
            std::map<std::string, std::string> query = {}) {
    ApiRequest req{method, path, std::move(query), body.is_null() ? "" : body.dump()};
    const ApiResponse res = api_.handle(req);
    status_ = res.status;
    return Json::parse(res.body);
  }

  Store store_{Vocabulary::table_tennis()};
  Api api_{store_, PlaybackConfig{}};
  std::string match_id_;
  std::string rally_id_;
  int status_ = 0;
};

}  // namespace

TEST_F(ApiTest, ListsMatchesAndRallies) {
  Json j = call("GET", "/matches");
  EXPECT_EQ(status_, 200);
  ASSERT_EQ(j["matches"].size(), 1u);
  EXPECT_EQ(j["matches"][0]["match_id"], match_id_);

  j = call("GET", "/matches/" + match_id_);
  EXPECT_EQ(status_, 200);
  EXPECT_EQ(j["match"]["rally_count"], 11);

  j = call("GET", "/matches/" + match_id_ + "/rallies");
  EXPECT_EQ(status_, 200);
  ASSERT_EQ(j["rallies"].size(), 11u);
  EXPECT_EQ(j["rallies"][0]["rally_id"], rally_id_);
  EXPECT_GE(j["rallies"][0]["strokes"].get<int>(), 5);
}

TEST_F(ApiTest, CalibrateThenGetShowsCalibrated) {
  Json anchors = call("GET", "/rallies/" + rally_id_ + "/anchors");
  ASSERT_EQ(status_, 200);
  std::string hit;
  for (const auto& a : anchors["anchors"]) {
    if (a["event_type"] == "HIT") {
      hit = a["anchor_id"];
      break;
    }
  }
  ASSERT_FALSE(hit.empty());
  const Json done = call("POST", "/anchors/" + hit + "/calibrate", {{"delta", 1}});
  EXPECT_EQ(status_, 200);
  EXPECT_EQ(done["anchor"]["status"], "CALIBRATED");
  anchors = call("GET", "/rallies/" + rally_id_ + "/anchors");
  for (const auto& a : anchors["anchors"]) {
    if (a["anchor_id"] == hit) { EXPECT_EQ(a["status"], "CALIBRATED"); }
  }
  const Json hints = call("GET", "/rallies/" + rally_id_ + "/playback-hints");
  for (const auto& w : hints["windows"]) {
    for (const auto& id : w["anchor_ids"]) EXPECT_NE(id, hit);
  }
}

TEST_F(ApiTest, AddDeleteAnnotateQuery) {
  const auto rally = store_.match(match_id_).snapshot()->rallies.front();
  Json added = call("POST", "/rallies/" + rally_id_ + "/anchors",
                    {{"frame", rally.frame_start + 3}, {"type", "BOUNCE"}, {"x", 500}, {"y", 430}});
  EXPECT_EQ(status_, 201);
  const std::string id = added["anchor"]["anchor_id"];
  EXPECT_EQ(added["anchor"]["origin"], "USER_ADDED");

  call("DELETE", "/anchors/" + id);
  EXPECT_EQ(status_, 200);
  call("DELETE", "/anchors/" + id);
  EXPECT_EQ(status_, 409);
  Json all = call("GET", "/rallies/" + rally_id_ + "/anchors", nullptr, {{"include_deleted", "true"}});
  Json live = call("GET", "/rallies/" + rally_id_ + "/anchors");
  EXPECT_EQ(all["anchors"].size(), live["anchors"].size() + 1);

  Json note = call("PUT", "/annotations",
                   {{"event_id", rally_id_}, {"context_type", "rally_tactic"}, {"value", "serve_and_attack"}});
  EXPECT_EQ(status_, 200);
  EXPECT_EQ(note["annotation"]["author"], "anonymous");
  Json notes = call("GET", "/annotations", nullptr, {{"event_id", rally_id_}});
  ASSERT_EQ(notes["annotations"].size(), 1u);

  const Json rule = {{"context", Json::array({{{"context_type", "rally_tactic"}, {"value", "serve_and_attack"}}})}};
  const Json q = call("POST", "/matches/" + match_id_ + "/query", rule);
  EXPECT_EQ(status_, 200);
  ASSERT_EQ(q["rallies"].size(), 1u);
  EXPECT_EQ(q["rallies"][0]["rally_id"], rally_id_);

  const Json log = call("GET", "/matches/" + match_id_ + "/log");
  EXPECT_EQ(log["log"].size(), 3u);
}

TEST_F(ApiTest, ErrorStatuses) {
  Json j = call("GET", "/matches/nope");
  EXPECT_EQ(status_, 404);
  EXPECT_EQ(j["error"]["code"], "MatchNotFound");
  call("GET", "/rallies/nope/anchors");
  EXPECT_EQ(status_, 404);
  call("POST", "/anchors/nope/calibrate", {{"delta", 0}});
  EXPECT_EQ(status_, 404);
  j = call("POST", "/anchors/" + rally_id_ + "-h00/calibrate", {{"delta", -100000}});
  EXPECT_EQ(status_, 400);
  EXPECT_EQ(j["error"]["code"], "OutOfRallyBounds");
  j = call("PUT", "/annotations", {{"event_id", rally_id_}, {"context_type", "mood"}, {"value", "x"}});
  EXPECT_EQ(status_, 400);
  EXPECT_EQ(j["error"]["code"], "UnknownContextType");
  j = call("POST", "/matches/" + match_id_ + "/query", Json::object());
  EXPECT_EQ(status_, 400);
  EXPECT_EQ(j["error"]["code"], "EmptyRule");
  call("POST", "/anchors/" + rally_id_ + "-h00/calibrate", {{"nodelta", 1}});
  EXPECT_EQ(status_, 400);
  call("DELETE", "/matches");
  EXPECT_EQ(status_, 405);
  j = call("GET", "/nothing/here");
  EXPECT_EQ(status_, 404);
  EXPECT_EQ(j["error"]["code"], "NotFound");
  ApiRequest bad{"POST", "/anchors/x/calibrate", {}, "{not json"};
  EXPECT_EQ(api_.handle(bad).status, 400);
}

TEST_F(ApiTest, VocabularyRoute) {
  const Json j = call("GET", "/vocabulary");
  EXPECT_EQ(status_, 200);
  EXPECT_TRUE(j["vocabulary"].contains("rally_tactic"));
}

TEST(HttpService, ConcurrentCalibrationsGetDistinctSequences) {
  Store store(Vocabulary::table_tennis());
  SynthConfig cfg;
  cfg.seed = 6;
  const std::string id = run_pipeline(store, serialize_track_file(generate_match(cfg).tracks), PipelineConfig{});
  std::vector<std::string> anchors;
  for (const auto& [aid, a] : store.match(id).snapshot()->anchors) {
    if (a.event_type != EventType::kRally) anchors.push_back(aid);
  }
  anchors.resize(8);

  AppConfig config;
  config.service.port = 0;
  HttpService service(store, config);
  const int port = service.bind();
  std::thread server([&] { service.listen(); });

  std::vector<std::thread> clients;
  std::vector<int> statuses(anchors.size(), 0);
  for (std::size_t i = 0; i < anchors.size(); ++i) {
    clients.emplace_back([&, i] {
      httplib::Client c("127.0.0.1", port);
      auto res = c.Post("/anchors/" + anchors[i] + "/calibrate", R"({"delta":0})", "application/json");
      statuses[i] = res ? res->status : -1;
    });
  }
  for (auto& t : clients) t.join();

  httplib::Client c("127.0.0.1", port);
  auto res = c.Get("/matches/" + id + "/log");
  service.stop();
  server.join();
  ASSERT_TRUE(res);
  EXPECT_EQ(res->get_header_value("Access-Control-Allow-Origin"), "*");
  const Json log = Json::parse(res->body)["log"];

  for (int s : statuses) EXPECT_EQ(s, 200);
  ASSERT_EQ(log.size(), anchors.size());
  std::set<std::uint64_t> seqs;
  std::set<std::string> ids;
  for (const auto& r : log) {
    seqs.insert(r["seq"].get<std::uint64_t>());
    ids.insert(r["payload"]["anchor_id"].get<std::string>());
  }
  EXPECT_EQ(seqs.size(), anchors.size());
  EXPECT_EQ(*seqs.rbegin(), anchors.size());
  EXPECT_EQ(ids.size(), anchors.size());
  for (const auto& aid : anchors) EXPECT_EQ(store.match(id).snapshot()->anchors.at(aid).status, AnchorStatus::kCalibrated);
}
