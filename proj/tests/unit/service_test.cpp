#include <gtest/gtest.h>

#include <json.hpp>

#include <atomic>
#include <future>
#include <thread>

#include "climatekb/service.hpp"
#include "climatekb/text.hpp"
#include "test_support.hpp"

using namespace climatekb;
using climatekb::testing::fixture;
using climatekb::testing::fixture_kb;
using climatekb::testing::TempDir;
using nlohmann::json;

namespace {

ServiceConfig test_config() {
  ServiceConfig c;
  c.pipeline = default_config();
  c.admin_token = "secret";
  c.input_dir = fixture("");
  return c;
}

std::unique_ptr<Service> make_service(ServiceConfig config = test_config()) {
  auto questionnaire = load_questionnaire(default_data_dir() / "questionnaire.jsonl");
  auto s = std::make_unique<Service>(std::move(config), std::move(questionnaire), fixture_kb());
  auto counter = std::make_shared<int>(0);
  s->set_id_generator([counter] {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%032x", ++*counter);
    return std::string(buf);
  });
  s->set_clock([] { return std::string("2024-01-01T00:00:00Z"); });
  return s;
}

HttpRequest get(std::string path, std::map<std::string, std::string> query = {}) {
  HttpRequest r;
  r.method = "GET";
  r.path = std::move(path);
  r.query = std::move(query);
  return r;
}

HttpRequest post(std::string path, std::string body, std::string token = "") {
  HttpRequest r;
  r.method = "POST";
  r.path = std::move(path);
  r.body = std::move(body);
  if (!token.empty()) r.headers["x-admin-token"] = token;
  return r;
}

std::string answers_body(const std::string& file) {
  return "{\"answers\":" + text::read_file(fixture(file)) + "}";
}

std::string create_profile(Service& s, const std::string& file = "answers_max.json") {
  auto r = s.handle(post("/profiles", answers_body(file)));
  EXPECT_EQ(r.status, 201) << r.body;
  return json::parse(r.body)["profile_id"];
}

}  // namespace

TEST(Service, Questionnaire) {
  auto s = make_service();
  auto r = s->handle(get("/questionnaire"));
  ASSERT_EQ(r.status, 200);
  auto j = json::parse(r.body);
  ASSERT_EQ(j.size(), 10u);
  EXPECT_EQ(j[0]["value"], "conformity");
  EXPECT_EQ(j[6]["value"], "hedonism");
  EXPECT_EQ(j[6]["scale"].front(), "strongly disagree");
  EXPECT_EQ(j[6]["scale"].back(), "strongly agree");
  EXPECT_EQ(r.headers.at("Access-Control-Allow-Origin"), "*");
}

TEST(Service, CreateProfile) {
  auto s = make_service();
  auto r = s->handle(post("/profiles", answers_body("answers_mixed.json")));
  ASSERT_EQ(r.status, 201);
  auto j = json::parse(r.body);
  EXPECT_EQ(j["profile_id"], "00000000000000000000000000000001");
  EXPECT_EQ(j["u"]["power"], 1.0);
  EXPECT_EQ(j["u"]["universalism"], 0.2);
  EXPECT_EQ(j["u"]["security"], 0.6);
  EXPECT_EQ(s->profiles().size(), 1u);
}

TEST(Service, ProfileValidation) {
  auto s = make_service();
  auto bad = json::parse(text::read_file(fixture("answers_max.json")));
  bad["power"] = 7;
  auto r = s->handle(post("/profiles", json{{"answers", bad}}.dump()));
  EXPECT_EQ(r.status, 400);
  EXPECT_EQ(json::parse(r.body)["fields"]["power"], "answer 7 for 'power' is outside 1..6");

  bad["power"] = "six";
  EXPECT_EQ(s->handle(post("/profiles", json{{"answers", bad}}.dump())).status, 400);

  auto partial = json::parse(text::read_file(fixture("answers_max.json")));
  partial.erase("tradition");
  r = s->handle(post("/profiles", json{{"answers", partial}}.dump()));
  EXPECT_EQ(r.status, 422);
  EXPECT_EQ(json::parse(r.body)["missing"], json::array({"tradition"}));

  EXPECT_EQ(s->handle(post("/profiles", "{")).status, 400);
  EXPECT_EQ(s->profiles().size(), 0u);
}

TEST(Service, Recommendations) {
  auto s = make_service();
  std::string pid = create_profile(*s);
  auto r = s->handle(get("/recommendations", {{"profile_id", pid}, {"limit", "3"}}));
  ASSERT_EQ(r.status, 200) << r.body;
  auto j = json::parse(r.body);
  EXPECT_EQ(j["snapshot_id"], s->snapshot()->snapshot_id);
  ASSERT_EQ(j["items"].size(), 3u);
  EXPECT_EQ(j["items"][0]["entity_id"], "e0013");
  EXPECT_EQ(j["items"][0]["relevance"], 2.0);
  EXPECT_EQ(j["items"][0]["rank"], 1);
  EXPECT_FALSE(j["items"][0]["evidence_snippet"].get<std::string>().empty());
}

TEST(Service, RecommendationErrors) {
  auto s = make_service();
  std::string pid = create_profile(*s);
  EXPECT_EQ(s->handle(get("/recommendations")).status, 400);
  EXPECT_EQ(s->handle(get("/recommendations", {{"profile_id", pid}, {"limit", "0"}})).status, 400);
  EXPECT_EQ(s->handle(get("/recommendations", {{"profile_id", pid}, {"limit", "-2"}})).status, 400);
  EXPECT_EQ(s->handle(get("/recommendations", {{"profile_id", pid}, {"limit", "x"}})).status, 400);
  EXPECT_EQ(s->handle(get("/recommendations", {{"profile_id", "ffff"}})).status, 404);
}

TEST(Service, EntityDetail) {
  auto s = make_service();
  auto r = s->handle(get("/entities/e0005"));
  ASSERT_EQ(r.status, 200);
  auto j = json::parse(r.body);
  const auto* e = s->snapshot()->kb.find_entity("e0005");
  EXPECT_EQ(j["label"], e->label);
  EXPECT_EQ(j["member_count"], e->member_count);
  EXPECT_EQ(j["outgoing"].size(), s->snapshot()->kb.outgoing("e0005").size());
  EXPECT_EQ(j["associations"]["security"], 1);
  EXPECT_EQ(s->handle(get("/entities/e9999")).status, 404);
}

TEST(Service, RoutingAndCors) {
  ServiceConfig c = test_config();
  c.cors_origin = "https://app.example";
  auto s = make_service(c);
  EXPECT_EQ(s->handle(get("/nope")).status, 404);
  EXPECT_EQ(s->handle(post("/questionnaire", "")).status, 405);
  HttpRequest options;
  options.method = "OPTIONS";
  options.path = "/profiles";
  auto r = s->handle(options);
  EXPECT_EQ(r.status, 204);
  EXPECT_EQ(r.headers.at("Access-Control-Allow-Origin"), "https://app.example");
  EXPECT_EQ(r.headers.at("Vary"), "Origin");
}

TEST(Service, RebuildAuth) {
  auto s = make_service();
  std::string body = R"({"corpus_path":"articles.jsonl"})";
  EXPECT_EQ(s->handle(post("/admin/rebuild", body)).status, 401);
  EXPECT_EQ(s->handle(post("/admin/rebuild", body, "wrong")).status, 401);
  EXPECT_EQ(s->handle(post("/admin/rebuild", R"({"corpus_path":"nope.jsonl"})", "secret")).status,
            400);
  EXPECT_EQ(s->handle(post("/admin/rebuild", "[]", "secret")).status, 400);

  ServiceConfig c = test_config();
  c.admin_token.clear();
  auto closed = make_service(c);
  EXPECT_EQ(closed->handle(post("/admin/rebuild", body, "")).status, 401);
}

TEST(Service, RebuildSameInputsKeepsSnapshotId) {
  auto s = make_service();
  std::string before = s->snapshot()->snapshot_id;
  auto r = s->handle(post("/admin/rebuild",
                          R"({"corpus_path":"articles.jsonl","synonyms_path":"synonyms.tsv",)"
                          R"("associations_path":"associations.tsv"})",
                          "secret"));
  ASSERT_EQ(r.status, 202) << r.body;
  EXPECT_EQ(s->wait_for_rebuild(), std::nullopt);
  EXPECT_EQ(s->snapshot()->snapshot_id, before);
}

TEST(Service, ConcurrentRebuildConflicts) {
  auto s = make_service();
  std::promise<void> release;
  auto gate = release.get_future().share();
  s->set_builder([gate](const RebuildInputs&) {
    gate.wait();
    return KnowledgeBase{};
  });
  std::string body = R"({"corpus_path":"articles.jsonl"})";
  EXPECT_EQ(s->handle(post("/admin/rebuild", body, "secret")).status, 202);
  EXPECT_EQ(s->handle(post("/admin/rebuild", body, "secret")).status, 409);
  release.set_value();
  EXPECT_EQ(s->wait_for_rebuild(), std::nullopt);
  EXPECT_TRUE(s->snapshot()->kb.entities().empty());
  EXPECT_EQ(s->handle(post("/admin/rebuild", body, "secret")).status, 202);
  s->wait_for_rebuild();
}

TEST(Service, FailedRebuildKeepsOldSnapshot) {
  auto s = make_service();
  std::string before = s->snapshot()->snapshot_id;
  s->set_builder([](const RebuildInputs&) -> KnowledgeBase { throw ValidationError("boom"); });
  EXPECT_EQ(s->handle(post("/admin/rebuild", R"({"corpus_path":"articles.jsonl"})", "secret")).status,
            202);
  EXPECT_EQ(s->wait_for_rebuild(), "boom");
  EXPECT_EQ(s->snapshot()->snapshot_id, before);
}

TEST(Service, ReadsSeeWholeSnapshots) {
  auto s = make_service();
  std::string pid = create_profile(*s);
  const std::string id_a = s->snapshot()->snapshot_id;
  KnowledgeBase empty;
  const std::string id_b = snapshot_hash(empty);
  const KnowledgeBase full = fixture_kb();
  std::atomic<bool> stop{false};
  std::thread writer([&] {
    for (int i = 0; i < 200; ++i) s->publish(i % 2 ? full : KnowledgeBase{});
    stop = true;
  });
  int reads = 0;
  while (!stop || reads < 50) {
    auto r = s->handle(get("/recommendations", {{"profile_id", pid}, {"limit", "100"}}));
    ASSERT_EQ(r.status, 200);
    auto j = json::parse(r.body);
    // item count must agree with the snapshot id in the same response
    if (j["snapshot_id"] == id_b) {
      ASSERT_TRUE(j["items"].empty());
    } else {
      ASSERT_EQ(j["snapshot_id"], id_a);
      ASSERT_EQ(j["items"].size(), 31u);
    }
    ++reads;
  }
  writer.join();
}

TEST(ProfileStore, LogSurvivesRestart) {
  TempDir dir;
  ServiceConfig c = test_config();
  c.profile_log = dir / "profiles.jsonl";
  std::string pid;
  {
    auto s = make_service(c);
    pid = create_profile(*s, "answers_universalism.json");
  }
  auto s = make_service(c);
  EXPECT_EQ(s->profiles().size(), 1u);
  auto r = s->handle(get("/recommendations", {{"profile_id", pid}, {"limit", "100"}}));
  ASSERT_EQ(r.status, 200);
  auto items = json::parse(r.body)["items"];
  EXPECT_EQ(items.back()["entity_id"], "e0013");
  EXPECT_EQ(items.back()["relevance"], -1.0);
}

TEST(ProfileStore, RecordJsonRoundTrip) {
  ProfileRecord rec;
  rec.profile_id = std::string(32, 'a');
  std::map<std::string, int> answers;
  for (auto v : kAllValues) answers[std::string(to_string(v))] = 3;
  rec.profile = profile_from_answers(answers);
  rec.created_at = "2024-01-01T00:00:00Z";
  auto back = profile_record_from_json(profile_record_to_json(rec));
  EXPECT_EQ(back.profile_id, rec.profile_id);
  EXPECT_EQ(back.profile, rec.profile);
  EXPECT_EQ(back.created_at, rec.created_at);
}

TEST(ServiceConfig, FileAndEnv) {
  ServiceConfig c = test_config();
  apply_service_config_text(c, "port = 9001\ncors_origin = https://x\nthreshold = 0.6\n", "t");
  EXPECT_EQ(c.port, 9001);
  EXPECT_EQ(c.cors_origin, "https://x");
  EXPECT_EQ(c.pipeline.detector.threshold, 0.6);
  ::setenv("CLIMATEKB_PORT", "9100", 1);
  apply_service_env(c);
  ::unsetenv("CLIMATEKB_PORT");
  EXPECT_EQ(c.port, 9100);
  EXPECT_THROW(apply_service_config_text(c, "port = abc\n", "t"), ValidationError);
}

TEST(ProfileIds, RandomIdsAreHex) {
  auto a = random_profile_id();
  EXPECT_EQ(a.size(), 32u);
  EXPECT_EQ(a.find_first_not_of("0123456789abcdef"), std::string::npos);
  EXPECT_NE(a, random_profile_id());
}
