// One PASS/FAIL line per acceptance criterion; exits 1 if any fails.
// `--record` rewrites the service recordings.
#include <httplib.h>
#include <json.hpp>

#include <charconv>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <map>
#include <queue>
#include <random>
#include <regex>
#include <set>
#include <thread>

#include "climatekb/recommend.hpp"
#include "climatekb/service.hpp"
#include "climatekb/text.hpp"
#include "climatekb/turtle.hpp"
#include "test_support.hpp"

using namespace climatekb;
using climatekb::testing::default_resources;
using climatekb::testing::fixture;
using nlohmann::json;
using nlohmann::ordered_json;

namespace {

// Tolerances and trial counts.
constexpr double kScoringBudgetMs = 1.0;
constexpr int kMetricTrials = 1000;
constexpr int kScoringTrials = 1000;
constexpr double kScoringTolerance = 1e-12;
constexpr int kRankTrials = 500;
constexpr int kTurtleTrials = 500;
constexpr std::size_t kTurtleMaxEntities = 20;
constexpr std::size_t kTurtleMaxEdges = 40;
constexpr double kChainBudgetSeconds = 10.0;
constexpr int kCanonTrials = 1000;

int failures = 0;

void report(const std::string& name, bool ok, const std::string& detail) {
  std::printf("%s %s: %s\n", ok ? "PASS" : "FAIL", name.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

std::string fmt(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

double elapsed_ms(std::chrono::steady_clock::time_point since) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - since)
      .count();
}

ValueProfile profile_file(const std::string& name) {
  auto j = json::parse(text::read_file(fixture(name)));
  std::map<std::string, int> answers;
  for (const auto& [k, v] : j.items()) answers[k] = v.get<int>();
  return profile_from_answers(answers);
}

// --- scoring exactness -----------------------------------------------------

void scoring_exactness(const KnowledgeBase& kb) {
  const CanonicalEntity* e = kb.find_by_key("decrease moose population");
  if (!e) {
    report("scoring-exactness", false, "fixture KB has no 'decrease moose population' entity");
    return;
  }
  AssociationScores expected;
  expected[PersonalValue::kPower] = 1;
  expected[PersonalValue::kStimulation] = 1;
  expected[PersonalValue::kHedonism] = 1;
  expected[PersonalValue::kUniversalism] = -1;
  bool assoc_ok = e->associations == expected;

  auto all_max = profile_file("answers_max.json");
  auto universalism = profile_file("answers_universalism.json");
  auto t0 = std::chrono::steady_clock::now();
  double s_max = score_entity(all_max, *e);
  double ms_max = elapsed_ms(t0);
  t0 = std::chrono::steady_clock::now();
  double s_univ = score_entity(universalism, *e);
  double ms_univ = elapsed_ms(t0);

  bool ok = assoc_ok && s_max == 2.0 && s_univ == -1.0 && ms_max < kScoringBudgetMs &&
            ms_univ < kScoringBudgetMs;
  report("scoring-exactness", ok,
         std::string(assoc_ok ? "" : "associations differ; ") + "all-max S=" + fmt(s_max) +
             " (" + fmt(ms_max) + " ms), universalism-only S=" + fmt(s_univ) + " (" +
             fmt(ms_univ) + " ms), want 2 and -1 exactly under " + fmt(kScoringBudgetMs) + " ms");
}

// --- metric oracle ---------------------------------------------------------

void metric_oracle() {
  std::mt19937_64 rng(1001);
  std::bernoulli_distribution coin(0.5);
  int mismatches = 0;
  for (int trial = 0; trial < kMetricTrials; ++trial) {
    std::size_t n = rng() % 60;
    std::vector<GoldLabel> gold;
    std::vector<Prediction> pred;
    for (std::size_t i = 0; i < n; ++i) {
      gold.push_back({"s" + std::to_string(i), coin(rng)});
      pred.push_back({"s" + std::to_string(i), coin(rng)});
    }
    for (std::size_t k = rng() % 4; k > 0; --k) pred.push_back({"extra" + std::to_string(k), coin(rng)});
    std::shuffle(pred.begin(), pred.end(), rng);

    std::map<std::string, bool> label;
    for (const auto& g : gold) label[g.sentence_text] = g.label;
    std::size_t c[2][2] = {{0, 0}, {0, 0}};  // [predicted][gold]
    for (const auto& p : pred) {
      auto it = label.find(p.sentence_text);
      if (it != label.end()) ++c[p.is_causal][it->second];
    }
    auto r = evaluate(pred, gold);
    if (r.true_positives != c[1][1] || r.false_positives != c[1][0] ||
        r.false_negatives != c[0][1] || r.true_negatives != c[0][0]) {
      ++mismatches;
    }
  }

  std::vector<GoldLabel> gold;
  std::vector<Prediction> pred;
  for (int i = 0; i < 32; ++i) {
    gold.push_back({"pos" + std::to_string(i), true});
    pred.push_back({"pos" + std::to_string(i), i < 9});
  }
  gold.push_back({"neg", false});
  pred.push_back({"neg", true});
  auto r = evaluate(pred, gold);
  bool ok = mismatches == 0 && r.precision == 0.9 && r.recall == 0.28125;
  report("metric-oracle", ok,
         std::to_string(mismatches) + "/" + std::to_string(kMetricTrials) +
             " confusion-matrix mismatches; 9-of-10/9-of-32 precision=" + fmt(r.precision) +
             " recall=" + fmt(r.recall));
}

// --- scoring oracle --------------------------------------------------------

void scoring_oracle() {
  std::mt19937_64 rng(1002);
  std::uniform_real_distribution<double> ud(0.0, 1.0);
  std::uniform_int_distribution<int> ad(-1, 1);
  std::uniform_int_distribution<int> likert(1, 6);
  double worst = 0.0;
  for (int trial = 0; trial < kScoringTrials; ++trial) {
    CanonicalEntity e;
    for (auto v : kAllValues) e.associations[v] = ad(rng);
    ValueArray<double> u;
    double got;
    if (trial % 2) {
      for (auto v : kAllValues) u[v] = ud(rng);
      got = score_entity(u, e);
    } else {
      std::map<PersonalValue, int> answers;
      for (auto v : kAllValues) answers[v] = likert(rng);
      auto p = profile_from_answers(answers);
      u = p.u;
      got = score_entity(p, e);
    }
    double acc = 0.0;
    for (std::size_t i = 0; i < kValueCount; ++i) {
      acc += u.raw()[i] * static_cast<double>(e.associations.raw()[i]);
    }
    worst = std::max(worst, std::abs(got - acc));
  }
  report("scoring-oracle", worst <= kScoringTolerance,
         "max |score - brute force| = " + fmt(worst) + " over " + std::to_string(kScoringTrials) +
             " pairs, tolerance " + fmt(kScoringTolerance));
}

// --- rank-order invariance -------------------------------------------------

std::vector<std::string> order(const std::vector<Recommendation>& feed) {
  std::vector<std::string> ids;
  for (const auto& r : feed) ids.push_back(r.entity_id);
  return ids;
}

void rank_invariance() {
  std::mt19937_64 rng(1003);
  std::uniform_real_distribution<double> ud(0.0, 1.0);
  std::uniform_real_distribution<double> cd(0.01, 100.0);
  std::uniform_int_distribution<int> likert(1, 6);
  std::uniform_int_distribution<int> num(1, 1000);
  RankOptions opt;
  opt.limit = 1000;
  int real_mismatch = 0;
  int likert_mismatch = 0;
  for (int trial = 0; trial < kRankTrials; ++trial) {
    auto kb = climatekb::testing::random_kb(rng, 20, 40);

    // continuous u, scaled in double precision
    ValueArray<double> u;
    ValueArray<double> cu;
    double c = cd(rng);
    for (auto v : kAllValues) {
      u[v] = ud(rng);
      cu[v] = c * u[v];
    }
    if (order(rank_entities(exact_weights(u), kb, opt)) !=
        order(rank_entities(exact_weights(cu), kb, opt))) {
      ++real_mismatch;
    }

    // questionnaire u, scaled by an exact rational
    std::map<PersonalValue, int> answers;
    for (auto v : kAllValues) answers[v] = likert(rng);
    WeightVector w = exact_weights(profile_from_answers(answers));
    Rational rc(num(rng), num(rng));
    WeightVector scaled;
    for (auto v : kAllValues) scaled[v] = w[v] * rc;
    if (order(rank_entities(w, kb, opt)) != order(rank_entities(scaled, kb, opt))) {
      ++likert_mismatch;
    }
  }
  report("rank-invariance", real_mismatch == 0 && likert_mismatch == 0,
         std::to_string(real_mismatch) + " continuous-u and " + std::to_string(likert_mismatch) +
             " questionnaire-u argsort changes over " + std::to_string(kRankTrials) +
             " random KBs");
}

// --- Turtle round trip -----------------------------------------------------

void turtle_round_trip(const KnowledgeBase& fixture_kb) {
  std::mt19937_64 rng(1004);
  int not_isomorphic = 0;
  int triple_mismatch = 0;
  int nondeterministic = 0;
  for (int trial = 0; trial < kTurtleTrials; ++trial) {
    auto kb = climatekb::testing::random_kb(rng, kTurtleMaxEntities, kTurtleMaxEdges);
    std::string first = export_turtle(kb);
    std::string second = export_turtle(kb);
    if (first != second) ++nondeterministic;
    auto triples = parse_turtle(first);
    std::sort(triples.begin(), triples.end());
    if (triples != climatekb::testing::expected_triples(kb)) ++triple_mismatch;
    try {
      if (!import_turtle(first).equivalent(kb)) ++not_isomorphic;
    } catch (const std::exception&) {
      ++not_isomorphic;
    }
  }
  bool fixture_ok = export_turtle(fixture_kb) == export_turtle(fixture_kb) &&
                    import_turtle(export_turtle(fixture_kb)).equivalent(fixture_kb);
  report("turtle-round-trip",
         not_isomorphic == 0 && triple_mismatch == 0 && nondeterministic == 0 && fixture_ok,
         std::to_string(not_isomorphic) + " non-isomorphic, " + std::to_string(triple_mismatch) +
             " triple-set mismatches, " + std::to_string(nondeterministic) +
             " byte differences over " + std::to_string(kTurtleTrials) + " KBs; fixture " +
             (fixture_ok ? "ok" : "failed"));
}

// --- pipeline determinism --------------------------------------------------

void pipeline_determinism() {
  ::setenv("SOURCE_DATE_EPOCH", "1700000000", 1);
  climatekb::testing::TempDir dir;
  auto t0 = std::chrono::steady_clock::now();
  int rc = climatekb::testing::run_cli_chain(dir.path());
  double seconds = elapsed_ms(t0) / 1000.0;
  ::unsetenv("SOURCE_DATE_EPOCH");
  bool same = false;
  if (rc == 0) {
    same = text::read_file(dir / "kb.ttl") == text::read_file(fixture("golden/kb.ttl"));
  }
  report("pipeline-determinism", rc == 0 && same && seconds < kChainBudgetSeconds,
         "CLI chain exit " + std::to_string(rc) + ", golden Turtle " +
             (same ? "byte-identical" : "differs") + ", " + fmt(seconds) + " s (budget " +
             fmt(kChainBudgetSeconds) + " s)");
}

// --- canonicalization ------------------------------------------------------

const std::vector<std::string> kCanonWords = {
    "Forest", "fires", "wildfire", "Wildfires", "floods", "flood", "the", "of", "heat", "waves",
    "sea-ice", "losses", "mice", "species", "crises", "glasses", "boxes", "fisheries", "é",
    "farmers'", "don't", "a", "ss", "gases", "—", "Storms", "rain"};

std::string random_phrase(std::mt19937_64& rng) {
  std::uniform_int_distribution<std::size_t> pick(0, kCanonWords.size() - 1);
  std::string s;
  for (std::size_t n = 1 + rng() % 4; n > 0; --n) s += kCanonWords[pick(rng)] + " ";
  return s;
}

std::vector<std::size_t> bfs_partition(const std::vector<std::string>& keys,
                                       const SynonymTable& syn) {
  std::map<std::string, std::set<std::string>> adj;
  for (const auto& k : keys) adj[k];
  for (const auto& [a, b] : syn.edges()) {
    adj[a.str()].insert(b.str());
    adj[b.str()].insert(a.str());
  }
  std::map<std::string, std::size_t> comp;
  std::size_t next = 0;
  for (const auto& [start, _] : adj) {
    if (!comp.emplace(start, next).second) continue;
    std::queue<std::string> q;
    q.push(start);
    while (!q.empty()) {
      auto k = q.front();
      q.pop();
      for (const auto& n : adj[k]) {
        if (comp.emplace(n, next).second) q.push(n);
      }
    }
    ++next;
  }
  std::vector<std::size_t> out;
  for (const auto& k : keys) out.push_back(comp[k]);
  return out;
}

bool same_partition(const std::vector<std::size_t>& a, const std::vector<std::size_t>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < a.size(); ++j) {
      if ((a[i] == a[j]) != (b[i] == b[j])) return false;
    }
  }
  return true;
}

void canonicalization() {
  const Normalizer& norm = default_resources().normalizer;
  std::mt19937_64 rng(1005);
  int not_idempotent = 0;
  int bad_partition = 0;
  int split_on_merge = 0;
  for (int trial = 0; trial < kCanonTrials; ++trial) {
    std::vector<Mention> mentions;
    for (std::size_t n = 1 + rng() % 12; n > 0; --n) {
      Mention m;
      m.base = random_phrase(rng);
      m.raw_text = m.base;
      if (rng() % 3 == 0) m.state = "rising";
      if (rng() % 4 == 0) m.unit = "levels";
      std::string once = norm.normalize(m).str();
      if (norm.normalize_text(once).str() != once) ++not_idempotent;
      mentions.push_back(std::move(m));
    }
    SynonymTable syn;
    for (std::size_t n = rng() % 4; n > 0; --n) {
      syn.add(norm.normalize_text(random_phrase(rng)), norm.normalize(mentions[rng() % mentions.size()]));
    }
    auto c = cluster(mentions, syn, norm);
    std::vector<std::string> keys;
    for (const auto& m : mentions) keys.push_back(norm.normalize(m).str());
    std::size_t total = 0;
    for (const auto& e : c.entities) total += e.member_count;
    if (total != mentions.size() || !same_partition(c.entity_of_mention, bfs_partition(keys, syn))) {
      ++bad_partition;
    }

    SynonymTable more = syn;
    more.add(norm.normalize(mentions[rng() % mentions.size()]),
             norm.normalize(mentions[rng() % mentions.size()]));
    auto merged = cluster(mentions, more, norm);
    for (std::size_t i = 0; i < mentions.size(); ++i) {
      for (std::size_t j = 0; j < mentions.size(); ++j) {
        if (c.entity_of_mention[i] == c.entity_of_mention[j] &&
            merged.entity_of_mention[i] != merged.entity_of_mention[j]) {
          ++split_on_merge;
        }
      }
    }
  }
  report("canonicalization",
         not_idempotent == 0 && bad_partition == 0 && split_on_merge == 0,
         std::to_string(not_idempotent) + " non-idempotent keys, " +
             std::to_string(bad_partition) + " partitions off the BFS oracle, " +
             std::to_string(split_on_merge) + " splits after adding a synonym, over " +
             std::to_string(kCanonTrials) + " mention sets");
}

// --- tuple extraction ------------------------------------------------------

std::string tuple_string(const Mention& m) {
  return "(" + m.state.value_or("∅") + ", " + m.base + ", " + m.unit.value_or("∅") + ")";
}

void tuple_extraction() {
  const auto& lex = default_resources().extraction;
  auto moose = parse_mention("decrease in population of moose available to hunt", Role::kEffect,
                             {}, lex)
                   .mention;
  auto ocean = parse_mention("warming ocean", Role::kCause, {}, lex).mention;
  bool ok = moose.state == "decrease" && moose.base == "moose" && moose.unit == "population" &&
            ocean.state == "warming" && ocean.base == "ocean" && !ocean.unit;
  report("tuple-extraction", ok, "moose phrase -> " + tuple_string(moose) +
                                     ", 'warming ocean' -> " + tuple_string(ocean));
}

// --- service replay --------------------------------------------------------

const std::regex kProfileId("^[0-9a-f]{32}$");
constexpr const char* kProfilePlaceholder = "{profile_id}";
constexpr const char* kAdminToken = "replay-token";

struct Step {
  std::string name;
  std::string method;
  std::string target;  // path and query
  std::string body;
  std::map<std::string, std::string> headers;
  bool await_rebuild = false;
};

std::vector<Step> scenario() {
  std::string max_answers = text::read_file(fixture("answers_max.json"));
  auto bad = json::parse(max_answers);
  bad["power"] = 7;
  auto partial = json::parse(max_answers);
  partial.erase("security");
  const std::map<std::string, std::string> admin{{"X-Admin-Token", kAdminToken}};
  const std::map<std::string, std::string> json_ct{{"Content-Type", "application/json"}};
  auto with = [](std::map<std::string, std::string> a, const std::map<std::string, std::string>& b) {
    a.insert(b.begin(), b.end());
    return a;
  };
  return {
      {"questionnaire", "GET", "/questionnaire", "", {}},
      {"profile-created", "POST", "/profiles", "{\"answers\":" + max_answers + "}", json_ct},
      {"profile-out-of-range", "POST", "/profiles", json{{"answers", bad}}.dump(), json_ct},
      {"profile-missing", "POST", "/profiles", json{{"answers", partial}}.dump(), json_ct},
      {"recommendations", "GET", "/recommendations?profile_id={profile_id}&limit=5", "", {}},
      {"recommendations-bad-limit", "GET", "/recommendations?profile_id={profile_id}&limit=0", "",
       {}},
      {"recommendations-unknown-profile", "GET",
       "/recommendations?profile_id=00000000000000000000000000000000", "", {}},
      {"entity", "GET", "/entities/e0013", "", {}},
      {"entity-unknown", "GET", "/entities/e9999", "", {}},
      {"rebuild-no-token", "POST", "/admin/rebuild", R"({"corpus_path":"articles.jsonl"})", json_ct},
      {"rebuild-bad-path", "POST", "/admin/rebuild", R"({"corpus_path":"missing.jsonl"})",
       with(json_ct, admin)},
      {"rebuild", "POST", "/admin/rebuild",
       R"({"corpus_path":"articles.jsonl","synonyms_path":"synonyms.tsv","associations_path":"associations.tsv"})",
       with(json_ct, admin), true},
      {"recommendations-after-rebuild", "GET",
       "/recommendations?profile_id={profile_id}&limit=5", "", {}},
      {"preflight", "OPTIONS", "/profiles", "", {{"Origin", "http://localhost"}}},
  };
}

std::string replace_all(std::string s, const std::string& from, const std::string& to) {
  if (from.empty()) return s;
  for (std::size_t pos = s.find(from); pos != std::string::npos; pos = s.find(from, pos + to.size())) {
    s.replace(pos, from.size(), to);
  }
  return s;
}

struct Observed {
  int status = 0;
  std::string content_type;
  std::string allow_origin;
  std::string body;
};

// Runs the scenario against a live server; profile ids are swapped for the
// placeholder after checking their shape.
std::vector<Observed> run_scenario(const std::vector<Step>& steps, std::string& error) {
  ServiceConfig config;
  config.pipeline = default_config();
  config.admin_token = kAdminToken;
  config.input_dir = fixture("");
  auto kb = import_turtle(text::read_file(fixture("golden/kb.ttl")));
  Service service(config, load_questionnaire(default_data_dir() / "questionnaire.jsonl"),
                  std::move(kb));
  HttpServer server(service);
  int port = server.bind("127.0.0.1", 0);
  std::thread listener([&] { server.listen(); });

  httplib::Client client("127.0.0.1", port);
  client.set_read_timeout(30, 0);
  std::vector<Observed> out;
  std::string profile_id;
  for (const auto& step : steps) {
    std::string target = replace_all(step.target, kProfilePlaceholder, profile_id);
    httplib::Headers headers(step.headers.begin(), step.headers.end());
    httplib::Result res{nullptr, httplib::Error::Unknown};
    if (step.method == "GET") {
      res = client.Get(target, headers);
    } else if (step.method == "POST") {
      res = client.Post(target, headers, step.body, "application/json");
    } else if (step.method == "OPTIONS") {
      res = client.Options(target, headers);
    }
    if (!res) {
      error = step.name + ": request failed (" + httplib::to_string(res.error()) + ")";
      break;
    }
    if (step.name == "profile-created" && res->status == 201) {
      auto j = json::parse(res->body, nullptr, false);
      if (j.is_object() && j.contains("profile_id") && j["profile_id"].is_string() &&
          std::regex_match(j["profile_id"].get<std::string>(), kProfileId)) {
        profile_id = j["profile_id"];
      } else {
        error = step.name + ": profile_id missing or not 32 hex digits";
        break;
      }
    }
    if (step.await_rebuild) {
      if (auto err = service.wait_for_rebuild()) {
        error = step.name + ": rebuild failed: " + *err;
        break;
      }
    }
    Observed o;
    o.status = res->status;
    o.content_type = res->get_header_value("Content-Type");
    o.allow_origin = res->get_header_value("Access-Control-Allow-Origin");
    o.body = replace_all(res->body, profile_id, kProfilePlaceholder);
    out.push_back(std::move(o));
  }
  server.stop();
  listener.join();
  return out;
}

std::filesystem::path recordings_path() { return fixture("replay/recordings.jsonl"); }

int record() {
  auto steps = scenario();
  std::string error;
  auto observed = run_scenario(steps, error);
  if (!error.empty()) {
    std::fprintf(stderr, "%s\n", error.c_str());
    return 1;
  }
  std::string out;
  for (std::size_t i = 0; i < steps.size(); ++i) {
    ordered_json j;
    j["name"] = steps[i].name;
    j["request"] = {{"method", steps[i].method},
                    {"target", steps[i].target},
                    {"headers", steps[i].headers},
                    {"body", steps[i].body},
                    {"await_rebuild", steps[i].await_rebuild}};
    j["response"] = {{"status", observed[i].status},
                     {"content_type", observed[i].content_type},
                     {"allow_origin", observed[i].allow_origin},
                     {"body", observed[i].body}};
    out += j.dump() + "\n";
  }
  text::write_file(recordings_path(), out);
  std::printf("wrote %zu recordings to %s\n", steps.size(), recordings_path().c_str());
  return 0;
}

void service_replay() {
  std::vector<Step> steps;
  std::vector<Observed> expected;
  std::set<std::string> endpoints;
  try {
    const std::string recordings = text::read_file(recordings_path());
    for (auto line : text::split(recordings, '\n')) {
      if (text::trim(line).empty()) continue;
      auto j = json::parse(line);
      Step s;
      s.name = j["name"];
      s.method = j["request"]["method"];
      s.target = j["request"]["target"];
      s.body = j["request"]["body"];
      s.headers = j["request"]["headers"].get<std::map<std::string, std::string>>();
      s.await_rebuild = j["request"]["await_rebuild"];
      steps.push_back(s);
      Observed o;
      o.status = j["response"]["status"];
      o.content_type = j["response"]["content_type"];
      o.allow_origin = j["response"]["allow_origin"];
      o.body = j["response"]["body"];
      expected.push_back(o);
      std::string path = s.target.substr(0, s.target.find('?'));
      if (path.rfind("/entities/", 0) == 0) path = "/entities/{id}";
      endpoints.insert(s.method + " " + path);
    }
  } catch (const std::exception& e) {
    report("service-replay", false, std::string("cannot read recordings: ") + e.what());
    return;
  }

  std::string error;
  auto observed = run_scenario(steps, error);
  std::vector<std::string> diffs;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    const auto& a = observed[i];
    const auto& b = expected[i];
    if (a.status != b.status || a.content_type != b.content_type ||
        a.allow_origin != b.allow_origin || a.body != b.body) {
      diffs.push_back(steps[i].name);
    }
  }
  const std::set<std::string> required = {"GET /questionnaire", "POST /profiles",
                                          "GET /recommendations", "GET /entities/{id}",
                                          "POST /admin/rebuild"};
  std::size_t covered = 0;
  for (const auto& r : required) covered += endpoints.count(r);
  bool ok = error.empty() && diffs.empty() && observed.size() == steps.size() &&
            covered == required.size() && !steps.empty();
  std::string detail = std::to_string(observed.size()) + "/" + std::to_string(steps.size()) +
                       " recorded exchanges replayed, " + std::to_string(covered) +
                       "/5 endpoints covered";
  if (!error.empty()) detail += "; " + error;
  if (!diffs.empty()) detail += "; differing: " + text::join(diffs, ", ");
  report("service-replay", ok, detail);
}

}  // namespace

int main(int argc, char** argv) {
  if (argc > 1 && std::string(argv[1]) == "--record") return record();

  KnowledgeBase kb = climatekb::testing::fixture_kb();
  scoring_exactness(kb);
  metric_oracle();
  scoring_oracle();
  rank_invariance();
  turtle_round_trip(kb);
  pipeline_determinism();
  canonicalization();
  tuple_extraction();
  service_replay();
  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
