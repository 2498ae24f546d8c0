#include "climatekb/service.hpp"

#include <json.hpp>

#include <fstream>
#include <limits>
#include <random>

#include "climatekb/recommend.hpp"
#include "climatekb/text.hpp"

namespace climatekb {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

std::string dump(const ordered_json& j) {
  return j.dump(-1, ' ', false, json::error_handler_t::replace);
}

HttpResponse json_response(int status, const ordered_json& body) {
  HttpResponse r;
  r.status = status;
  r.body = dump(body);
  return r;
}

HttpResponse error_response(int status, const std::string& message) {
  return json_response(status, ordered_json{{"error", message}});
}

ordered_json optional_string(const std::optional<std::string>& s) {
  return s ? ordered_json(*s) : ordered_json(nullptr);
}

}  // namespace

void apply_service_config_text(ServiceConfig& c, std::string_view contents,
                               const std::string& name) {
  std::string rest;
  std::size_t line_no = 0;
  for (std::string_view line : text::split(contents, '\n')) {
    ++line_no;
    std::string_view t = text::trim(line);
    auto eq = t.find('=');
    std::string key = eq == std::string_view::npos ? "" : std::string(text::trim(t.substr(0, eq)));
    std::string value =
        eq == std::string_view::npos ? "" : std::string(text::trim(t.substr(eq + 1)));
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') {
      value = value.substr(1, value.size() - 2);
    }
    bool handled = true;
    if (key == "host") c.host = value;
    else if (key == "port") {
      try {
        c.port = std::stoi(value);
      } catch (const std::exception&) {
        throw ValidationError(name + " line " + std::to_string(line_no) + ": bad port");
      }
    } else if (key == "admin_token") c.admin_token = value;
    else if (key == "cors_origin") c.cors_origin = value;
    else if (key == "input_dir") c.input_dir = value;
    else if (key == "profile_log") c.profile_log = std::filesystem::path(value);
    else handled = false;
    // blank line keeps the pipeline parser's line numbers aligned
    rest += handled ? "" : std::string(line);
    rest += '\n';
  }
  apply_config_text(c.pipeline, rest, name);
}

void apply_service_env(ServiceConfig& c) {
  if (const char* v = std::getenv("CLIMATEKB_PORT"); v && *v) c.port = std::atoi(v);
  if (const char* v = std::getenv("CLIMATEKB_ADMIN_TOKEN"); v && *v) c.admin_token = v;
  if (const char* v = std::getenv("CLIMATEKB_CORS_ORIGIN"); v && *v) c.cors_origin = v;
}

// --- profiles ----------------------------------------------------------------

std::string profile_record_to_json(const ProfileRecord& r) {
  ordered_json answers = ordered_json::object();
  for (PersonalValue v : kAllValues) answers[std::string(to_string(v))] = r.profile.raw[v];
  ordered_json j;
  j["profile_id"] = r.profile_id;
  j["created_at"] = r.created_at;
  j["answers"] = std::move(answers);
  return dump(j);
}

ProfileRecord profile_record_from_json(std::string_view line) {
  json j = json::parse(line);
  std::map<std::string, int> answers;
  for (const auto& [k, v] : j.at("answers").items()) answers[k] = v.get<int>();
  return ProfileRecord{j.at("profile_id").get<std::string>(), profile_from_answers(answers),
                       j.at("created_at").get<std::string>()};
}

ProfileStore::ProfileStore(std::optional<std::filesystem::path> log) : log_(std::move(log)) {
  if (!log_ || !std::filesystem::exists(*log_)) return;
  std::size_t line_no = 0;
  std::string contents = text::read_file(*log_);
  for (std::string_view line : text::split(contents, '\n')) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    try {
      ProfileRecord r = profile_record_from_json(line);
      records_.emplace(r.profile_id, std::move(r));
    } catch (const std::exception& e) {
      throw ValidationError(log_->string() + " line " + std::to_string(line_no) + ": " +
                            e.what());
    }
  }
}

void ProfileStore::insert(ProfileRecord record) {
  std::lock_guard lock(mu_);
  if (records_.count(record.profile_id)) {
    throw ValidationError("duplicate profile id " + record.profile_id);
  }
  if (log_) {
    std::ofstream out(*log_, std::ios::binary | std::ios::app);
    out << profile_record_to_json(record) << '\n';
    out.flush();
    if (!out) throw IoError("cannot append to " + log_->string());
  }
  records_.emplace(record.profile_id, std::move(record));
}

std::optional<ProfileRecord> ProfileStore::find(const std::string& id) const {
  std::lock_guard lock(mu_);
  auto it = records_.find(id);
  if (it == records_.end()) return std::nullopt;
  return it->second;
}

std::size_t ProfileStore::size() const {
  std::lock_guard lock(mu_);
  return records_.size();
}

std::string random_profile_id() {
  static std::mutex mu;
  static std::random_device rd;
  std::lock_guard lock(mu);
  std::string out;
  static constexpr char kHex[] = "0123456789abcdef";
  for (int i = 0; i < 4; ++i) {
    std::uint32_t w = rd();
    for (int s = 28; s >= 0; s -= 4) out.push_back(kHex[(w >> s) & 0xF]);
  }
  return out;
}

std::string utc_now_iso() {
  std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// --- service -------------------------------------------------------------------

Service::Service(ServiceConfig config, std::vector<QuestionnaireItem> questionnaire,
                 KnowledgeBase initial)
    : config_(std::move(config)),
      profiles_(config_.profile_log),
      next_id_(random_profile_id),
      clock_(utc_now_iso) {
  if (config_.input_dir.empty()) config_.input_dir = config_.pipeline.data_dir;
  builder_ = [this](const RebuildInputs& in) { return build_from_articles(in, config_.pipeline); };

  ordered_json scale = ordered_json::array();
  for (auto label : kLikertLabels) scale.push_back(std::string(label));
  ordered_json items = ordered_json::array();
  for (const auto& item : questionnaire) {
    ordered_json j;
    j["id"] = item.id;
    j["value"] = std::string(to_string(item.value));
    j["statement"] = item.statement;
    j["scale"] = scale;
    items.push_back(std::move(j));
  }
  questionnaire_body_ = dump(items);
  publish(std::move(initial));
}

Service::~Service() {
  std::thread t;
  {
    std::lock_guard lock(rebuild_mu_);
    t = std::move(rebuild_thread_);
  }
  if (t.joinable()) t.join();
}

std::shared_ptr<const PublishedSnapshot> Service::snapshot() const {
  std::lock_guard lock(snapshot_mu_);
  return published_;
}

void Service::publish(KnowledgeBase kb) {
  auto next = std::make_shared<PublishedSnapshot>();
  next->snapshot_id = snapshot_hash(kb);
  next->kb = std::move(kb);
  std::lock_guard lock(snapshot_mu_);
  published_ = std::move(next);
}

std::optional<std::string> Service::wait_for_rebuild() {
  std::unique_lock lock(rebuild_mu_);
  rebuild_cv_.wait(lock, [&] { return !rebuilding_; });
  return last_rebuild_error_;
}

HttpResponse Service::handle(const HttpRequest& req) {
  HttpResponse resp;
  std::string path = req.path;
  if (path.size() > 1 && path.back() == '/') path.pop_back();

  auto route = [&](const char* method, auto&& fn) {
    if (req.method == method) return fn();
    HttpResponse r = error_response(405, "method not allowed");
    r.headers["Allow"] = std::string(method) + ", OPTIONS";
    return r;
  };

  try {
    if (req.method == "OPTIONS") {
      resp.status = 204;
      resp.content_type.clear();
      resp.headers["Access-Control-Allow-Methods"] = "GET, POST, OPTIONS";
      resp.headers["Access-Control-Allow-Headers"] = "Content-Type, X-Admin-Token";
    } else if (path == "/questionnaire") {
      resp = route("GET", [&] { return get_questionnaire(); });
    } else if (path == "/profiles") {
      resp = route("POST", [&] { return post_profiles(req); });
    } else if (path == "/recommendations") {
      resp = route("GET", [&] { return get_recommendations(req); });
    } else if (path.rfind("/entities/", 0) == 0 && path.size() > 10 &&
               path.find('/', 10) == std::string::npos) {
      resp = route("GET", [&] { return get_entity(path.substr(10)); });
    } else if (path == "/admin/rebuild") {
      resp = route("POST", [&] { return post_rebuild(req); });
    } else {
      resp = error_response(404, "no such endpoint");
    }
  } catch (const std::exception& e) {
    resp = error_response(500, e.what());
  }
  resp.headers["Access-Control-Allow-Origin"] = config_.cors_origin;
  if (config_.cors_origin != "*") resp.headers["Vary"] = "Origin";
  return resp;
}

HttpResponse Service::get_questionnaire() const {
  HttpResponse r;
  r.body = questionnaire_body_;
  return r;
}

HttpResponse Service::post_profiles(const HttpRequest& req) {
  json body = json::parse(req.body, nullptr, false);
  if (body.is_discarded() || !body.is_object() || !body.contains("answers") ||
      !body["answers"].is_object()) {
    return json_response(400, ordered_json{{"error", "body must be {\"answers\": {...}}"},
                                           {"fields", ordered_json::object()}});
  }
  std::map<std::string, int> answers;
  std::map<std::string, std::string> invalid;
  for (const auto& [name, v] : body["answers"].items()) {
    if (!v.is_number_integer()) {
      invalid[name] = "answer must be an integer from 1 to 6";
      continue;
    }
    long long a = v.get<long long>();
    if (v.is_number_unsigned() && a < 0) a = std::numeric_limits<long long>::max();
    if (a < std::numeric_limits<int>::min() || a > std::numeric_limits<int>::max()) {
      invalid[name] = "answer " + v.dump() + " for '" + name + "' is outside 1..6";
      continue;
    }
    answers[name] = static_cast<int>(a);
  }
  AnswerCheck check = check_answers(answers);
  for (auto& [k, msg] : check.invalid) invalid.emplace(k, msg);
  if (!invalid.empty()) {
    ordered_json fields = ordered_json::object();
    for (const auto& [k, msg] : invalid) fields[k] = msg;
    return json_response(400, ordered_json{{"error", "invalid answers"}, {"fields", fields}});
  }
  if (!check.missing.empty()) {
    ordered_json missing = ordered_json::array();
    for (PersonalValue v : check.missing) missing.push_back(std::string(to_string(v)));
    return json_response(422, ordered_json{{"error", "missing answers"}, {"missing", missing}});
  }

  ProfileRecord record{next_id_(), profile_from_answers(answers), clock_()};
  profiles_.insert(record);

  ordered_json u = ordered_json::object();
  for (PersonalValue v : kAllValues) u[std::string(to_string(v))] = record.profile.u[v];
  return json_response(201, ordered_json{{"profile_id", record.profile_id}, {"u", u}});
}

HttpResponse Service::get_recommendations(const HttpRequest& req) const {
  auto pid = req.query.find("profile_id");
  if (pid == req.query.end() || pid->second.empty()) {
    return error_response(400, "profile_id is required");
  }
  RankOptions options = config_.pipeline.rank;
  if (auto lim = req.query.find("limit"); lim != req.query.end()) {
    const std::string& s = lim->second;
    bool digits = !s.empty() && s.size() <= 9 &&
                  std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
    if (!digits || std::stoul(s) == 0) {
      return error_response(400, "limit must be an integer >= 1");
    }
    options.limit = std::stoul(s);
  }
  auto record = profiles_.find(pid->second);
  if (!record) return error_response(404, "unknown profile_id");

  auto snap = snapshot();
  ordered_json items = ordered_json::array();
  for (const auto& rec : rank_entities(record->profile, snap->kb, options)) {
    ordered_json j;
    j["entity_id"] = rec.entity_id;
    j["label"] = rec.label;
    j["relevance"] = rec.relevance;
    j["rank"] = rec.rank;
    j["evidence_snippet"] = rec.evidence_snippet;
    items.push_back(std::move(j));
  }
  return json_response(200, ordered_json{{"profile_id", record->profile_id},
                                         {"snapshot_id", snap->snapshot_id},
                                         {"items", items}});
}

HttpResponse Service::get_entity(const std::string& id) const {
  auto snap = snapshot();
  const KnowledgeBase& kb = snap->kb;
  const CanonicalEntity* e = kb.find_entity(id);
  if (!e) return error_response(404, "unknown entity " + id);

  auto edges = [&](const std::vector<const CausalEdge*>& list) {
    ordered_json out = ordered_json::array();
    for (const CausalEdge* edge : list) {
      ordered_json evidence = ordered_json::array();
      for (const auto& ev : edge->evidence) {
        evidence.push_back(ordered_json{{"article_id", ev.article_id},
                                        {"sentence_index", ev.sentence_index},
                                        {"text", ev.text}});
      }
      ordered_json j;
      j["cause_id"] = edge->cause_id;
      j["cause_label"] = kb.find_entity(edge->cause_id)->label;
      j["effect_id"] = edge->effect_id;
      j["effect_label"] = kb.find_entity(edge->effect_id)->label;
      j["count"] = edge->count();
      j["evidence"] = std::move(evidence);
      out.push_back(std::move(j));
    }
    return out;
  };

  ordered_json assoc = ordered_json::object();
  for (PersonalValue v : kAllValues) assoc[std::string(to_string(v))] = e->associations[v];
  ordered_json j;
  j["snapshot_id"] = snap->snapshot_id;
  j["id"] = e->id;
  j["label"] = e->label;
  j["key"] = e->key.str();
  j["state"] = optional_string(e->state);
  j["base"] = e->base;
  j["unit"] = optional_string(e->unit);
  j["member_count"] = e->member_count;
  j["curated"] = e->curated;
  j["associations"] = std::move(assoc);
  j["outgoing"] = edges(kb.outgoing(id));
  j["incoming"] = edges(kb.incoming(id));
  return json_response(200, j);
}

HttpResponse Service::post_rebuild(const HttpRequest& req) {
  auto token = req.headers.find("x-admin-token");
  if (config_.admin_token.empty() || token == req.headers.end() ||
      token->second != config_.admin_token) {
    return error_response(401, "admin token required");
  }
  json body = json::parse(req.body, nullptr, false);
  if (body.is_discarded() || !body.is_object()) {
    return error_response(400, "body must be a JSON object");
  }

  RebuildInputs inputs;
  auto path_field = [&](const char* field, bool required) -> std::optional<std::string> {
    if (!body.contains(field) || body[field].is_null()) {
      if (required) return std::string(field) + " is required";
      return std::nullopt;
    }
    if (!body[field].is_string()) return std::string(field) + " must be a string";
    std::filesystem::path p = body[field].get<std::string>();
    if (p.is_relative()) p = config_.input_dir / p;
    std::error_code ec;
    if (!std::filesystem::is_regular_file(p, ec)) {
      return std::string(field) + ": no such file " + body[field].get<std::string>();
    }
    if (std::string_view(field) == "corpus_path") inputs.corpus_path = p;
    else if (std::string_view(field) == "synonyms_path") inputs.synonyms_path = p;
    else inputs.associations_path = p;
    return std::nullopt;
  };
  for (auto [field, required] : {std::pair{"corpus_path", true}, std::pair{"synonyms_path", false},
                                 std::pair{"associations_path", false}}) {
    if (auto err = path_field(field, required)) return error_response(400, *err);
  }

  std::lock_guard lock(rebuild_mu_);
  if (rebuilding_) return error_response(409, "a rebuild is already running");
  if (rebuild_thread_.joinable()) rebuild_thread_.join();
  rebuilding_ = true;
  last_rebuild_error_.reset();
  rebuild_thread_ = std::thread([this, inputs] {
    std::optional<std::string> error;
    try {
      publish(builder_(inputs));
    } catch (const std::exception& e) {
      error = e.what();
    }
    {
      std::lock_guard done(rebuild_mu_);
      rebuilding_ = false;
      last_rebuild_error_ = std::move(error);
    }
    rebuild_cv_.notify_all();
  });
  return json_response(202, ordered_json{{"status", "accepted"}});
}

}  // namespace climatekb
