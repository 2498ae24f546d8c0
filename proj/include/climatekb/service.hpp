#pragma once

#include <condition_variable>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <unordered_map>
#include <vector>

#include "climatekb/kbstore.hpp"
#include "climatekb/pipeline.hpp"
#include "climatekb/values.hpp"

namespace climatekb {

struct HttpRequest {
  std::string method;
  std::string path;
  std::map<std::string, std::string> query;
  std::map<std::string, std::string> headers;  // lowercase names
  std::string body;
};

struct HttpResponse {
  int status = 200;
  std::string content_type = "application/json; charset=utf-8";
  std::map<std::string, std::string> headers;
  std::string body;
};

struct ServiceConfig {
  PipelineConfig pipeline;
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string admin_token;  // empty disables /admin/rebuild
  std::string cors_origin = "*";
  // Relative rebuild paths resolve here; defaults to the data directory.
  std::filesystem::path input_dir;
  std::optional<std::filesystem::path> profile_log;  // write-ahead JSONL
};

// key=value file: the pipeline keys plus host, port, admin_token,
// cors_origin, input_dir, profile_log.
void apply_service_config_text(ServiceConfig& config, std::string_view contents,
                               const std::string& name);
// CLIMATEKB_PORT, CLIMATEKB_ADMIN_TOKEN and CLIMATEKB_CORS_ORIGIN override.
void apply_service_env(ServiceConfig& config);

struct ProfileRecord {
  std::string profile_id;  // 32 hex digits
  ValueProfile profile;
  std::string created_at;
};

std::string profile_record_to_json(const ProfileRecord& r);
ProfileRecord profile_record_from_json(std::string_view line);

// Append-only profile store. With a log file every record is written and
// flushed before it becomes visible; the log is replayed on open.
class ProfileStore {
 public:
  explicit ProfileStore(std::optional<std::filesystem::path> log = std::nullopt);

  void insert(ProfileRecord record);
  std::optional<ProfileRecord> find(const std::string& id) const;
  std::size_t size() const;

 private:
  mutable std::mutex mu_;
  std::unordered_map<std::string, ProfileRecord> records_;
  std::optional<std::filesystem::path> log_;
};

std::string random_profile_id();
std::string utc_now_iso();

struct PublishedSnapshot {
  KnowledgeBase kb;
  std::string snapshot_id;  // snapshot_hash(kb)
};

class Service {
 public:
  using Builder = std::function<KnowledgeBase(const RebuildInputs&)>;

  Service(ServiceConfig config, std::vector<QuestionnaireItem> questionnaire,
          KnowledgeBase initial);
  ~Service();

  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  HttpResponse handle(const HttpRequest& request);

  std::shared_ptr<const PublishedSnapshot> snapshot() const;
  void publish(KnowledgeBase kb);

  // Blocks until no rebuild is running; returns the last rebuild's error,
  // if it failed.
  std::optional<std::string> wait_for_rebuild();

  void set_id_generator(std::function<std::string()> gen) { next_id_ = std::move(gen); }
  void set_clock(std::function<std::string()> clock) { clock_ = std::move(clock); }
  void set_builder(Builder builder) { builder_ = std::move(builder); }

  const ProfileStore& profiles() const { return profiles_; }
  const ServiceConfig& config() const { return config_; }

 private:
  HttpResponse get_questionnaire() const;
  HttpResponse post_profiles(const HttpRequest& request);
  HttpResponse get_recommendations(const HttpRequest& request) const;
  HttpResponse get_entity(const std::string& id) const;
  HttpResponse post_rebuild(const HttpRequest& request);

  ServiceConfig config_;
  std::string questionnaire_body_;
  ProfileStore profiles_;

  mutable std::mutex snapshot_mu_;
  std::shared_ptr<const PublishedSnapshot> published_;

  std::mutex rebuild_mu_;
  std::condition_variable rebuild_cv_;
  bool rebuilding_ = false;
  std::optional<std::string> last_rebuild_error_;
  std::thread rebuild_thread_;

  std::function<std::string()> next_id_;
  std::function<std::string()> clock_;
  Builder builder_;
};

// Blocking HTTP front end over Service::handle. bind() with port 0 picks a
// free port and returns it.
class HttpServer {
 public:
  explicit HttpServer(Service& service);
  ~HttpServer();

  int bind(const std::string& host, int port);
  void listen();  // blocks until stop()
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace climatekb
