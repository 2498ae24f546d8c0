// climatekb: pipeline stages, KB utilities and the HTTP service.

#include <CLI11.hpp>
#include <json.hpp>

#include <charconv>
#include <csignal>
#include <cstdio>
#include <iostream>
#include <optional>

#include "climatekb/causality.hpp"
#include "climatekb/corpus.hpp"
#include "climatekb/kbstore.hpp"
#include "climatekb/pipeline.hpp"
#include "climatekb/recommend.hpp"
#include "climatekb/service.hpp"
#include "climatekb/text.hpp"
#include "climatekb/turtle.hpp"

namespace ck = climatekb;
namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitIo = 2;
constexpr int kExitUsage = 64;

std::string shortest(double d) {
  char buf[64];
  auto r = std::to_chars(buf, buf + sizeof buf, d);
  return std::string(buf, r.ptr);
}

void emit(const std::optional<std::string>& out, const std::string& contents) {
  if (out) {
    ck::text::write_file(*out, contents);
  } else {
    std::cout << contents;
  }
}

ck::ValueProfile read_answers_file(const fs::path& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(ck::text::read_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw ck::ValidationError(path.string() + ": " + e.what());
  }
  if (j.is_object() && j.contains("answers")) j = j["answers"];
  if (!j.is_object()) throw ck::ValidationError(path.string() + ": expected a JSON object");
  std::map<std::string, int> answers;
  for (const auto& [k, v] : j.items()) {
    if (!v.is_number_integer()) {
      throw ck::InvalidAnswerError(k, "answer for '" + k + "' must be an integer");
    }
    answers[k] = v.get<int>();
  }
  return ck::profile_from_answers(answers);
}

ck::HttpServer* g_server = nullptr;

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Build, export and serve the climate cause-effect knowledge base."};
  app.require_subcommand(1);

  std::optional<std::string> config_path;
  std::optional<std::string> data_dir;
  app.add_option("--config", config_path, "key=value file with thresholds, paths and flags")
      ->check(CLI::ExistingFile);
  app.add_option("--data-dir", data_dir, "directory holding the lexicon files");

  // ingest
  auto* ingest_cmd = app.add_subcommand("ingest", "ingest article JSONL into a corpus snapshot");
  std::string ingest_in, ingest_out;
  ingest_cmd->add_option("input", ingest_in, "article JSONL file")->required();
  ingest_cmd->add_option("-o,--out", ingest_out, "snapshot directory")->required();

  // detect
  auto* detect_cmd = app.add_subcommand("detect", "score every sentence for causality");
  std::string detect_corpus;
  std::optional<std::string> detect_out, detect_scores;
  detect_cmd->add_option("corpus", detect_corpus, "corpus snapshot directory")->required();
  detect_cmd->add_option("-o,--out", detect_out, "candidates JSONL (default stdout)");
  detect_cmd->add_option("--scores", detect_scores,
                         "JSONL {text, score} from an external classifier");

  // extract
  auto* extract_cmd = app.add_subcommand("extract", "parse cause/effect mentions");
  std::string extract_in;
  std::optional<std::string> extract_out, extract_failures;
  extract_cmd->add_option("candidates", extract_in, "candidates JSONL")->required();
  extract_cmd->add_option("-o,--out", extract_out, "mentions JSONL (default stdout)");
  extract_cmd->add_option("--failures", extract_failures, "write extraction failures here");

  // build-kb
  auto* build_cmd = app.add_subcommand("build-kb", "cluster mentions and build the KB snapshot");
  std::string build_in;
  std::optional<std::string> build_out, build_synonyms, build_corpus;
  bool build_flagged = false;
  build_cmd->add_option("mentions", build_in, "mentions JSONL")->required();
  build_cmd->add_option("-o,--out", build_out, "KB snapshot JSONL (default stdout)");
  build_cmd->add_option("--synonyms", build_synonyms, "synonym pairs TSV");
  build_cmd->add_option("--corpus", build_corpus, "corpus snapshot directory, for the corpus hash");
  build_cmd->add_flag("--include-flagged", build_flagged,
                      "keep mentions flagged as anaphora or implicit entities");

  // load-associations
  auto* assoc_cmd = app.add_subcommand("load-associations", "apply expert value associations");
  std::string assoc_kb, assoc_file;
  std::optional<std::string> assoc_out;
  assoc_cmd->add_option("kb", assoc_kb, "KB snapshot JSONL")->required();
  assoc_cmd->add_option("associations", assoc_file, "TSV of key, value, score")->required();
  assoc_cmd->add_option("-o,--out", assoc_out, "updated snapshot (default stdout)");

  // export
  auto* export_cmd = app.add_subcommand("export", "write the KB as Turtle or snapshot JSONL");
  std::string export_kb, export_format = "ttl";
  std::optional<std::string> export_out;
  export_cmd->add_option("kb", export_kb, "KB snapshot JSONL")->required();
  export_cmd->add_option("--format", export_format, "ttl or jsonl")
      ->check(CLI::IsMember({"ttl", "jsonl"}));
  export_cmd->add_option("-o,--out", export_out, "output file (default stdout)");

  // import
  auto* import_cmd = app.add_subcommand("import", "read a Turtle export back into a snapshot");
  std::string import_in;
  std::optional<std::string> import_out;
  import_cmd->add_option("turtle", import_in, "Turtle file")->required();
  import_cmd->add_option("-o,--out", import_out, "KB snapshot JSONL (default stdout)");

  // eval
  auto* eval_cmd = app.add_subcommand("eval", "precision/recall of predictions against gold");
  std::string eval_gold, eval_pred;
  eval_cmd->add_option("--gold", eval_gold, "JSONL {text, label}")->required();
  eval_cmd->add_option("--pred", eval_pred, "JSONL {text, is_causal}")->required();

  // score
  auto* score_cmd = app.add_subcommand("score", "rank KB entities for a questionnaire answer set");
  std::string score_kb, score_answers;
  std::optional<std::size_t> score_limit;
  bool score_exclude = false;
  score_cmd->add_option("kb", score_kb, "KB snapshot JSONL")->required();
  score_cmd->add_option("--answers-file", score_answers, "JSON {value: 1..6}")->required();
  score_cmd->add_option("--limit", score_limit, "feed length")->check(CLI::PositiveNumber);
  score_cmd->add_flag("--exclude-uncurated", score_exclude, "drop entities without associations");

  // serve
  auto* serve_cmd = app.add_subcommand("serve", "serve the questionnaire and feeds over HTTP");
  std::string serve_kb;
  std::optional<std::string> serve_host, serve_token, serve_cors, serve_profiles, serve_inputs;
  std::optional<int> serve_port;
  serve_cmd->add_option("kb", serve_kb, "KB snapshot JSONL")->required();
  serve_cmd->add_option("--host", serve_host, "listen address");
  serve_cmd->add_option("--port", serve_port, "listen port");
  serve_cmd->add_option("--admin-token", serve_token, "token for POST /admin/rebuild");
  serve_cmd->add_option("--cors-origin", serve_cors, "Access-Control-Allow-Origin value");
  serve_cmd->add_option("--profile-log", serve_profiles, "persist profiles to this JSONL file");
  serve_cmd->add_option("--input-dir", serve_inputs, "base directory for relative rebuild paths");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  }

  try {
    ck::ServiceConfig service_config;
    service_config.pipeline = ck::default_config();
    if (data_dir) service_config.pipeline.data_dir = *data_dir;
    if (config_path) {
      ck::apply_service_config_text(service_config, ck::text::read_file(*config_path),
                                    *config_path);
      if (data_dir) service_config.pipeline.data_dir = *data_dir;
    }
    ck::PipelineConfig& config = service_config.pipeline;

    if (*ingest_cmd) {
      ck::IngestResult result = ck::ingest(ingest_in, config.ingest);
      auto resources = ck::AbbreviationList::load(config.resolve(config.abbreviations,
                                                                 "abbreviations.txt"));
      std::size_t articles = result.articles.size();
      ck::CorpusSnapshot snapshot = ck::make_snapshot(std::move(result.articles), resources);
      ck::write_snapshot(snapshot, ingest_out);
      for (const auto& s : result.skipped) {
        std::cerr << "skipped line " << s.line << " (" << s.id << "): " << s.reason << "\n";
      }
      std::cerr << articles << " articles, " << snapshot.sentences.size() << " sentences, "
                << result.skipped.size() << " skipped\n";
    } else if (*detect_cmd) {
      ck::CorpusSnapshot snapshot = ck::read_snapshot(detect_corpus);
      auto cues = ck::CueLexicon::load(config.resolve(config.cue_lexicon, "cue_lexicon.tsv"));
      std::unique_ptr<ck::Detector> detector;
      if (detect_scores) {
        detector = std::make_unique<ck::ExternalScoreDetector>(
            ck::load_external_scores(*detect_scores), cues, config.detector);
      } else {
        detector = std::make_unique<ck::CueLexiconDetector>(cues, config.detector);
      }
      auto candidates = ck::detect_all(snapshot, *detector);
      std::size_t causal = std::count_if(candidates.begin(), candidates.end(),
                                         [](const auto& c) { return c.is_causal; });
      emit(detect_out, ck::candidates_to_jsonl(candidates));
      std::cerr << causal << " of " << candidates.size() << " sentences causal\n";
    } else if (*extract_cmd) {
      auto candidates = ck::candidates_from_jsonl(ck::text::read_file(extract_in));
      ck::Resources res = ck::Resources::load(config);
      ck::ExtractionRun run = ck::extract_all(candidates, res.extraction);
      emit(extract_out, ck::mentions_to_jsonl(run.mentions));
      if (extract_failures) {
        ck::text::write_file(*extract_failures, ck::failures_to_jsonl(run.failures));
      }
      std::cerr << run.mentions.size() / 2 << " mention pairs, " << run.failures.size()
                << " failures\n";
    } else if (*build_cmd) {
      auto mentions = ck::mentions_from_jsonl(ck::text::read_file(build_in));
      ck::Resources res = ck::Resources::load(config);
      ck::SynonymTable synonyms;
      if (build_synonyms) synonyms = ck::SynonymTable::load(*build_synonyms, res.normalizer);
      ck::BuildMetadata meta;
      if (build_corpus) {
        meta.corpus_hash =
            ck::text::sha256_hex(ck::text::read_file(fs::path(*build_corpus) / ck::kCorpusFile));
      }
      meta.lexicon_versions = res.versions();
      meta.lexicon_versions["synonyms"] = synonyms.version();
      meta.build_timestamp = ck::build_timestamp();
      ck::BuildReport report;
      ck::KnowledgeBase kb =
          ck::build_kb(mentions, synonyms, res.normalizer,
                       ck::BuildOptions{build_flagged || config.include_flagged},
                       std::move(meta), &report);
      emit(build_out, ck::write_snapshot_jsonl(kb));
      std::cerr << kb.entities().size() << " entities, " << kb.edges().size() << " edges ("
                << report.flagged_pairs_skipped << " flagged pairs, "
                << report.self_loops_skipped << " self-loops skipped)\n";
    } else if (*assoc_cmd) {
      ck::KnowledgeBase kb = ck::load_snapshot(assoc_kb);
      ck::KnowledgeBase updated = ck::load_associations(kb, assoc_file);
      emit(assoc_out, ck::write_snapshot_jsonl(updated));
    } else if (*export_cmd) {
      ck::KnowledgeBase kb = ck::load_snapshot(export_kb);
      emit(export_out,
           export_format == "ttl" ? ck::export_turtle(kb) : ck::write_snapshot_jsonl(kb));
    } else if (*import_cmd) {
      ck::KnowledgeBase kb = ck::import_turtle(ck::text::read_file(import_in));
      emit(import_out, ck::write_snapshot_jsonl(kb));
    } else if (*eval_cmd) {
      auto gold = ck::load_gold_labels(eval_gold);
      auto pred = ck::load_predictions(eval_pred);
      ck::EvalReport r = ck::evaluate(pred, gold);
      auto metric = [](double v, bool defined) { return defined ? shortest(v) : "undefined"; };
      std::cout << "true_positives\t" << r.true_positives << "\n"
                << "false_positives\t" << r.false_positives << "\n"
                << "false_negatives\t" << r.false_negatives << "\n"
                << "true_negatives\t" << r.true_negatives << "\n"
                << "precision\t" << metric(r.precision, r.precision_defined) << "\n"
                << "recall\t" << metric(r.recall, r.recall_defined) << "\n"
                << "f1\t" << metric(r.f1, r.f1_defined) << "\n";
    } else if (*score_cmd) {
      ck::KnowledgeBase kb = ck::load_snapshot(score_kb);
      ck::ValueProfile profile = read_answers_file(score_answers);
      ck::RankOptions options = config.rank;
      if (score_limit) options.limit = *score_limit;
      options.exclude_uncurated = options.exclude_uncurated || score_exclude;
      std::cout << "rank\tentity\trelevance\tlabel\tevidence\n";
      for (const auto& r : ck::rank_entities(profile, kb, options)) {
        char rel[32];
        std::snprintf(rel, sizeof rel, "%.1f", r.relevance);
        std::cout << r.rank << '\t' << r.entity_id << '\t' << rel << '\t' << r.label << '\t'
                  << r.evidence_snippet << '\n';
      }
    } else if (*serve_cmd) {
      ck::apply_service_env(service_config);
      if (serve_host) service_config.host = *serve_host;
      if (serve_port) service_config.port = *serve_port;
      if (serve_token) service_config.admin_token = *serve_token;
      if (serve_cors) service_config.cors_origin = *serve_cors;
      if (serve_profiles) service_config.profile_log = fs::path(*serve_profiles);
      if (serve_inputs) service_config.input_dir = *serve_inputs;
      auto questionnaire = ck::load_questionnaire(
          config.resolve(config.questionnaire, "questionnaire.jsonl"));
      ck::Service service(service_config, std::move(questionnaire), ck::load_snapshot(serve_kb));
      ck::HttpServer server(service);
      int port = server.bind(service_config.host, service_config.port);
      std::cerr << "listening on http://" << service_config.host << ":" << port << "\n";
      g_server = &server;
      std::signal(SIGINT, [](int) {
        if (g_server) g_server->stop();
      });
      std::signal(SIGTERM, [](int) {
        if (g_server) g_server->stop();
      });
      server.listen();
      g_server = nullptr;
    }
  } catch (const ck::IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const ck::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  }
  return kExitOk;
}
