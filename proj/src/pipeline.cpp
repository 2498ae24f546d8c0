#include "climatekb/pipeline.hpp"

#include <json.hpp>

#include <chrono>
#include <cstdlib>
#include <ctime>

#include "climatekb/text.hpp"

namespace climatekb {

using nlohmann::json;
using nlohmann::ordered_json;

std::filesystem::path default_data_dir() {
  if (const char* env = std::getenv("CLIMATEKB_DATA_DIR"); env && *env) return env;
  return CLIMATEKB_DEFAULT_DATA_DIR;
}

PipelineConfig default_config() {
  PipelineConfig c;
  c.data_dir = default_data_dir();
  return c;
}

std::filesystem::path PipelineConfig::resolve(const std::filesystem::path& p,
                                              const char* default_name) const {
  if (p.empty()) return data_dir / default_name;
  return p;
}

namespace {

bool parse_bool(const std::string& v, const std::string& where) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ValidationError(where + ": expected a boolean, got '" + v + "'");
}

double parse_double(const std::string& v, const std::string& where) {
  try {
    std::size_t used = 0;
    double d = std::stod(v, &used);
    if (used == v.size()) return d;
  } catch (const std::exception&) {
  }
  throw ValidationError(where + ": expected a number, got '" + v + "'");
}

std::size_t parse_count(const std::string& v, const std::string& where) {
  try {
    std::size_t used = 0;
    long long n = std::stoll(v, &used);
    if (used == v.size() && n >= 0) return static_cast<std::size_t>(n);
  } catch (const std::exception&) {
  }
  throw ValidationError(where + ": expected a non-negative integer, got '" + v + "'");
}

std::string unquote(std::string_view v) {
  if (v.size() >= 2 && ((v.front() == '"' && v.back() == '"') ||
                        (v.front() == '\'' && v.back() == '\''))) {
    v = v.substr(1, v.size() - 2);
  }
  return std::string(v);
}

}  // namespace

void apply_config_text(PipelineConfig& c, std::string_view contents, const std::string& name) {
  std::size_t line_no = 0;
  for (std::string_view line : text::split(contents, '\n')) {
    ++line_no;
    std::string_view t = text::trim(line);
    if (t.empty() || t.front() == '#' || t.front() == '[') continue;
    std::string where = name + " line " + std::to_string(line_no);
    auto eq = t.find('=');
    if (eq == std::string_view::npos) throw ValidationError(where + ": expected key=value");
    std::string key(text::trim(t.substr(0, eq)));
    std::string value = unquote(text::trim(t.substr(eq + 1)));

    if (key == "data_dir") c.data_dir = value;
    else if (key == "cue_lexicon") c.cue_lexicon = value;
    else if (key == "abbreviations") c.abbreviations = value;
    else if (key == "state_lexicon") c.state_lexicon = value;
    else if (key == "unit_lexicon") c.unit_lexicon = value;
    else if (key == "stopwords") c.stopwords = value;
    else if (key == "clause_cuts") c.clause_cuts = value;
    else if (key == "ambiguous_units") c.ambiguous_units = value;
    else if (key == "pronouns") c.pronouns = value;
    else if (key == "plural_rules") c.plural_rules = value;
    else if (key == "plural_exceptions") c.plural_exceptions = value;
    else if (key == "questionnaire") c.questionnaire = value;
    else if (key == "threshold") c.detector.threshold = parse_double(value, where);
    else if (key == "negation_factor") c.detector.negation_factor = parse_double(value, where);
    else if (key == "negation_window") c.detector.negation_window = parse_count(value, where);
    else if (key == "min_body_chars") c.ingest.min_body_chars = parse_count(value, where);
    else if (key == "include_flagged") c.include_flagged = parse_bool(value, where);
    else if (key == "exclude_uncurated") c.rank.exclude_uncurated = parse_bool(value, where);
    else if (key == "default_limit") {
      c.rank.limit = parse_count(value, where);
      if (c.rank.limit == 0) throw ValidationError(where + ": default_limit must be >= 1");
    } else {
      throw ValidationError(where + ": unknown key '" + key + "'");
    }
  }
  validate(c.detector);
}

PipelineConfig load_config(const std::filesystem::path& path) {
  PipelineConfig c = default_config();
  apply_config_text(c, text::read_file(path), path.string());
  return c;
}

Resources Resources::load(const PipelineConfig& c) {
  WordList stopwords = WordList::load(c.resolve(c.stopwords, "stopwords.txt"));
  return Resources{
      AbbreviationList::load(c.resolve(c.abbreviations, "abbreviations.txt")),
      CueLexicon::load(c.resolve(c.cue_lexicon, "cue_lexicon.tsv")),
      ExtractionLexicons{
          TermLexicon::load(c.resolve(c.state_lexicon, "state_lexicon.tsv")),
          TermLexicon::load(c.resolve(c.unit_lexicon, "unit_lexicon.tsv")),
          stopwords,
          WordList::load(c.resolve(c.clause_cuts, "clause_cuts.txt")),
          WordList::load(c.resolve(c.ambiguous_units, "ambiguous_units.txt")),
          WordList::load(c.resolve(c.pronouns, "pronouns.txt")),
      },
      Normalizer(stopwords,
                 PluralRules::load(c.resolve(c.plural_rules, "plural_rules.tsv"),
                                   c.resolve(c.plural_exceptions, "plural_exceptions.tsv"))),
  };
}

std::map<std::string, std::string> Resources::versions() const {
  return {
      {"abbreviations", abbreviations.version()},
      {"ambiguous_units", extraction.ambiguous_units.version()},
      {"clause_cuts", extraction.clause_cuts.version()},
      {"cue_lexicon", cues.version()},
      {"plurals", normalizer.plurals().version()},
      {"pronouns", extraction.pronouns.version()},
      {"state_lexicon", extraction.states.version()},
      {"stopwords", extraction.stopwords.version()},
      {"unit_lexicon", extraction.units.version()},
  };
}

namespace {

std::string dump(const ordered_json& j) {
  return j.dump(-1, ' ', false, json::error_handler_t::strict);
}

ordered_json optional_string(const std::optional<std::string>& s) {
  return s ? ordered_json(*s) : ordered_json(nullptr);
}

template <typename Fn>
void for_each_line(std::string_view contents, const char* what, Fn&& fn) {
  std::size_t line_no = 0;
  for (std::string_view line : text::split(contents, '\n')) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    try {
      fn(json::parse(line));
    } catch (const json::exception& e) {
      throw ValidationError(std::string(what) + " line " + std::to_string(line_no) + ": " +
                            e.what());
    } catch (const ValidationError& e) {
      throw ValidationError(std::string(what) + " line " + std::to_string(line_no) + ": " +
                            e.what());
    }
  }
}

std::optional<std::string> read_optional(const json& j, const char* key) {
  const auto& v = j.at(key);
  if (v.is_null()) return std::nullopt;
  return v.get<std::string>();
}

}  // namespace

std::string candidates_to_jsonl(std::span<const CausalCandidate> candidates) {
  std::string out;
  for (const auto& c : candidates) {
    ordered_json j;
    j["article_id"] = c.sentence.article_id;
    j["sentence_index"] = c.sentence.index;
    j["char_start"] = c.sentence.char_start;
    j["char_end"] = c.sentence.char_end;
    j["text"] = c.sentence.text;
    j["score"] = c.score;
    j["is_causal"] = c.is_causal;
    ordered_json cues = ordered_json::array();
    for (const auto& m : c.matched_cues) {
      ordered_json cue;
      cue["pattern"] = m.cue.pattern;
      cue["weight"] = m.cue.weight;
      cue["direction"] = to_string(m.cue.direction);
      cue["token_begin"] = m.token_begin;
      cue["token_end"] = m.token_end;
      cue["char_begin"] = m.char_begin;
      cue["char_end"] = m.char_end;
      cue["negated"] = m.negated;
      cue["effective_weight"] = m.effective_weight;
      cues.push_back(std::move(cue));
    }
    j["cues"] = std::move(cues);
    out += dump(j) + "\n";
  }
  return out;
}

std::vector<CausalCandidate> candidates_from_jsonl(std::string_view contents) {
  std::vector<CausalCandidate> out;
  for_each_line(contents, "candidates", [&](const json& j) {
    CausalCandidate c;
    c.sentence.article_id = j.at("article_id").get<std::string>();
    c.sentence.index = j.at("sentence_index").get<std::size_t>();
    c.sentence.char_start = j.at("char_start").get<std::size_t>();
    c.sentence.char_end = j.at("char_end").get<std::size_t>();
    c.sentence.text = j.at("text").get<std::string>();
    c.score = j.at("score").get<double>();
    c.is_causal = j.at("is_causal").get<bool>();
    for (const auto& cue : j.at("cues")) {
      CueMatch m;
      m.cue.pattern = cue.at("pattern").get<std::string>();
      for (auto& t : text::tokenize(m.cue.pattern)) m.cue.tokens.push_back(t.lower);
      m.cue.weight = cue.at("weight").get<double>();
      m.cue.direction = parse_cue_direction(cue.at("direction").get<std::string>());
      m.token_begin = cue.at("token_begin").get<std::size_t>();
      m.token_end = cue.at("token_end").get<std::size_t>();
      m.char_begin = cue.at("char_begin").get<std::size_t>();
      m.char_end = cue.at("char_end").get<std::size_t>();
      m.negated = cue.at("negated").get<bool>();
      m.effective_weight = cue.at("effective_weight").get<double>();
      c.matched_cues.push_back(std::move(m));
    }
    out.push_back(std::move(c));
  });
  return out;
}

std::string mentions_to_jsonl(std::span<const Mention> mentions) {
  std::string out;
  for (const auto& m : mentions) {
    ordered_json j;
    j["article_id"] = m.provenance.article_id;
    j["sentence_index"] = m.provenance.sentence_index;
    j["role"] = to_string(m.role);
    j["state"] = optional_string(m.state);
    j["base"] = m.base;
    j["unit"] = optional_string(m.unit);
    j["raw_text"] = m.raw_text;
    j["surface"] = m.surface;
    ordered_json flags = ordered_json::array();
    for (const auto& f : m.flags) {
      flags.push_back(ordered_json{{"kind", to_string(f.kind)}, {"detail", f.detail}});
    }
    j["flags"] = std::move(flags);
    j["span_start"] = m.provenance.span_start;
    j["span_end"] = m.provenance.span_end;
    j["sentence_text"] = m.provenance.sentence_text;
    out += dump(j) + "\n";
  }
  return out;
}

std::vector<Mention> mentions_from_jsonl(std::string_view contents) {
  std::vector<Mention> out;
  for_each_line(contents, "mentions", [&](const json& j) {
    Mention m;
    m.provenance.article_id = j.at("article_id").get<std::string>();
    m.provenance.sentence_index = j.at("sentence_index").get<std::size_t>();
    m.role = parse_role(j.at("role").get<std::string>());
    m.state = read_optional(j, "state");
    m.base = j.at("base").get<std::string>();
    if (m.base.empty()) throw ValidationError("empty base");
    m.unit = read_optional(j, "unit");
    m.raw_text = j.at("raw_text").get<std::string>();
    m.surface = j.value("surface", m.raw_text);
    for (const auto& f : j.at("flags")) {
      m.flags.push_back({parse_flag_kind(f.at("kind").get<std::string>()),
                         f.at("detail").get<std::string>()});
    }
    m.provenance.span_start = j.value("span_start", std::size_t{0});
    m.provenance.span_end = j.value("span_end", std::size_t{0});
    m.provenance.sentence_text = j.value("sentence_text", std::string());
    out.push_back(std::move(m));
  });
  return out;
}

std::string failures_to_jsonl(std::span<const ExtractionFailureRecord> failures) {
  std::string out;
  for (const auto& f : failures) {
    ordered_json j;
    j["article_id"] = f.article_id;
    j["sentence_index"] = f.sentence_index;
    j["text"] = f.text;
    j["reason"] = f.reason;
    out += dump(j) + "\n";
  }
  return out;
}

std::vector<CausalCandidate> detect_all(const CorpusSnapshot& snapshot,
                                        const Detector& detector) {
  std::vector<CausalCandidate> out;
  out.reserve(snapshot.sentences.size());
  for (const auto& s : snapshot.sentences) out.push_back(detector.detect(s));
  return out;
}

ExtractionRun extract_all(std::span<const CausalCandidate> candidates,
                          const ExtractionLexicons& lexicons) {
  ExtractionRun run;
  for (const auto& c : candidates) {
    if (!c.is_causal) continue;
    SentenceExtraction r = extract(c, lexicons);
    if (r.mentions) {
      run.mentions.push_back(std::move(r.mentions->first));
      run.mentions.push_back(std::move(r.mentions->second));
    } else {
      run.failures.push_back(
          {c.sentence.article_id, c.sentence.index, c.sentence.text, r.failure});
    }
  }
  return run;
}

KnowledgeBase build_kb(std::span<const Mention> mentions, const SynonymTable& synonyms,
                       const Normalizer& normalizer, const BuildOptions& options,
                       BuildMetadata metadata, BuildReport* report) {
  if (mentions.size() % 2 != 0) {
    throw ValidationError("mentions must come in cause/effect pairs");
  }
  BuildReport local;
  std::vector<Mention> kept;
  for (std::size_t i = 0; i < mentions.size(); i += 2) {
    const Mention& cause = mentions[i];
    const Mention& effect = mentions[i + 1];
    if (cause.role != Role::kCause || effect.role != Role::kEffect ||
        cause.provenance.article_id != effect.provenance.article_id ||
        cause.provenance.sentence_index != effect.provenance.sentence_index) {
      throw ValidationError("mention " + std::to_string(i) +
                            " does not start a cause/effect pair of one sentence");
    }
    ++local.pairs;
    auto excluded = [](const Mention& m) {
      return m.has_flag(FlagKind::kAnaphora) || m.has_flag(FlagKind::kImplicitEntity);
    };
    if (!options.include_flagged && (excluded(cause) || excluded(effect))) {
      ++local.flagged_pairs_skipped;
      continue;
    }
    kept.push_back(cause);
    kept.push_back(effect);
  }

  Clustering clusters = cluster(kept, synonyms, normalizer);
  KnowledgeBase kb;
  for (const auto& e : clusters.entities) kb.add_entity(e);
  for (std::size_t i = 0; i < kept.size(); i += 2) {
    const auto& cause_id = clusters.entities[clusters.entity_of_mention[i]].id;
    const auto& effect_id = clusters.entities[clusters.entity_of_mention[i + 1]].id;
    if (cause_id == effect_id) {
      ++local.self_loops_skipped;
      continue;
    }
    const Provenance& p = kept[i].provenance;
    kb.upsert_edge(cause_id, effect_id, {p.article_id, p.sentence_index, p.sentence_text});
  }
  kb.set_metadata(std::move(metadata));
  kb.check_integrity();
  if (report) *report = local;
  return kb;
}

std::string build_timestamp() {
  std::time_t t;
  if (const char* epoch = std::getenv("SOURCE_DATE_EPOCH"); epoch && *epoch) {
    t = static_cast<std::time_t>(std::stoll(epoch));
  } else {
    t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  }
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

KnowledgeBase build_from_articles(const RebuildInputs& inputs, const PipelineConfig& config) {
  Resources res = Resources::load(config);
  IngestResult ingested = ingest(inputs.corpus_path, config.ingest);
  CorpusSnapshot snapshot = make_snapshot(std::move(ingested.articles), res.abbreviations);
  CueLexiconDetector detector(res.cues, config.detector);
  auto candidates = detect_all(snapshot, detector);
  ExtractionRun run = extract_all(candidates, res.extraction);

  SynonymTable synonyms;
  if (inputs.synonyms_path) synonyms = SynonymTable::load(*inputs.synonyms_path, res.normalizer);

  std::string corpus_bytes;
  for (const auto& a : snapshot.articles) corpus_bytes += article_to_json_line(a) + "\n";
  BuildMetadata meta;
  meta.corpus_hash = text::sha256_hex(corpus_bytes);
  meta.lexicon_versions = res.versions();
  meta.lexicon_versions["synonyms"] = synonyms.version();
  meta.build_timestamp = build_timestamp();

  KnowledgeBase kb = build_kb(run.mentions, synonyms, res.normalizer,
                              BuildOptions{config.include_flagged}, std::move(meta));
  if (inputs.associations_path) kb = load_associations(kb, *inputs.associations_path);
  return kb;
}

}  // namespace climatekb
