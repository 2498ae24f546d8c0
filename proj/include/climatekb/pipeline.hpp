#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "climatekb/canonical.hpp"
#include "climatekb/causality.hpp"
#include "climatekb/corpus.hpp"
#include "climatekb/extraction.hpp"
#include "climatekb/kbstore.hpp"
#include "climatekb/recommend.hpp"

namespace climatekb {

// Thresholds, flags and data file locations for every stage. Paths left
// empty resolve against data_dir.
struct PipelineConfig {
  std::filesystem::path data_dir;
  std::filesystem::path cue_lexicon;
  std::filesystem::path abbreviations;
  std::filesystem::path state_lexicon;
  std::filesystem::path unit_lexicon;
  std::filesystem::path stopwords;
  std::filesystem::path clause_cuts;
  std::filesystem::path ambiguous_units;
  std::filesystem::path pronouns;
  std::filesystem::path plural_rules;
  std::filesystem::path plural_exceptions;
  std::filesystem::path questionnaire;

  IngestOptions ingest;
  DetectorOptions detector;
  bool include_flagged = false;
  RankOptions rank;

  std::filesystem::path resolve(const std::filesystem::path& p,
                                const char* default_name) const;
};

// Data directory from $CLIMATEKB_DATA_DIR, else the build-time default.
std::filesystem::path default_data_dir();
PipelineConfig default_config();

// key=value lines; '#' starts a comment. Unknown keys are errors.
void apply_config_text(PipelineConfig& config, std::string_view contents,
                       const std::string& name);
PipelineConfig load_config(const std::filesystem::path& path);

struct Resources {
  AbbreviationList abbreviations;
  CueLexicon cues;
  ExtractionLexicons extraction;
  Normalizer normalizer;

  static Resources load(const PipelineConfig& config);
  std::map<std::string, std::string> versions() const;
};

// --- stage artifacts -------------------------------------------------------

std::string candidates_to_jsonl(std::span<const CausalCandidate> candidates);
std::vector<CausalCandidate> candidates_from_jsonl(std::string_view contents);

std::string mentions_to_jsonl(std::span<const Mention> mentions);
std::vector<Mention> mentions_from_jsonl(std::string_view contents);

struct ExtractionFailureRecord {
  std::string article_id;
  std::size_t sentence_index = 0;
  std::string text;
  std::string reason;
};

std::string failures_to_jsonl(std::span<const ExtractionFailureRecord> failures);

// --- stages ----------------------------------------------------------------

std::vector<CausalCandidate> detect_all(const CorpusSnapshot& snapshot,
                                        const Detector& detector);

struct ExtractionRun {
  std::vector<Mention> mentions;  // cause, effect, cause, effect, ...
  std::vector<ExtractionFailureRecord> failures;
};

// Only candidates with is_causal are extracted.
ExtractionRun extract_all(std::span<const CausalCandidate> candidates,
                          const ExtractionLexicons& lexicons);

struct BuildOptions {
  bool include_flagged = false;  // keep ANAPHORA / IMPLICIT_ENTITY pairs
};

struct BuildReport {
  std::size_t pairs = 0;
  std::size_t flagged_pairs_skipped = 0;
  std::size_t self_loops_skipped = 0;
};

// Clusters the mention pairs into entities and adds one evidence-bearing edge
// per surviving pair. Mentions must come as (cause, effect) pairs per
// sentence.
KnowledgeBase build_kb(std::span<const Mention> mentions, const SynonymTable& synonyms,
                       const Normalizer& normalizer, const BuildOptions& options,
                       BuildMetadata metadata, BuildReport* report = nullptr);

// ISO-8601 UTC; honours SOURCE_DATE_EPOCH for reproducible builds.
std::string build_timestamp();

struct RebuildInputs {
  std::filesystem::path corpus_path;  // raw article JSONL
  std::optional<std::filesystem::path> synonyms_path;
  std::optional<std::filesystem::path> associations_path;
};

// ingest -> segment -> detect -> extract -> build -> associations.
KnowledgeBase build_from_articles(const RebuildInputs& inputs, const PipelineConfig& config);

}  // namespace climatekb
