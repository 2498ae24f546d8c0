#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "climatekb/corpus.hpp"

namespace climatekb {

// Which side of the cue holds the cause.
enum class CueDirection {
  kCauseLeft,   // "X leads to Y"
  kCauseRight,  // "Y due to X"
};

std::string_view to_string(CueDirection d);
CueDirection parse_cue_direction(std::string_view s);

struct CueLexiconEntry {
  std::string pattern;              // lowercase, single-space separated
  std::vector<std::string> tokens;  // 1..4 tokens
  double weight = 0.0;              // (0, 1]
  CueDirection direction = CueDirection::kCauseLeft;

  bool operator==(const CueLexiconEntry&) const = default;
};

class CueLexicon {
 public:
  CueLexicon() = default;
  static CueLexicon load(const std::filesystem::path& path);

  // Throws ValidationError on a duplicate pattern, a weight outside (0,1] or
  // a pattern of more than four tokens.
  void add(std::string_view pattern, double weight, CueDirection direction);

  const std::vector<CueLexiconEntry>& entries() const { return entries_; }
  bool empty() const { return entries_.empty(); }
  const std::string& version() const { return version_; }

 private:
  std::vector<CueLexiconEntry> entries_;
  std::string version_;
};

struct CueMatch {
  CueLexiconEntry cue;
  std::size_t token_begin = 0;  // token indices, half-open
  std::size_t token_end = 0;
  std::size_t char_begin = 0;   // code point offsets within the sentence
  std::size_t char_end = 0;
  bool negated = false;
  double effective_weight = 0.0;

  bool operator==(const CueMatch&) const = default;
};

struct CausalCandidate {
  Sentence sentence;
  double score = 0.0;
  std::vector<CueMatch> matched_cues;  // left to right
  bool is_causal = false;

  bool operator==(const CausalCandidate&) const = default;
};

struct DetectorOptions {
  double threshold = 0.5;
  double negation_factor = 0.25;
  std::size_t negation_window = 3;
  std::vector<std::string> negations{"not", "no", "never", "doesn't",
                                     "does not"};
};

void validate(const DetectorOptions& options);

// Every lexicon hit in the sentence, ordered by start token, longer match
// first, then pattern. Negation damping is already applied.
std::vector<CueMatch> match_cues(std::string_view sentence,
                                 const CueLexicon& lexicon,
                                 const DetectorOptions& options);

// Cue-lexicon baseline: score is the maximum effective weight of all hits.
CausalCandidate detect(const Sentence& sentence, const CueLexicon& lexicon,
                       const DetectorOptions& options = {});

// Pluggable sentence-level causality detector.
class Detector {
 public:
  virtual ~Detector() = default;
  virtual CausalCandidate detect(const Sentence& sentence) const = 0;
};

class CueLexiconDetector : public Detector {
 public:
  CueLexiconDetector(CueLexicon lexicon, DetectorOptions options);
  CausalCandidate detect(const Sentence& sentence) const override;

 private:
  CueLexicon lexicon_;
  DetectorOptions options_;
};

// Takes scores from an external classifier (sentence text -> score). Cue
// matches still come from the lexicon since extraction splits on them; a
// sentence without any cue scores 0.
class ExternalScoreDetector : public Detector {
 public:
  ExternalScoreDetector(std::unordered_map<std::string, double> scores,
                        CueLexicon lexicon, DetectorOptions options);
  CausalCandidate detect(const Sentence& sentence) const override;

 private:
  std::unordered_map<std::string, double> scores_;
  CueLexicon lexicon_;
  DetectorOptions options_;
};

// JSONL {text, score}; scores must lie in [0,1].
std::unordered_map<std::string, double> load_external_scores(
    const std::filesystem::path& path);

struct GoldLabel {
  std::string sentence_text;
  bool label = false;
};

struct Prediction {
  std::string sentence_text;
  bool is_causal = false;
};

// JSONL {text, label}.
std::vector<GoldLabel> load_gold_labels(const std::filesystem::path& path);
// JSONL {text, is_causal} (a "label" key is accepted in place of is_causal).
std::vector<Prediction> load_predictions(const std::filesystem::path& path);

struct EvalReport {
  std::size_t true_positives = 0;
  std::size_t false_positives = 0;
  std::size_t false_negatives = 0;
  std::size_t true_negatives = 0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  bool precision_defined = false;
  bool recall_defined = false;
  bool f1_defined = false;
};

// Predictions whose text is not in the gold set are ignored. Throws
// ValidationError when a gold sentence has no prediction, when gold texts
// repeat, or when a gold sentence is predicted more than once.
EvalReport evaluate(std::span<const Prediction> predictions,
                    std::span<const GoldLabel> gold);

}  // namespace climatekb
