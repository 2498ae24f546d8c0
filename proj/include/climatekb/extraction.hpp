#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "climatekb/causality.hpp"
#include "climatekb/error.hpp"
#include "climatekb/lexicon.hpp"

namespace climatekb {

enum class Role { kCause, kEffect };

std::string_view to_string(Role r);
Role parse_role(std::string_view s);

enum class FlagKind { kImplicitEntity, kAnaphora, kAmbiguousBaseUnit };

std::string_view to_string(FlagKind k);
FlagKind parse_flag_kind(std::string_view s);

struct ExtractionFlag {
  FlagKind kind = FlagKind::kImplicitEntity;
  std::string detail;

  bool operator==(const ExtractionFlag&) const = default;
};

// Where a mention came from. span_start/span_end are code point offsets
// within the sentence text.
struct Provenance {
  std::string article_id;
  std::size_t sentence_index = 0;
  std::size_t span_start = 0;
  std::size_t span_end = 0;
  std::string sentence_text;

  bool operator==(const Provenance&) const = default;
};

// (state, base, unit) reading of a cause or effect span.
struct Mention {
  std::string raw_text;
  // raw_text from the first to the last token read into the tuple
  std::string surface;
  std::optional<std::string> state;  // state lexicon normal form
  std::string base;                  // lowercase, never empty
  std::optional<std::string> unit;   // unit lexicon normal form
  Role role = Role::kCause;
  Provenance provenance;
  std::vector<ExtractionFlag> flags;

  bool has_flag(FlagKind k) const;
  bool operator==(const Mention&) const = default;
};

// Recorded reason why a span produced no mention.
class ExtractionFailure : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

struct ExtractionLexicons {
  TermLexicon states;
  TermLexicon units;
  WordList stopwords;        // dropped inside spans and trimmed at the edges
  WordList clause_cuts;      // start a trailing modifier that is discarded
  WordList ambiguous_units;  // unit forms that may equally be a base
  WordList pronouns;
};

struct TextSpan {
  std::string text;
  std::size_t char_begin = 0;  // within the sentence
  std::size_t char_end = 0;
};

struct SpanPair {
  TextSpan cause;
  TextSpan effect;
  CueMatch cue;
};

// The cue with the highest effective weight (leftmost, then longest, on
// ties) splits the sentence. Throws ExtractionFailure if either side is
// empty once stopwords and punctuation are trimmed.
SpanPair split_spans(const CausalCandidate& candidate, const WordList& stopwords);

enum class TokenRole { kDropped, kState, kBase, kUnit };

struct TokenAssignment {
  std::string token;
  TokenRole role = TokenRole::kDropped;
};

struct ParsedMention {
  Mention mention;
  std::vector<TokenAssignment> assignment;  // one entry per span token
};

// Longest-match tuple parse. Throws ExtractionFailure for a span with no
// content tokens.
ParsedMention parse_mention(std::string_view span, Role role, Provenance provenance,
                            const ExtractionLexicons& lexicons);

// Cause and effect of one sentence, or the reason extraction failed.
struct SentenceExtraction {
  std::optional<std::pair<Mention, Mention>> mentions;
  std::string failure;
};

SentenceExtraction extract(const CausalCandidate& candidate,
                           const ExtractionLexicons& lexicons);

}  // namespace climatekb
