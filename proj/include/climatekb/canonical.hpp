#pragma once

#include <compare>
#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "climatekb/extraction.hpp"
#include "climatekb/lexicon.hpp"
#include "climatekb/values.hpp"

namespace climatekb {

// Lowercase, punctuation-free, stopword-free, singularized tokens joined by
// single spaces.
class CanonicalKey {
 public:
  CanonicalKey() = default;
  explicit CanonicalKey(std::string value) : value_(std::move(value)) {}

  const std::string& str() const { return value_; }
  bool empty() const { return value_.empty(); }

  auto operator<=>(const CanonicalKey&) const = default;

 private:
  std::string value_;
};

// Suffix rules for stripping plurals, plus an irregular-form table.
class PluralRules {
 public:
  struct SuffixRule {
    std::string suffix;
    std::string replacement;
  };

  static PluralRules load(const std::filesystem::path& rules_path,
                          const std::filesystem::path& exceptions_path);

  void add_rule(std::string suffix, std::string replacement);
  void add_exception(std::string plural, std::string singular);

  // Irregular table first, then the first matching suffix rule whose stem
  // keeps at least three characters. Suffixes mapped to themselves protect a
  // word ("ss" -> "ss" keeps "loss").
  std::string singularize(std::string_view word) const;

  std::string version() const;

 private:
  std::vector<SuffixRule> rules_;
  std::map<std::string, std::string, std::less<>> exceptions_;
  std::string rules_version_;
  std::string exceptions_version_;
};

class Normalizer {
 public:
  Normalizer(WordList stopwords, PluralRules plurals);

  // State normal form, base tokens, unit normal form, in that order.
  CanonicalKey normalize(const Mention& mention) const;
  CanonicalKey normalize_text(std::string_view text) const;

  const WordList& stopwords() const { return stopwords_; }
  const PluralRules& plurals() const { return plurals_; }

 private:
  void append_tokens(std::string_view text, std::vector<std::string>& out) const;

  WordList stopwords_;
  PluralRules plurals_;
};

// Pairs of keys naming the same concept; normalized on insert.
class SynonymTable {
 public:
  static SynonymTable load(const std::filesystem::path& path,
                           const Normalizer& normalizer);

  void add(CanonicalKey a, CanonicalKey b);
  const std::vector<std::pair<CanonicalKey, CanonicalKey>>& edges() const {
    return edges_;
  }
  const std::string& version() const { return version_; }

 private:
  std::vector<std::pair<CanonicalKey, CanonicalKey>> edges_;
  std::string version_;
};

struct MentionRef {
  std::string article_id;
  std::size_t sentence_index = 0;
  Role role = Role::kCause;

  bool operator==(const MentionRef&) const = default;
};

struct CanonicalEntity {
  std::string id;     // "e" + zero-padded first-seen ordinal
  std::string label;  // majority raw surface of the members
  CanonicalKey key;
  // Tuple of the first member whose surface equals the label.
  std::optional<std::string> state;
  std::string base;
  std::optional<std::string> unit;
  std::vector<MentionRef> members;
  std::size_t member_count = 0;
  AssociationScores associations;
  bool curated = false;

  bool operator==(const CanonicalEntity&) const = default;
};

std::string entity_id_for_ordinal(std::size_t ordinal);

struct Clustering {
  std::vector<CanonicalEntity> entities;
  std::vector<std::size_t> entity_of_mention;  // index into entities
};

// Groups mentions by union-find over equal keys and synonym edges (closed
// transitively, self-loops ignored).
Clustering cluster(std::span<const Mention> mentions, const SynonymTable& synonyms,
                   const Normalizer& normalizer);

}  // namespace climatekb
