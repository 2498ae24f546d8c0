#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "climatekb/error.hpp"

namespace climatekb {

struct Article {
  std::string id;
  std::string source_name;
  std::string url;
  std::string title;
  std::optional<std::string> published_date;  // YYYY-MM-DD
  std::string body;

  bool operator==(const Article&) const = default;
};

// A sentence of an article body. char_start/char_end are code point offsets
// into the body, so body[char_start, char_end) == text.
struct Sentence {
  std::string article_id;
  std::size_t index = 0;
  std::string text;
  std::size_t char_start = 0;
  std::size_t char_end = 0;

  bool operator==(const Sentence&) const = default;
};

using Corpus = std::vector<Article>;

// Malformed JSONL record; line() is 1-based.
class RecordError : public ValidationError {
 public:
  RecordError(std::size_t line, const std::string& what)
      : ValidationError("line " + std::to_string(line) + ": " + what),
        line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class DuplicateIdError : public ValidationError {
 public:
  explicit DuplicateIdError(std::string id)
      : ValidationError("duplicate article id '" + id + "'"),
        id_(std::move(id)) {}
  const std::string& id() const { return id_; }

 private:
  std::string id_;
};

struct SkippedRecord {
  std::size_t line = 0;
  std::string id;
  std::string reason;
};

struct IngestResult {
  Corpus articles;
  std::vector<SkippedRecord> skipped;
};

struct IngestOptions {
  // Bodies shorter than this many characters (after trimming) are skipped.
  std::size_t min_body_chars = 40;
};

IngestResult ingest(const std::filesystem::path& path,
                    const IngestOptions& options = {});
IngestResult ingest(std::istream& in, const IngestOptions& options = {});

bool is_valid_iso_date(std::string_view date);

// Abbreviations that never end a sentence ("Dr.", "U.S.", "et al.").
class AbbreviationList {
 public:
  AbbreviationList() = default;
  explicit AbbreviationList(std::vector<std::string> entries,
                            std::string version = {});
  static AbbreviationList load(const std::filesystem::path& path);

  // True when `prefix` (text up to and including a period) ends with a
  // listed abbreviation that starts at a word boundary.
  bool guards(std::string_view prefix) const;
  const std::string& version() const { return version_; }

 private:
  std::vector<std::string> entries_;
  std::string version_;
};

std::vector<Sentence> segment(const Article& article,
                              const AbbreviationList& abbreviations);

// Corpus snapshot: corpus.jsonl (one article per line, fixed key order) plus
// sentences.tsv (article_id, index, char_start, char_end).
struct CorpusSnapshot {
  Corpus articles;
  std::vector<Sentence> sentences;
};

inline constexpr const char* kCorpusFile = "corpus.jsonl";
inline constexpr const char* kSentencesFile = "sentences.tsv";

std::string article_to_json_line(const Article& article);
std::string sentences_to_tsv(const std::vector<Sentence>& sentences);

CorpusSnapshot make_snapshot(Corpus articles,
                             const AbbreviationList& abbreviations);
void write_snapshot(const CorpusSnapshot& snapshot,
                    const std::filesystem::path& dir);
CorpusSnapshot read_snapshot(const std::filesystem::path& dir);

}  // namespace climatekb
