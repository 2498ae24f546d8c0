#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "climatekb/text.hpp"

namespace climatekb {

// One non-comment row of a tab-separated data file.
struct DataRow {
  std::size_t line = 0;
  std::vector<std::string> fields;
};

// Versioned tab-separated data file. Lines starting with '#' are comments; a
// comment of the form "# version: X" sets the version. Blank lines are
// skipped.
struct DataFile {
  std::string version;
  std::vector<DataRow> rows;
};

DataFile parse_data_file(std::string_view contents, const std::string& name,
                         std::size_t min_fields, std::size_t max_fields);
DataFile read_data_file(const std::filesystem::path& path,
                        std::size_t min_fields, std::size_t max_fields);

// Set of lowercase single-token words.
class WordList {
 public:
  WordList() = default;
  WordList(std::initializer_list<std::string> words);

  static WordList load(const std::filesystem::path& path);

  bool contains(std::string_view word) const;
  void insert(std::string word);
  std::size_t size() const { return words_.size(); }
  const std::string& version() const { return version_; }

 private:
  std::set<std::string, std::less<>> words_;
  std::string version_;
};

// Maps lowercase surface token sequences to a normal form. Lookups are
// longest-match over a token stream.
class TermLexicon {
 public:
  struct Match {
    std::size_t length = 0;
    std::string normal;
  };

  static TermLexicon load(const std::filesystem::path& path);

  void add(std::string_view surface, std::string normal);
  std::optional<Match> longest_match(const std::vector<text::Token>& tokens,
                                     std::size_t pos) const;
  bool contains_surface(std::string_view surface) const;
  const std::string& version() const { return version_; }
  std::size_t size() const { return entries_.size(); }

 private:
  std::map<std::vector<std::string>, std::string> entries_;
  std::size_t max_length_ = 0;
  std::string version_;
};

}  // namespace climatekb
