#include "climatekb/lexicon.hpp"

#include "climatekb/error.hpp"

namespace climatekb {

DataFile parse_data_file(std::string_view contents, const std::string& name,
                         std::size_t min_fields, std::size_t max_fields) {
  DataFile file;
  std::size_t line_no = 0;
  for (std::string_view line : text::split(contents, '\n')) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    std::string_view trimmed = text::trim(line);
    if (trimmed.empty()) continue;
    if (trimmed.front() == '#') {
      std::string_view comment = text::trim(trimmed.substr(1));
      constexpr std::string_view kVersion = "version:";
      if (comment.substr(0, kVersion.size()) == kVersion) {
        file.version = std::string(text::trim(comment.substr(kVersion.size())));
      }
      continue;
    }
    DataRow row;
    row.line = line_no;
    for (std::string_view field : text::split(line, '\t')) {
      row.fields.emplace_back(text::trim(field));
    }
    if (row.fields.size() < min_fields || row.fields.size() > max_fields) {
      throw ValidationError(name + " line " + std::to_string(line_no) +
                            ": expected " + std::to_string(min_fields) +
                            (min_fields == max_fields
                                 ? ""
                                 : ".." + std::to_string(max_fields)) +
                            " tab-separated fields, got " +
                            std::to_string(row.fields.size()));
    }
    file.rows.push_back(std::move(row));
  }
  return file;
}

DataFile read_data_file(const std::filesystem::path& path,
                        std::size_t min_fields, std::size_t max_fields) {
  return parse_data_file(text::read_file(path), path.string(), min_fields,
                         max_fields);
}

WordList::WordList(std::initializer_list<std::string> words) {
  for (const auto& w : words) insert(w);
}

WordList WordList::load(const std::filesystem::path& path) {
  DataFile file = read_data_file(path, 1, 1);
  WordList list;
  list.version_ = file.version;
  for (auto& row : file.rows) list.insert(row.fields[0]);
  return list;
}

bool WordList::contains(std::string_view word) const {
  return words_.find(word) != words_.end();
}

void WordList::insert(std::string word) {
  words_.insert(text::to_lower(word));
}

TermLexicon TermLexicon::load(const std::filesystem::path& path) {
  DataFile file = read_data_file(path, 2, 2);
  TermLexicon lex;
  lex.version_ = file.version;
  for (auto& row : file.rows) {
    if (row.fields[0].empty() || row.fields[1].empty()) {
      throw ValidationError(path.string() + " line " +
                            std::to_string(row.line) + ": empty field");
    }
    if (lex.contains_surface(row.fields[0])) {
      throw ValidationError(path.string() + " line " +
                            std::to_string(row.line) +
                            ": duplicate surface form '" + row.fields[0] + "'");
    }
    lex.add(row.fields[0], row.fields[1]);
  }
  return lex;
}

namespace {
std::vector<std::string> surface_tokens(std::string_view surface) {
  std::vector<std::string> out;
  for (auto& tok : text::tokenize(surface)) out.push_back(tok.lower);
  return out;
}
}  // namespace

void TermLexicon::add(std::string_view surface, std::string normal) {
  auto key = surface_tokens(surface);
  if (key.empty()) {
    throw ValidationError("lexicon surface form '" + std::string(surface) +
                          "' has no word tokens");
  }
  max_length_ = std::max(max_length_, key.size());
  entries_[std::move(key)] = text::to_lower(normal);
}

bool TermLexicon::contains_surface(std::string_view surface) const {
  return entries_.count(surface_tokens(surface)) > 0;
}

std::optional<TermLexicon::Match> TermLexicon::longest_match(
    const std::vector<text::Token>& tokens, std::size_t pos) const {
  if (pos >= tokens.size()) return std::nullopt;
  std::size_t limit = std::min(max_length_, tokens.size() - pos);
  std::vector<std::string> key;
  key.reserve(limit);
  for (std::size_t i = 0; i < limit; ++i) key.push_back(tokens[pos + i].lower);
  for (std::size_t len = limit; len > 0; --len) {
    key.resize(len);
    auto it = entries_.find(key);
    if (it != entries_.end()) return Match{len, it->second};
  }
  return std::nullopt;
}

}  // namespace climatekb
