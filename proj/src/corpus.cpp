#include "climatekb/corpus.hpp"

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <chrono>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_map>

#include "climatekb/lexicon.hpp"
#include "climatekb/text.hpp"

namespace climatekb {

using nlohmann::json;

bool is_valid_iso_date(std::string_view date) {
  if (date.size() != 10 || date[4] != '-' || date[7] != '-') return false;
  auto number = [&](std::size_t pos, std::size_t len, int& out) {
    auto sub = date.substr(pos, len);
    if (!std::all_of(sub.begin(), sub.end(),
                     [](char c) { return c >= '0' && c <= '9'; })) {
      return false;
    }
    std::from_chars(sub.data(), sub.data() + sub.size(), out);
    return true;
  };
  int y, m, d;
  if (!number(0, 4, y) || !number(5, 2, m) || !number(8, 2, d)) return false;
  std::chrono::year_month_day ymd{std::chrono::year{y},
                                  std::chrono::month{static_cast<unsigned>(m)},
                                  std::chrono::day{static_cast<unsigned>(d)}};
  return ymd.ok();
}

namespace {

std::string string_field(const json& obj, const char* key, std::size_t line,
                         bool required) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) {
    if (required) {
      throw RecordError(line, std::string("missing required key '") + key + "'");
    }
    return {};
  }
  if (!it->is_string()) {
    throw RecordError(line, std::string("key '") + key + "' must be a string");
  }
  return it->get<std::string>();
}

bool has_control_chars(std::string_view s) {
  return std::any_of(s.begin(), s.end(), [](char c) {
    return static_cast<unsigned char>(c) < 0x20;
  });
}

}  // namespace

IngestResult ingest(std::istream& in, const IngestOptions& options) {
  IngestResult result;
  std::set<std::string> seen_ids;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (text::trim(line).empty()) continue;

    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::parse_error& e) {
      throw RecordError(line_no, std::string("invalid JSON: ") + e.what());
    }
    if (!obj.is_object()) throw RecordError(line_no, "record is not an object");

    Article article;
    article.id = string_field(obj, "id", line_no, true);
    if (article.id.empty()) throw RecordError(line_no, "empty id");
    if (has_control_chars(article.id)) {
      throw RecordError(line_no, "id contains control characters");
    }
    article.source_name = string_field(obj, "source_name", line_no, false);
    article.url = string_field(obj, "url", line_no, false);
    article.title = string_field(obj, "title", line_no, false);
    std::string date = string_field(obj, "published_date", line_no, false);
    article.body = string_field(obj, "body", line_no, true);

    if (!seen_ids.insert(article.id).second) throw DuplicateIdError(article.id);

    if (!date.empty()) {
      if (!is_valid_iso_date(date)) {
        result.skipped.push_back(
            {line_no, article.id, "invalid published_date '" + date + "'"});
        continue;
      }
      article.published_date = date;
    }
    std::string_view body = text::trim(article.body);
    if (body.empty()) {
      result.skipped.push_back({line_no, article.id, "empty body"});
      continue;
    }
    if (text::count_code_points(body) < options.min_body_chars) {
      result.skipped.push_back(
          {line_no, article.id,
           "body shorter than " + std::to_string(options.min_body_chars) +
               " characters"});
      continue;
    }
    result.articles.push_back(std::move(article));
  }
  return result;
}

IngestResult ingest(const std::filesystem::path& path,
                    const IngestOptions& options) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return ingest(in, options);
}

AbbreviationList::AbbreviationList(std::vector<std::string> entries,
                                   std::string version)
    : entries_(std::move(entries)), version_(std::move(version)) {}

AbbreviationList AbbreviationList::load(const std::filesystem::path& path) {
  DataFile file = read_data_file(path, 1, 1);
  std::vector<std::string> entries;
  for (auto& row : file.rows) entries.push_back(row.fields[0]);
  return AbbreviationList(std::move(entries), file.version);
}

bool AbbreviationList::guards(std::string_view prefix) const {
  for (const auto& abbr : entries_) {
    if (prefix.size() < abbr.size()) continue;
    if (prefix.substr(prefix.size() - abbr.size()) != abbr) continue;
    std::size_t start = prefix.size() - abbr.size();
    if (start == 0) return true;
    char before = prefix[start - 1];
    if (text::is_space(before) || before == '(' || before == '"' ||
        before == '\'') {
      return true;
    }
  }
  return false;
}

namespace {

bool is_terminal(char c) { return c == '.' || c == '!' || c == '?'; }

// Closing quotes and brackets that may follow sentence-final punctuation.
std::size_t closer_length(std::string_view s, std::size_t pos) {
  char c = s[pos];
  if (c == '"' || c == '\'' || c == ')' || c == ']') return 1;
  // U+201D and U+2019.
  if (s.substr(pos, 3) == "\xE2\x80\x9D" || s.substr(pos, 3) == "\xE2\x80\x99") {
    return 3;
  }
  return 0;
}

std::size_t opener_length(std::string_view s, std::size_t pos) {
  char c = s[pos];
  if (c == '"' || c == '\'' || c == '(' || c == '[') return 1;
  // U+201C and U+2018.
  if (s.substr(pos, 3) == "\xE2\x80\x9C" || s.substr(pos, 3) == "\xE2\x80\x98") {
    return 3;
  }
  return 0;
}

}  // namespace

std::vector<Sentence> segment(const Article& article,
                              const AbbreviationList& abbreviations) {
  std::string_view body = article.body;
  std::vector<std::pair<std::size_t, std::size_t>> spans;  // byte offsets

  std::size_t start = 0;
  while (start < body.size() && text::is_space(body[start])) ++start;
  std::size_t i = start;
  while (i < body.size()) {
    if (!is_terminal(body[i])) {
      ++i;
      continue;
    }
    std::size_t punct_begin = i;
    std::size_t end = i;
    while (end < body.size() && is_terminal(body[end])) ++end;
    bool single_period = (end - punct_begin == 1 && body[punct_begin] == '.');
    while (end < body.size()) {
      std::size_t len = closer_length(body, end);
      if (len == 0) break;
      end += len;
    }

    std::size_t next = end;
    while (next < body.size() && text::is_space(body[next])) ++next;
    bool boundary = false;
    if (next == body.size()) {
      boundary = true;
    } else if (next > end) {
      std::size_t letter = next;
      while (letter < body.size()) {
        std::size_t len = opener_length(body, letter);
        if (len == 0) break;
        letter += len;
      }
      boundary = letter < body.size() && text::is_ascii_upper(body[letter]);
    }
    if (boundary && single_period &&
        abbreviations.guards(body.substr(start, punct_begin + 1 - start))) {
      boundary = false;
    }
    if (boundary) {
      spans.emplace_back(start, end);
      start = next;
    }
    i = end;
  }
  std::size_t tail_end = body.size();
  while (tail_end > start && text::is_space(body[tail_end - 1])) --tail_end;
  if (tail_end > start) spans.emplace_back(start, tail_end);

  std::vector<Sentence> sentences;
  sentences.reserve(spans.size());
  std::size_t cp = 0;
  std::size_t byte = 0;
  auto advance_to = [&](std::size_t target) {
    while (byte < target) {
      std::size_t len;
      text::decode_utf8(body, byte, len);
      byte += len;
      ++cp;
    }
  };
  for (auto [b, e] : spans) {
    Sentence s;
    s.article_id = article.id;
    s.index = sentences.size();
    s.text = std::string(body.substr(b, e - b));
    advance_to(b);
    s.char_start = cp;
    advance_to(e);
    s.char_end = cp;
    sentences.push_back(std::move(s));
  }
  return sentences;
}

std::string article_to_json_line(const Article& article) {
  nlohmann::ordered_json obj;
  obj["id"] = article.id;
  obj["source_name"] = article.source_name;
  obj["url"] = article.url;
  obj["title"] = article.title;
  if (article.published_date) {
    obj["published_date"] = *article.published_date;
  } else {
    obj["published_date"] = nullptr;
  }
  obj["body"] = article.body;
  return obj.dump(-1, ' ', false, json::error_handler_t::strict);
}

std::string sentences_to_tsv(const std::vector<Sentence>& sentences) {
  std::string out;
  for (const auto& s : sentences) {
    out += s.article_id;
    out += '\t';
    out += std::to_string(s.index);
    out += '\t';
    out += std::to_string(s.char_start);
    out += '\t';
    out += std::to_string(s.char_end);
    out += '\n';
  }
  return out;
}

CorpusSnapshot make_snapshot(Corpus articles,
                             const AbbreviationList& abbreviations) {
  CorpusSnapshot snap;
  for (const auto& a : articles) {
    auto sentences = segment(a, abbreviations);
    snap.sentences.insert(snap.sentences.end(),
                          std::make_move_iterator(sentences.begin()),
                          std::make_move_iterator(sentences.end()));
  }
  snap.articles = std::move(articles);
  return snap;
}

void write_snapshot(const CorpusSnapshot& snapshot,
                    const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
  std::string corpus;
  for (const auto& a : snapshot.articles) {
    corpus += article_to_json_line(a);
    corpus += '\n';
  }
  text::write_file(dir / kCorpusFile, corpus);
  text::write_file(dir / kSentencesFile, sentences_to_tsv(snapshot.sentences));
}

namespace {

std::size_t parse_size(std::string_view field, const std::string& where) {
  std::size_t value = 0;
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc{} || ptr != field.data() + field.size()) {
    throw ValidationError(where + ": expected a non-negative integer, got '" +
                          std::string(field) + "'");
  }
  return value;
}

}  // namespace

CorpusSnapshot read_snapshot(const std::filesystem::path& dir) {
  CorpusSnapshot snap;
  // Snapshot bodies were already filtered; re-ingesting must not drop any.
  IngestResult ingested = ingest(dir / kCorpusFile, IngestOptions{0});
  if (!ingested.skipped.empty()) {
    throw ValidationError("corpus snapshot contains invalid record for '" +
                          ingested.skipped.front().id +
                          "': " + ingested.skipped.front().reason);
  }
  snap.articles = std::move(ingested.articles);

  std::unordered_map<std::string, const Article*> by_id;
  for (const auto& a : snap.articles) by_id[a.id] = &a;

  std::string tsv = text::read_file(dir / kSentencesFile);
  std::size_t line_no = 0;
  for (std::string_view line : text::split(tsv, '\n')) {
    ++line_no;
    if (line.empty()) continue;
    std::string where = std::string(kSentencesFile) + " line " + std::to_string(line_no);
    auto fields = text::split(line, '\t');
    if (fields.size() != 4) throw ValidationError(where + ": expected 4 fields");
    auto it = by_id.find(std::string(fields[0]));
    if (it == by_id.end()) {
      throw ValidationError(where + ": unknown article id '" +
                            std::string(fields[0]) + "'");
    }
    Sentence s;
    s.article_id = std::string(fields[0]);
    s.index = parse_size(fields[1], where);
    s.char_start = parse_size(fields[2], where);
    s.char_end = parse_size(fields[3], where);
    if (s.char_end < s.char_start) {
      throw ValidationError(where + ": char_end precedes char_start");
    }
    const std::string& body = it->second->body;
    std::size_t b = text::byte_offset(body, s.char_start);
    std::size_t e = b + text::byte_offset(std::string_view(body).substr(b),
                                          s.char_end - s.char_start);
    s.text = body.substr(b, e - b);
    snap.sentences.push_back(std::move(s));
  }
  return snap;
}

}  // namespace climatekb
