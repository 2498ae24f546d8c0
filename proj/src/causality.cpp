#include "climatekb/causality.hpp"

#include <json.hpp>

#include <algorithm>
#include <fstream>

#include "climatekb/lexicon.hpp"
#include "climatekb/text.hpp"

namespace climatekb {

using nlohmann::json;

std::string_view to_string(CueDirection d) {
  return d == CueDirection::kCauseLeft ? "CAUSE_LEFT" : "CAUSE_RIGHT";
}

CueDirection parse_cue_direction(std::string_view s) {
  if (s == "CAUSE_LEFT") return CueDirection::kCauseLeft;
  if (s == "CAUSE_RIGHT") return CueDirection::kCauseRight;
  throw ValidationError("unknown cue direction '" + std::string(s) + "'");
}

namespace {

std::vector<std::string> pattern_tokens(std::string_view pattern) {
  std::vector<std::string> out;
  for (auto& t : text::tokenize(pattern)) out.push_back(t.lower);
  return out;
}

double parse_weight(const std::string& field, const std::string& where) {
  try {
    std::size_t used = 0;
    double w = std::stod(field, &used);
    if (used != field.size()) throw std::invalid_argument(field);
    return w;
  } catch (const std::exception&) {
    throw ValidationError(where + ": invalid weight '" + field + "'");
  }
}

}  // namespace

CueLexicon CueLexicon::load(const std::filesystem::path& path) {
  DataFile file = read_data_file(path, 3, 3);
  CueLexicon lex;
  lex.version_ = file.version;
  for (const auto& row : file.rows) {
    std::string where = path.string() + " line " + std::to_string(row.line);
    try {
      lex.add(row.fields[0], parse_weight(row.fields[1], where),
              parse_cue_direction(row.fields[2]));
    } catch (const ValidationError& e) {
      throw ValidationError(where + ": " + e.what());
    }
  }
  return lex;
}

void CueLexicon::add(std::string_view pattern, double weight,
                     CueDirection direction) {
  auto tokens = pattern_tokens(pattern);
  if (tokens.empty() || tokens.size() > 4) {
    throw ValidationError("cue pattern '" + std::string(pattern) +
                          "' must have 1 to 4 tokens");
  }
  if (!(weight > 0.0 && weight <= 1.0)) {
    throw ValidationError("cue weight for '" + std::string(pattern) +
                          "' must lie in (0, 1]");
  }
  std::string normalized = text::join(tokens, " ");
  for (const auto& e : entries_) {
    if (e.pattern == normalized) {
      throw ValidationError("duplicate cue pattern '" + normalized + "'");
    }
  }
  entries_.push_back({std::move(normalized), std::move(tokens), weight, direction});
}

void validate(const DetectorOptions& options) {
  if (!(options.threshold > 0.0 && options.threshold <= 1.0)) {
    throw ValidationError("threshold must lie in (0, 1]");
  }
  if (!(options.negation_factor >= 0.0 && options.negation_factor <= 1.0)) {
    throw ValidationError("negation factor must lie in [0, 1]");
  }
}

namespace {

bool tokens_equal_at(const std::vector<text::Token>& tokens, std::size_t pos,
                     const std::vector<std::string>& pattern) {
  if (pos + pattern.size() > tokens.size()) return false;
  for (std::size_t i = 0; i < pattern.size(); ++i) {
    if (tokens[pos + i].lower != pattern[i]) return false;
  }
  return true;
}

bool negated_before(const std::vector<text::Token>& tokens, std::size_t cue_begin,
                    const std::vector<std::vector<std::string>>& negations,
                    std::size_t window) {
  std::size_t lo = cue_begin > window ? cue_begin - window : 0;
  for (std::size_t pos = lo; pos < cue_begin; ++pos) {
    for (const auto& neg : negations) {
      if (pos + neg.size() <= cue_begin && tokens_equal_at(tokens, pos, neg)) {
        return true;
      }
    }
  }
  return false;
}

}  // namespace

std::vector<CueMatch> match_cues(std::string_view sentence,
                                 const CueLexicon& lexicon,
                                 const DetectorOptions& options) {
  auto tokens = text::tokenize(sentence);
  std::vector<std::vector<std::string>> negations;
  for (const auto& n : options.negations) negations.push_back(pattern_tokens(n));

  std::vector<CueMatch> matches;
  for (std::size_t pos = 0; pos < tokens.size(); ++pos) {
    for (const auto& entry : lexicon.entries()) {
      if (!tokens_equal_at(tokens, pos, entry.tokens)) continue;
      CueMatch m;
      m.cue = entry;
      m.token_begin = pos;
      m.token_end = pos + entry.tokens.size();
      std::size_t byte_begin = tokens[pos].byte_begin;
      std::size_t byte_end = tokens[m.token_end - 1].byte_end;
      m.char_begin = text::count_code_points(sentence.substr(0, byte_begin));
      m.char_end = m.char_begin + text::count_code_points(
                                      sentence.substr(byte_begin, byte_end - byte_begin));
      m.negated = negated_before(tokens, pos, negations, options.negation_window);
      m.effective_weight =
          m.negated ? entry.weight * options.negation_factor : entry.weight;
      matches.push_back(std::move(m));
    }
  }
  std::stable_sort(matches.begin(), matches.end(),
                   [](const CueMatch& a, const CueMatch& b) {
                     if (a.token_begin != b.token_begin) {
                       return a.token_begin < b.token_begin;
                     }
                     if (a.token_end != b.token_end) return a.token_end > b.token_end;
                     return a.cue.pattern < b.cue.pattern;
                   });
  return matches;
}

CausalCandidate detect(const Sentence& sentence, const CueLexicon& lexicon,
                       const DetectorOptions& options) {
  validate(options);
  if (lexicon.empty()) throw ValidationError("cue lexicon is empty");
  CausalCandidate c;
  c.sentence = sentence;
  c.matched_cues = match_cues(sentence.text, lexicon, options);
  for (const auto& m : c.matched_cues) c.score = std::max(c.score, m.effective_weight);
  c.is_causal = c.score >= options.threshold;
  return c;
}

CueLexiconDetector::CueLexiconDetector(CueLexicon lexicon, DetectorOptions options)
    : lexicon_(std::move(lexicon)), options_(std::move(options)) {
  validate(options_);
  if (lexicon_.empty()) throw ValidationError("cue lexicon is empty");
}

CausalCandidate CueLexiconDetector::detect(const Sentence& sentence) const {
  return climatekb::detect(sentence, lexicon_, options_);
}

ExternalScoreDetector::ExternalScoreDetector(
    std::unordered_map<std::string, double> scores, CueLexicon lexicon,
    DetectorOptions options)
    : scores_(std::move(scores)),
      lexicon_(std::move(lexicon)),
      options_(std::move(options)) {
  validate(options_);
}

CausalCandidate ExternalScoreDetector::detect(const Sentence& sentence) const {
  CausalCandidate c;
  c.sentence = sentence;
  c.matched_cues = match_cues(sentence.text, lexicon_, options_);
  auto it = scores_.find(sentence.text);
  if (it != scores_.end() && !c.matched_cues.empty()) c.score = it->second;
  c.is_causal = c.score >= options_.threshold;
  return c;
}

namespace {

template <typename Fn>
void for_each_json_line(const std::filesystem::path& path, Fn&& fn) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ValidationError(path.string() + " line " + std::to_string(line_no) +
                            ": invalid JSON: " + e.what());
    }
    if (!obj.is_object() || !obj.contains("text") || !obj["text"].is_string()) {
      throw ValidationError(path.string() + " line " + std::to_string(line_no) +
                            ": expected an object with a string 'text'");
    }
    fn(obj, line_no);
  }
}

bool bool_field(const json& obj, std::initializer_list<const char*> keys,
                const std::filesystem::path& path, std::size_t line_no) {
  for (const char* key : keys) {
    auto it = obj.find(key);
    if (it != obj.end() && it->is_boolean()) return it->get<bool>();
  }
  throw ValidationError(path.string() + " line " + std::to_string(line_no) +
                        ": missing boolean label");
}

}  // namespace

std::unordered_map<std::string, double> load_external_scores(
    const std::filesystem::path& path) {
  std::unordered_map<std::string, double> scores;
  for_each_json_line(path, [&](const json& obj, std::size_t line_no) {
    auto it = obj.find("score");
    if (it == obj.end() || !it->is_number()) {
      throw ValidationError(path.string() + " line " + std::to_string(line_no) +
                            ": missing numeric 'score'");
    }
    double s = it->get<double>();
    if (!(s >= 0.0 && s <= 1.0)) {
      throw ValidationError(path.string() + " line " + std::to_string(line_no) +
                            ": score must lie in [0, 1]");
    }
    scores[obj["text"].get<std::string>()] = s;
  });
  return scores;
}

std::vector<GoldLabel> load_gold_labels(const std::filesystem::path& path) {
  std::vector<GoldLabel> gold;
  for_each_json_line(path, [&](const json& obj, std::size_t line_no) {
    std::string t = obj["text"].get<std::string>();
    if (t.empty()) {
      throw ValidationError(path.string() + " line " + std::to_string(line_no) +
                            ": empty text");
    }
    gold.push_back({std::move(t), bool_field(obj, {"label"}, path, line_no)});
  });
  return gold;
}

std::vector<Prediction> load_predictions(const std::filesystem::path& path) {
  std::vector<Prediction> preds;
  for_each_json_line(path, [&](const json& obj, std::size_t line_no) {
    preds.push_back({obj["text"].get<std::string>(),
                     bool_field(obj, {"is_causal", "label"}, path, line_no)});
  });
  return preds;
}

EvalReport evaluate(std::span<const Prediction> predictions,
                    std::span<const GoldLabel> gold) {
  std::unordered_map<std::string_view, bool> gold_by_text;
  for (const auto& g : gold) {
    if (!gold_by_text.emplace(g.sentence_text, g.label).second) {
      throw ValidationError("duplicate gold sentence: \"" + g.sentence_text + "\"");
    }
  }
  std::unordered_map<std::string_view, bool> predicted;
  for (const auto& p : predictions) {
    if (!gold_by_text.count(p.sentence_text)) continue;
    if (!predicted.emplace(p.sentence_text, p.is_causal).second) {
      throw ValidationError("sentence predicted more than once: \"" +
                            p.sentence_text + "\"");
    }
  }

  EvalReport r;
  for (const auto& g : gold) {
    auto it = predicted.find(g.sentence_text);
    if (it == predicted.end()) {
      throw ValidationError("no prediction for gold sentence: \"" +
                            g.sentence_text + "\"");
    }
    bool p = it->second;
    if (p && g.label) ++r.true_positives;
    else if (p && !g.label) ++r.false_positives;
    else if (!p && g.label) ++r.false_negatives;
    else ++r.true_negatives;
  }
  std::size_t predicted_pos = r.true_positives + r.false_positives;
  std::size_t gold_pos = r.true_positives + r.false_negatives;
  if (predicted_pos > 0) {
    r.precision_defined = true;
    r.precision = static_cast<double>(r.true_positives) / predicted_pos;
  }
  if (gold_pos > 0) {
    r.recall_defined = true;
    r.recall = static_cast<double>(r.true_positives) / gold_pos;
  }
  if (r.precision_defined && r.recall_defined && r.precision + r.recall > 0.0) {
    r.f1_defined = true;
    r.f1 = 2.0 * r.precision * r.recall / (r.precision + r.recall);
  }
  return r;
}

}  // namespace climatekb
