#include "climatekb/extraction.hpp"

#include <algorithm>

#include "climatekb/text.hpp"

namespace climatekb {

std::string_view to_string(Role r) { return r == Role::kCause ? "cause" : "effect"; }

Role parse_role(std::string_view s) {
  if (s == "cause") return Role::kCause;
  if (s == "effect") return Role::kEffect;
  throw ValidationError("unknown role '" + std::string(s) + "'");
}

std::string_view to_string(FlagKind k) {
  switch (k) {
    case FlagKind::kImplicitEntity: return "IMPLICIT_ENTITY";
    case FlagKind::kAnaphora: return "ANAPHORA";
    case FlagKind::kAmbiguousBaseUnit: return "AMBIGUOUS_BASE_UNIT";
  }
  return "";
}

FlagKind parse_flag_kind(std::string_view s) {
  if (s == "IMPLICIT_ENTITY") return FlagKind::kImplicitEntity;
  if (s == "ANAPHORA") return FlagKind::kAnaphora;
  if (s == "AMBIGUOUS_BASE_UNIT") return FlagKind::kAmbiguousBaseUnit;
  throw ValidationError("unknown extraction flag '" + std::string(s) + "'");
}

bool Mention::has_flag(FlagKind k) const {
  return std::any_of(flags.begin(), flags.end(),
                     [k](const ExtractionFlag& f) { return f.kind == k; });
}

namespace {

// Trims stopword tokens at both ends of the byte range [begin, end) of
// `sentence` and returns the remaining text.
std::optional<TextSpan> trimmed_span(std::string_view sentence, std::size_t begin,
                                     std::size_t end, const WordList& stopwords) {
  auto tokens = text::tokenize(sentence.substr(begin, end - begin));
  std::size_t lo = 0;
  std::size_t hi = tokens.size();
  while (lo < hi && stopwords.contains(tokens[lo].lower)) ++lo;
  while (hi > lo && stopwords.contains(tokens[hi - 1].lower)) --hi;
  if (lo == hi) return std::nullopt;
  std::size_t b = begin + tokens[lo].byte_begin;
  std::size_t e = begin + tokens[hi - 1].byte_end;
  TextSpan span;
  span.text = std::string(sentence.substr(b, e - b));
  span.char_begin = text::count_code_points(sentence.substr(0, b));
  span.char_end = span.char_begin + text::count_code_points(span.text);
  return span;
}

}  // namespace

SpanPair split_spans(const CausalCandidate& candidate, const WordList& stopwords) {
  if (!candidate.is_causal || candidate.matched_cues.empty()) {
    throw ExtractionFailure("sentence is not causal or has no cue");
  }
  const CueMatch* best = &candidate.matched_cues.front();
  for (const auto& m : candidate.matched_cues) {
    if (m.effective_weight > best->effective_weight) best = &m;
  }
  std::string_view s = candidate.sentence.text;
  std::size_t cue_b = text::byte_offset(s, best->char_begin);
  std::size_t cue_e = text::byte_offset(s, best->char_end);

  auto left = trimmed_span(s, 0, cue_b, stopwords);
  auto right = trimmed_span(s, cue_e, s.size(), stopwords);
  bool cause_left = best->cue.direction == CueDirection::kCauseLeft;
  auto& cause = cause_left ? left : right;
  auto& effect = cause_left ? right : left;
  if (!cause) {
    throw ExtractionFailure("empty cause span around cue '" + best->cue.pattern + "'");
  }
  if (!effect) {
    throw ExtractionFailure("empty effect span around cue '" + best->cue.pattern + "'");
  }
  return SpanPair{std::move(*cause), std::move(*effect), *best};
}

ParsedMention parse_mention(std::string_view span, Role role, Provenance provenance,
                            const ExtractionLexicons& lex) {
  auto tokens = text::tokenize(span);
  ParsedMention out;
  out.assignment.reserve(tokens.size());
  for (const auto& t : tokens) out.assignment.push_back({t.lower, TokenRole::kDropped});

  Mention& m = out.mention;
  m.raw_text = std::string(span);
  m.role = role;
  m.provenance = std::move(provenance);

  if (tokens.empty()) throw ExtractionFailure("span has no word tokens");

  if (lex.pronouns.contains(tokens.front().lower)) {
    m.base = tokens.front().lower;
    m.surface = std::string(span.substr(tokens.front().byte_begin,
                                        tokens.front().byte_end - tokens.front().byte_begin));
    out.assignment.front().role = TokenRole::kBase;
    m.flags.push_back({FlagKind::kAnaphora,
                       "span starts with pronoun '" + tokens.front().lower + "'"});
    return out;
  }

  // A clause cut after the first content token ends the mention.
  std::size_t limit = tokens.size();
  bool seen_content = false;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (seen_content && lex.clause_cuts.contains(tokens[i].lower)) {
      limit = i;
      break;
    }
    if (!lex.stopwords.contains(tokens[i].lower)) seen_content = true;
  }

  std::vector<std::size_t> base_idx;
  std::vector<std::size_t> state_idx;
  std::vector<std::size_t> unit_idx;
  std::size_t i = 0;
  while (i < limit) {
    const std::string& tok = tokens[i].lower;
    if (lex.stopwords.contains(tok)) {
      ++i;
      continue;
    }
    // length 0 means no match
    TermLexicon::Match state_match;
    TermLexicon::Match unit_match;
    if (!m.state) {
      if (auto hit = lex.states.longest_match(tokens, i); hit && hit->length <= limit - i) {
        state_match = *hit;
      }
    }
    if (!m.unit) {
      if (auto hit = lex.units.longest_match(tokens, i); hit && hit->length <= limit - i) {
        unit_match = *hit;
      }
    }

    if (unit_match.length > state_match.length) {
      if (unit_match.length == 1 && lex.ambiguous_units.contains(tok)) {
        m.flags.push_back({FlagKind::kAmbiguousBaseUnit,
                           "'" + tok + "' can be a base or a unit; kept as base"});
        base_idx.push_back(i);
        ++i;
        continue;
      }
      m.unit = unit_match.normal;
      for (std::size_t k = 0; k < unit_match.length; ++k) unit_idx.push_back(i + k);
      i += unit_match.length;
    } else if (state_match.length > 0) {
      m.state = state_match.normal;
      for (std::size_t k = 0; k < state_match.length; ++k) state_idx.push_back(i + k);
      i += state_match.length;
    } else {
      base_idx.push_back(i);
      ++i;
    }
  }

  if (base_idx.empty()) {
    if (m.unit) {
      m.flags.push_back({FlagKind::kAmbiguousBaseUnit,
                         "no base besides unit '" + *m.unit + "'; unit used as base"});
      base_idx = std::move(unit_idx);
      unit_idx.clear();
      m.unit.reset();
    } else if (m.state) {
      m.flags.push_back({FlagKind::kImplicitEntity,
                         "span is only the state '" + *m.state + "'; entity implied"});
      base_idx = std::move(state_idx);
      state_idx.clear();
      m.state.reset();
    } else {
      throw ExtractionFailure("span '" + std::string(span) + "' has only stopwords");
    }
  }

  std::vector<std::string> base_tokens;
  for (std::size_t k : base_idx) {
    base_tokens.push_back(tokens[k].lower);
    out.assignment[k].role = TokenRole::kBase;
  }
  for (std::size_t k : state_idx) out.assignment[k].role = TokenRole::kState;
  for (std::size_t k : unit_idx) out.assignment[k].role = TokenRole::kUnit;
  m.base = text::join(base_tokens, " ");

  std::size_t first = tokens.size();
  std::size_t last = 0;
  for (const auto* idx : {&base_idx, &state_idx, &unit_idx}) {
    for (std::size_t k : *idx) {
      first = std::min(first, k);
      last = std::max(last, k);
    }
  }
  m.surface = std::string(
      span.substr(tokens[first].byte_begin, tokens[last].byte_end - tokens[first].byte_begin));
  return out;
}

SentenceExtraction extract(const CausalCandidate& candidate,
                           const ExtractionLexicons& lexicons) {
  SentenceExtraction result;
  try {
    SpanPair spans = split_spans(candidate, lexicons.stopwords);
    auto provenance = [&](const TextSpan& span) {
      Provenance p;
      p.article_id = candidate.sentence.article_id;
      p.sentence_index = candidate.sentence.index;
      p.span_start = span.char_begin;
      p.span_end = span.char_end;
      p.sentence_text = candidate.sentence.text;
      return p;
    };
    auto cause = parse_mention(spans.cause.text, Role::kCause,
                               provenance(spans.cause), lexicons);
    auto effect = parse_mention(spans.effect.text, Role::kEffect,
                                provenance(spans.effect), lexicons);
    result.mentions.emplace(std::move(cause.mention), std::move(effect.mention));
  } catch (const ExtractionFailure& e) {
    result.failure = e.what();
  }
  return result;
}

}  // namespace climatekb
