#include "climatekb/turtle.hpp"

#include <algorithm>
#include <charconv>
#include <map>
#include <set>
#include <sstream>

#include "climatekb/kbstore.hpp"
#include "climatekb/text.hpp"

namespace climatekb {

namespace {

constexpr std::string_view kRdf = "http://www.w3.org/1999/02/22-rdf-syntax-ns#";
constexpr std::string_view kRdfs = "http://www.w3.org/2000/01/rdf-schema#";
constexpr std::string_view kOwl = "http://www.w3.org/2002/07/owl#";
constexpr std::string_view kXsd = "http://www.w3.org/2001/XMLSchema#";

std::string iri(std::string_view ns, std::string_view local) {
  return std::string(ns) + std::string(local);
}

// Property local names for the association data properties.
std::string assoc_property(PersonalValue v) {
  std::string name = "assoc";
  bool upper = true;
  for (char c : to_string(v)) {
    if (c == '_') {
      upper = true;
      continue;
    }
    name.push_back(upper ? static_cast<char>(c - 'a' + 'A') : c);
    upper = false;
  }
  return name;
}

std::string link_name(const CausalEdge& e) {
  return "link_" + e.cause_id + "_" + e.effect_id;
}

std::string evidence_name(const CausalEdge& e, std::size_t ordinal) {
  return "ev_" + e.cause_id + "_" + e.effect_id + "_" + std::to_string(ordinal);
}

std::string integer_literal(long long v) {
  return "\"" + std::to_string(v) + "\"^^xsd:integer";
}

}  // namespace

std::string escape_turtle_string(std::string_view s) {
  std::string out;
  out.reserve(s.size() + 2);
  out.push_back('"');
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      case '\t': out += "\\t"; break;
      default:
        if (static_cast<unsigned char>(c) < 0x20 || c == 0x7F) {
          char buf[8];
          std::snprintf(buf, sizeof buf, "\\u%04X", static_cast<unsigned char>(c));
          out += buf;
        } else {
          out.push_back(c);
        }
    }
  }
  out.push_back('"');
  return out;
}

std::string export_turtle(const KnowledgeBase& kb) {
  std::ostringstream out;
  out << "@prefix : <" << kKbNamespace << "> .\n"
      << "@prefix owl: <" << kOwl << "> .\n"
      << "@prefix rdf: <" << kRdf << "> .\n"
      << "@prefix rdfs: <" << kRdfs << "> .\n"
      << "@prefix xsd: <" << kXsd << "> .\n"
      << "\n"
      << "<" << kOntologyIri << "> rdf:type owl:Ontology .\n";

  for (const auto& e : kb.entities()) {
    out << "\n:" << e.id << " rdf:type owl:NamedIndividual , :ClimateConcept ;\n";
    out << "    rdfs:label " << escape_turtle_string(e.label) << " ;\n";
    out << "    :hasKey " << escape_turtle_string(e.key.str()) << " ;\n";
    if (e.state) out << "    :hasState " << escape_turtle_string(*e.state) << " ;\n";
    out << "    :hasBase " << escape_turtle_string(e.base) << " ;\n";
    if (e.unit) out << "    :hasUnit " << escape_turtle_string(*e.unit) << " ;\n";
    out << "    :memberCount " << integer_literal(static_cast<long long>(e.member_count))
        << " ;\n";
    out << "    :curated \"" << (e.curated ? "true" : "false") << "\"^^xsd:boolean";
    if (e.curated) {
      for (PersonalValue v : kAllValues) {
        out << " ;\n    :" << assoc_property(v) << " " << integer_literal(e.associations[v]);
      }
    }
    auto outgoing = kb.outgoing(e.id);
    if (!outgoing.empty()) {
      out << " ;\n    :causes ";
      for (std::size_t i = 0; i < outgoing.size(); ++i) {
        out << (i ? " , :" : ":") << outgoing[i]->effect_id;
      }
    }
    out << " .\n";
  }

  for (const auto& edge : kb.edges()) {
    out << "\n:" << link_name(edge) << " rdf:type owl:NamedIndividual , :CausalLink ;\n";
    out << "    :hasCause :" << edge.cause_id << " ;\n";
    out << "    :hasEffect :" << edge.effect_id << " ;\n";
    out << "    :hasEvidence ";
    for (std::size_t i = 0; i < edge.evidence.size(); ++i) {
      out << (i ? " , :" : ":") << evidence_name(edge, i + 1);
    }
    out << " .\n";
    for (std::size_t i = 0; i < edge.evidence.size(); ++i) {
      const auto& ev = edge.evidence[i];
      out << "\n:" << evidence_name(edge, i + 1)
          << " rdf:type owl:NamedIndividual , :EvidenceSentence ;\n";
      out << "    :evidenceOrdinal " << integer_literal(static_cast<long long>(i + 1))
          << " ;\n";
      out << "    :sourceArticle " << escape_turtle_string(ev.article_id) << " ;\n";
      out << "    :sentenceIndex "
          << integer_literal(static_cast<long long>(ev.sentence_index)) << " ;\n";
      out << "    :sentenceText " << escape_turtle_string(ev.text) << " .\n";
    }
  }
  return out.str();
}

// ---------------------------------------------------------------------------
// Parser

namespace {

enum class TokKind {
  kIri,
  kPrefixedName,
  kString,
  kLangTag,
  kDatatypeMark,
  kInteger,
  kDecimal,
  kDot,
  kSemicolon,
  kComma,
  kKeywordPrefix,  // @prefix or PREFIX
  kKeywordA,
  kTrue,
  kFalse,
  kEnd,
};

struct Tok {
  TokKind kind;
  std::string text;  // decoded content
  std::size_t line;
  std::size_t column;
};

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) {}

  Tok next() {
    skip_space_and_comments();
    std::size_t line = line_;
    std::size_t col = col_;
    if (pos_ >= src_.size()) return {TokKind::kEnd, "", line, col};
    char c = src_[pos_];
    auto make = [&](TokKind k, std::string t) { return Tok{k, std::move(t), line, col}; };
    switch (c) {
      case '.':
        if (pos_ + 1 < src_.size() && src_[pos_ + 1] >= '0' && src_[pos_ + 1] <= '9') break;
        advance();
        return make(TokKind::kDot, ".");
      case ';': advance(); return make(TokKind::kSemicolon, ";");
      case ',': advance(); return make(TokKind::kComma, ",");
      case '<': return make(TokKind::kIri, read_iri());
      case '"':
      case '\'': return make(TokKind::kString, read_string());
      case '^':
        if (pos_ + 1 < src_.size() && src_[pos_ + 1] == '^') {
          advance();
          advance();
          return make(TokKind::kDatatypeMark, "^^");
        }
        fail("expected '^^'");
      case '@': {
        advance();
        std::string word = read_while([](char ch) {
          return std::isalnum(static_cast<unsigned char>(ch)) || ch == '-';
        });
        if (word == "prefix") return make(TokKind::kKeywordPrefix, "@prefix");
        if (word.empty()) fail("empty language tag");
        if (word == "base") fail("@base is not supported");
        return make(TokKind::kLangTag, word);
      }
      case '_':
        if (pos_ + 1 < src_.size() && src_[pos_ + 1] == ':') fail("blank nodes are not supported");
        break;
      case '[':
      case '(':
        fail("blank nodes and collections are not supported");
      default:
        break;
    }
    if (c == '+' || c == '-' || c == '.' || (c >= '0' && c <= '9')) {
      std::string num;
      if (c == '+' || c == '-') {
        num.push_back(c);
        advance();
      }
      num += read_while([](char ch) { return ch >= '0' && ch <= '9'; });
      bool decimal = false;
      if (pos_ + 1 < src_.size() && src_[pos_] == '.' && src_[pos_ + 1] >= '0' &&
          src_[pos_ + 1] <= '9') {
        decimal = true;
        advance();
        num += "." + read_while([](char ch) { return ch >= '0' && ch <= '9'; });
      }
      if (num.empty() || num == "+" || num == "-") fail("malformed number");
      return make(decimal ? TokKind::kDecimal : TokKind::kInteger, num);
    }
    if (is_name_start(c) || c == ':') {
      std::string prefix = read_while([](char ch) { return is_name_char(ch); });
      if (pos_ < src_.size() && src_[pos_] == ':') {
        advance();
        std::string local;
        while (pos_ < src_.size() && (is_name_char(src_[pos_]) || src_[pos_] == '.')) {
          if (src_[pos_] == '.' &&
              (pos_ + 1 >= src_.size() || !is_name_char(src_[pos_ + 1]))) {
            break;
          }
          local.push_back(src_[pos_]);
          advance();
        }
        return make(TokKind::kPrefixedName, prefix + ":" + local);
      }
      if (prefix == "a") return make(TokKind::kKeywordA, prefix);
      if (prefix == "true") return make(TokKind::kTrue, prefix);
      if (prefix == "false") return make(TokKind::kFalse, prefix);
      if (prefix == "PREFIX" || prefix == "prefix") return make(TokKind::kKeywordPrefix, prefix);
      fail("unexpected word '" + prefix + "'");
    }
    fail(std::string("unexpected character '") + c + "'");
  }

  [[noreturn]] void fail(const std::string& what) const {
    throw ParseError(line_, col_, what);
  }

 private:
  static bool is_name_start(char c) {
    return std::isalpha(static_cast<unsigned char>(c)) ||
           static_cast<unsigned char>(c) >= 0x80;
  }
  static bool is_name_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' ||
           static_cast<unsigned char>(c) >= 0x80;
  }

  void advance() {
    if (src_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else if ((static_cast<unsigned char>(src_[pos_]) & 0xC0) != 0x80) {
      ++col_;
    }
    ++pos_;
  }

  template <typename Pred>
  std::string read_while(Pred pred) {
    std::string out;
    while (pos_ < src_.size() && pred(src_[pos_])) {
      out.push_back(src_[pos_]);
      advance();
    }
    return out;
  }

  void skip_space_and_comments() {
    while (pos_ < src_.size()) {
      char c = src_[pos_];
      if (text::is_space(c)) {
        advance();
      } else if (c == '#') {
        while (pos_ < src_.size() && src_[pos_] != '\n') advance();
      } else {
        break;
      }
    }
  }

  std::string read_iri() {
    advance();  // '<'
    std::string out;
    while (true) {
      if (pos_ >= src_.size()) fail("unterminated IRI");
      char c = src_[pos_];
      if (c == '>') {
        advance();
        return out;
      }
      if (c == '\n' || c == ' ' || c == '"' || c == '<') fail("invalid character in IRI");
      out.push_back(c);
      advance();
    }
  }

  void append_utf8(std::string& out, unsigned long cp) {
    if (cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) fail("invalid code point escape");
    if (cp < 0x80) {
      out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
      out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
      out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else if (cp < 0x10000) {
      out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
      out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
      out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else {
      out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
      out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
      out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
      out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    }
  }

  std::string read_string() {
    char quote = src_[pos_];
    bool long_form = src_.substr(pos_, 3) == std::string(3, quote);
    for (int i = 0; i < (long_form ? 3 : 1); ++i) advance();
    std::string out;
    while (true) {
      if (pos_ >= src_.size()) fail("unterminated string literal");
      char c = src_[pos_];
      if (c == quote) {
        if (!long_form) {
          advance();
          return out;
        }
        if (src_.substr(pos_, 3) == std::string(3, quote)) {
          advance();
          advance();
          advance();
          return out;
        }
      }
      if (!long_form && (c == '\n' || c == '\r')) fail("newline in string literal");
      if (c == '\\') {
        advance();
        if (pos_ >= src_.size()) fail("unterminated escape");
        char e = src_[pos_];
        advance();
        switch (e) {
          case 't': out.push_back('\t'); break;
          case 'b': out.push_back('\b'); break;
          case 'n': out.push_back('\n'); break;
          case 'r': out.push_back('\r'); break;
          case 'f': out.push_back('\f'); break;
          case '"': out.push_back('"'); break;
          case '\'': out.push_back('\''); break;
          case '\\': out.push_back('\\'); break;
          case 'u':
          case 'U': {
            std::size_t digits = e == 'u' ? 4 : 8;
            if (pos_ + digits > src_.size()) fail("truncated unicode escape");
            std::string hex(src_.substr(pos_, digits));
            unsigned long cp = 0;
            auto [ptr, ec] = std::from_chars(hex.data(), hex.data() + hex.size(), cp, 16);
            if (ec != std::errc{} || ptr != hex.data() + hex.size()) {
              fail("malformed unicode escape");
            }
            for (std::size_t i = 0; i < digits; ++i) advance();
            append_utf8(out, cp);
            break;
          }
          default:
            fail(std::string("unknown escape '\\") + e + "'");
        }
        continue;
      }
      out.push_back(c);
      advance();
    }
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
  std::size_t col_ = 1;
};

class Parser {
 public:
  explicit Parser(std::string_view src) : lexer_(src) { shift(); }

  std::vector<Triple> parse() {
    while (cur_.kind != TokKind::kEnd) {
      if (cur_.kind == TokKind::kKeywordPrefix) {
        parse_prefix();
      } else {
        parse_triples();
      }
    }
    return std::move(triples_);
  }

 private:
  void shift() { cur_ = lexer_.next(); }

  [[noreturn]] void fail_at(const Tok& t, const std::string& what) const {
    throw ParseError(t.line, t.column, what);
  }

  void expect(TokKind kind, const char* what) {
    if (cur_.kind != kind) {
      fail_at(cur_, std::string("expected ") + what +
                        (cur_.kind == TokKind::kEnd ? ", found end of input"
                                                    : ", found '" + cur_.text + "'"));
    }
    shift();
  }

  void parse_prefix() {
    bool sparql_style = cur_.text != "@prefix";
    shift();
    if (cur_.kind != TokKind::kPrefixedName || cur_.text.back() != ':') {
      fail_at(cur_, "expected prefix name");
    }
    std::string name = cur_.text.substr(0, cur_.text.size() - 1);
    shift();
    if (cur_.kind != TokKind::kIri) fail_at(cur_, "expected IRI after prefix name");
    prefixes_[name] = cur_.text;
    shift();
    if (!sparql_style) expect(TokKind::kDot, "'.'");
  }

  RdfTerm expand(const Tok& t) {
    if (t.kind == TokKind::kIri) return RdfTerm{RdfTerm::Kind::kIri, t.text, "", ""};
    auto colon = t.text.find(':');
    auto it = prefixes_.find(t.text.substr(0, colon));
    if (it == prefixes_.end()) {
      fail_at(t, "undeclared prefix '" + t.text.substr(0, colon) + ":'");
    }
    return RdfTerm{RdfTerm::Kind::kIri, it->second + t.text.substr(colon + 1), "", ""};
  }

  RdfTerm parse_iri(const char* role) {
    if (cur_.kind != TokKind::kIri && cur_.kind != TokKind::kPrefixedName) {
      fail_at(cur_, std::string("expected ") + role + (cur_.kind == TokKind::kEnd
                                                           ? ", found end of input"
                                                           : ", found '" + cur_.text + "'"));
    }
    RdfTerm term = expand(cur_);
    shift();
    return term;
  }

  RdfTerm parse_object() {
    switch (cur_.kind) {
      case TokKind::kIri:
      case TokKind::kPrefixedName: return parse_iri("object");
      case TokKind::kString: {
        RdfTerm lit{RdfTerm::Kind::kLiteral, cur_.text, "", ""};
        shift();
        if (cur_.kind == TokKind::kLangTag) {
          lit.language = text::to_lower(cur_.text);
          shift();
        } else if (cur_.kind == TokKind::kDatatypeMark) {
          shift();
          lit.datatype = parse_iri("datatype IRI").value;
        }
        return lit;
      }
      case TokKind::kInteger: {
        RdfTerm lit{RdfTerm::Kind::kLiteral, cur_.text, iri(kXsd, "integer"), ""};
        shift();
        return lit;
      }
      case TokKind::kDecimal: {
        RdfTerm lit{RdfTerm::Kind::kLiteral, cur_.text, iri(kXsd, "decimal"), ""};
        shift();
        return lit;
      }
      case TokKind::kTrue:
      case TokKind::kFalse: {
        RdfTerm lit{RdfTerm::Kind::kLiteral, cur_.text, iri(kXsd, "boolean"), ""};
        shift();
        return lit;
      }
      default:
        fail_at(cur_, cur_.kind == TokKind::kEnd ? "expected object, found end of input"
                                                 : "expected object, found '" + cur_.text + "'");
    }
  }

  void parse_triples() {
    RdfTerm subject = parse_iri("subject");
    while (true) {
      RdfTerm predicate;
      if (cur_.kind == TokKind::kKeywordA) {
        predicate = RdfTerm{RdfTerm::Kind::kIri, iri(kRdf, "type"), "", ""};
        shift();
      } else {
        predicate = parse_iri("predicate");
      }
      while (true) {
        triples_.push_back({subject, predicate, parse_object()});
        if (cur_.kind != TokKind::kComma) break;
        shift();
      }
      if (cur_.kind == TokKind::kSemicolon) {
        while (cur_.kind == TokKind::kSemicolon) shift();
        if (cur_.kind == TokKind::kDot) break;
        continue;
      }
      break;
    }
    expect(TokKind::kDot, "'.'");
  }

  Lexer lexer_;
  Tok cur_{TokKind::kEnd, "", 1, 1};
  std::map<std::string, std::string> prefixes_;
  std::vector<Triple> triples_;
};

std::string display(std::string_view full) {
  static const std::pair<std::string_view, std::string_view> kPrefixes[] = {
      {kKbNamespace, ":"}, {kRdf, "rdf:"}, {kRdfs, "rdfs:"}, {kOwl, "owl:"}, {kXsd, "xsd:"}};
  for (auto [ns, p] : kPrefixes) {
    if (full.substr(0, ns.size()) == ns) {
      return std::string(p) + std::string(full.substr(ns.size()));
    }
  }
  return "<" + std::string(full) + ">";
}

// Subject-centric view of the parsed graph.
struct Node {
  std::string iri;
  std::set<std::string> types;
  std::map<std::string, std::vector<RdfTerm>> props;
};

const RdfTerm* single(const Node& n, const std::string& prop, bool required) {
  auto it = n.props.find(prop);
  if (it == n.props.end() || it->second.empty()) {
    if (required) {
      throw IntegrityError(display(n.iri) + " lacks required property " + display(prop));
    }
    return nullptr;
  }
  if (it->second.size() > 1) {
    throw IntegrityError(display(n.iri) + " has several values for " + display(prop));
  }
  return &it->second.front();
}

std::string string_value(const Node& n, const std::string& prop) {
  const RdfTerm* t = single(n, prop, true);
  if (t->kind != RdfTerm::Kind::kLiteral ||
      !(t->datatype.empty() || t->datatype == iri(kXsd, "string"))) {
    throw IntegrityError(display(prop) + " of " + display(n.iri) + " must be a string literal");
  }
  return t->value;
}

std::optional<std::string> optional_string_value(const Node& n, const std::string& prop) {
  if (!single(n, prop, false)) return std::nullopt;
  return string_value(n, prop);
}

long long integer_value(const Node& n, const std::string& prop) {
  const RdfTerm* t = single(n, prop, true);
  if (t->kind != RdfTerm::Kind::kLiteral || t->datatype != iri(kXsd, "integer")) {
    throw IntegrityError(display(prop) + " of " + display(n.iri) + " must be an xsd:integer");
  }
  long long v = 0;
  std::string_view s = t->value;
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    throw IntegrityError("malformed integer '" + t->value + "'");
  }
  return v;
}

bool boolean_value(const Node& n, const std::string& prop) {
  const RdfTerm* t = single(n, prop, true);
  if (t->kind != RdfTerm::Kind::kLiteral || t->datatype != iri(kXsd, "boolean") ||
      (t->value != "true" && t->value != "false")) {
    throw IntegrityError(display(prop) + " of " + display(n.iri) + " must be an xsd:boolean");
  }
  return t->value == "true";
}

std::string local_id(const RdfTerm& t) {
  if (t.kind != RdfTerm::Kind::kIri || t.value.substr(0, kKbNamespace.size()) != kKbNamespace) {
    throw IntegrityError("expected an individual in the ClimateKB namespace, found " +
                         (t.kind == RdfTerm::Kind::kIri ? display(t.value) : "a literal"));
  }
  return t.value.substr(kKbNamespace.size());
}

std::vector<std::string> iri_values(const Node& n, const std::string& prop) {
  std::vector<std::string> out;
  auto it = n.props.find(prop);
  if (it == n.props.end()) return out;
  for (const auto& t : it->second) out.push_back(local_id(t));
  return out;
}

}  // namespace

std::vector<Triple> parse_turtle(std::string_view document) {
  return Parser(document).parse();
}

KnowledgeBase import_turtle(std::string_view document) {
  std::vector<Triple> triples = parse_turtle(document);

  const std::string rdf_type = iri(kRdf, "type");
  const std::string kb = std::string(kKbNamespace);
  std::set<std::string> known_props = {
      rdf_type,           iri(kRdfs, "label"),     kb + "hasKey",
      kb + "hasState",    kb + "hasBase",          kb + "hasUnit",
      kb + "memberCount", kb + "curated",          kb + "causes",
      kb + "hasCause",    kb + "hasEffect",        kb + "hasEvidence",
      kb + "evidenceOrdinal", kb + "sourceArticle", kb + "sentenceIndex",
      kb + "sentenceText"};
  for (PersonalValue v : kAllValues) known_props.insert(kb + assoc_property(v));
  const std::set<std::string> known_classes = {
      iri(kOwl, "Ontology"), iri(kOwl, "NamedIndividual"), kb + "ClimateConcept",
      kb + "CausalLink", kb + "EvidenceSentence"};

  std::map<std::string, Node> nodes;
  for (const auto& t : triples) {
    if (!known_props.count(t.predicate.value)) {
      throw UnknownTermError(display(t.predicate.value),
                             "unknown property " + display(t.predicate.value));
    }
    Node& n = nodes[t.subject.value];
    n.iri = t.subject.value;
    if (t.predicate.value == rdf_type) {
      if (t.object.kind != RdfTerm::Kind::kIri || !known_classes.count(t.object.value)) {
        throw UnknownTermError(display(t.object.value),
                               "unknown class " + display(t.object.value));
      }
      n.types.insert(t.object.value);
    } else {
      n.props[t.predicate.value].push_back(t.object);
    }
  }

  KnowledgeBase out;
  std::set<std::pair<std::string, std::string>> declared_causes;
  std::vector<const Node*> links;
  std::map<std::string, const Node*> evidence_nodes;
  for (const auto& [subject, n] : nodes) {
    if (n.types.count(iri(kOwl, "Ontology"))) {
      if (subject != kOntologyIri || !n.props.empty()) {
        throw IntegrityError("unexpected ontology header for " + display(subject));
      }
      continue;
    }
    int kinds = n.types.count(kb + "ClimateConcept") + n.types.count(kb + "CausalLink") +
                n.types.count(kb + "EvidenceSentence");
    if (kinds != 1) {
      throw IntegrityError(display(subject) + " must have exactly one ClimateKB class");
    }
    if (n.types.count(kb + "CausalLink")) {
      links.push_back(&n);
      continue;
    }
    if (n.types.count(kb + "EvidenceSentence")) {
      evidence_nodes[subject] = &n;
      continue;
    }
    CanonicalEntity e;
    e.id = local_id(RdfTerm{RdfTerm::Kind::kIri, subject, "", ""});
    e.label = string_value(n, iri(kRdfs, "label"));
    e.key = CanonicalKey(string_value(n, kb + "hasKey"));
    e.state = optional_string_value(n, kb + "hasState");
    e.base = string_value(n, kb + "hasBase");
    e.unit = optional_string_value(n, kb + "hasUnit");
    long long members = integer_value(n, kb + "memberCount");
    if (members < 0) throw IntegrityError("negative member count for " + display(subject));
    e.member_count = static_cast<std::size_t>(members);
    e.curated = boolean_value(n, kb + "curated");
    for (PersonalValue v : kAllValues) {
      std::string prop = kb + assoc_property(v);
      if (!e.curated) {
        if (n.props.count(prop)) {
          throw IntegrityError(display(subject) + " is not curated but has " + display(prop));
        }
        continue;
      }
      long long a = integer_value(n, prop);
      if (a < -1 || a > 1) throw IntegrityError("association out of range on " + display(subject));
      e.associations[v] = static_cast<int>(a);
    }
    for (const auto& effect : iri_values(n, kb + "causes")) {
      declared_causes.emplace(e.id, effect);
    }
    out.add_entity(std::move(e));
  }

  std::set<std::pair<std::string, std::string>> linked;
  std::set<std::string> used_evidence;
  for (const Node* link : links) {
    std::string cause = local_id(*single(*link, kb + "hasCause", true));
    std::string effect = local_id(*single(*link, kb + "hasEffect", true));
    if (!linked.emplace(cause, effect).second) {
      throw IntegrityError("two causal links for " + cause + " -> " + effect);
    }
    std::vector<std::pair<long long, EvidenceRef>> evidence;
    auto ev_it = link->props.find(kb + "hasEvidence");
    if (ev_it == link->props.end() || ev_it->second.empty()) {
      throw IntegrityError(display(link->iri) + " has no evidence");
    }
    for (const auto& term : ev_it->second) {
      auto node = evidence_nodes.find(term.value);
      if (term.kind != RdfTerm::Kind::kIri || node == evidence_nodes.end()) {
        throw IntegrityError(display(link->iri) + " references unknown evidence " +
                             display(term.value));
      }
      if (!used_evidence.insert(term.value).second) {
        throw IntegrityError("evidence " + display(term.value) + " used twice");
      }
      const Node& ev = *node->second;
      long long index = integer_value(ev, kb + "sentenceIndex");
      if (index < 0) throw IntegrityError("negative sentence index on " + display(ev.iri));
      evidence.emplace_back(integer_value(ev, kb + "evidenceOrdinal"),
                            EvidenceRef{string_value(ev, kb + "sourceArticle"),
                                        static_cast<std::size_t>(index),
                                        string_value(ev, kb + "sentenceText")});
    }
    std::sort(evidence.begin(), evidence.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    for (std::size_t i = 0; i < evidence.size(); ++i) {
      if (evidence[i].first != static_cast<long long>(i + 1)) {
        throw IntegrityError(display(link->iri) + " evidence ordinals are not 1.." +
                             std::to_string(evidence.size()));
      }
      out.upsert_edge(cause, effect, std::move(evidence[i].second));
    }
  }
  if (used_evidence.size() != evidence_nodes.size()) {
    throw IntegrityError("evidence individual not attached to any causal link");
  }
  if (declared_causes != linked) {
    throw IntegrityError(":causes assertions do not match the causal links");
  }
  out.check_integrity();
  return out;
}

}  // namespace climatekb
