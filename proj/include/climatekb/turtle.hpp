#pragma once

#include <compare>
#include <string>
#include <string_view>
#include <vector>

#include "climatekb/error.hpp"

namespace climatekb {

class KnowledgeBase;

inline constexpr std::string_view kKbNamespace = "https://climatekb.example/kb#";
inline constexpr std::string_view kOntologyIri = "https://climatekb.example/kb";

// Deterministic OWL/Turtle rendering: prefix block, ontology header, then
// concepts sorted by id and causal links sorted by (cause, effect), each link
// followed by its evidence individuals.
std::string export_turtle(const KnowledgeBase& kb);

// Reads a document in the export grammar. Throws ParseError (line/column) on
// syntax errors, UnknownTermError for predicates or classes outside the
// vocabulary, and IntegrityError for inconsistent graphs.
KnowledgeBase import_turtle(std::string_view document);

class UnknownTermError : public ValidationError {
 public:
  explicit UnknownTermError(std::string term, const std::string& what)
      : ValidationError(what), term_(std::move(term)) {}
  const std::string& term() const { return term_; }

 private:
  std::string term_;
};

// RDF term with IRIs fully expanded.
struct RdfTerm {
  enum class Kind { kIri, kLiteral };
  Kind kind = Kind::kIri;
  std::string value;
  std::string datatype;  // full IRI; empty for plain strings
  std::string language;

  auto operator<=>(const RdfTerm&) const = default;
};

struct Triple {
  RdfTerm subject;
  RdfTerm predicate;
  RdfTerm object;

  auto operator<=>(const Triple&) const = default;
};

// Parses the supported Turtle subset (@prefix/PREFIX, IRIs, prefixed names,
// "a", string literals with escapes, language tags, datatypes, integers,
// booleans, ';' and ',' lists). Blank nodes and collections are rejected.
std::vector<Triple> parse_turtle(std::string_view document);

// Turtle string escaping used by the exporter.
std::string escape_turtle_string(std::string_view s);

}  // namespace climatekb
