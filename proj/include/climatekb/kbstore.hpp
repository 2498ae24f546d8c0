#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "climatekb/canonical.hpp"
#include "climatekb/error.hpp"

namespace climatekb {

class IntegrityError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

struct EvidenceRef {
  std::string article_id;
  std::size_t sentence_index = 0;
  std::string text;

  bool operator==(const EvidenceRef&) const = default;
};

struct CausalEdge {
  std::string cause_id;
  std::string effect_id;
  std::vector<EvidenceRef> evidence;  // in observation order

  std::size_t count() const { return evidence.size(); }
  bool operator==(const CausalEdge&) const = default;
};

struct BuildMetadata {
  std::string corpus_hash;
  std::map<std::string, std::string> lexicon_versions;
  std::string build_timestamp;

  bool operator==(const BuildMetadata&) const = default;
};

// The ClimateKB graph. Entities are kept sorted by id and edges by
// (cause_id, effect_id); every mutation re-checks referential integrity.
class KnowledgeBase {
 public:
  // Throws IntegrityError on a duplicate id or key, or an id that is not a
  // valid IRI fragment.
  void add_entity(CanonicalEntity entity);

  // Appends evidence to the (cause, effect) edge, creating it with count 1
  // if needed. Throws IntegrityError for unknown ids or a self-loop.
  void upsert_edge(std::string_view cause_id, std::string_view effect_id,
                   EvidenceRef evidence);

  void set_associations(std::string_view entity_id, const AssociationScores& scores);

  const CanonicalEntity* find_entity(std::string_view id) const;
  const CanonicalEntity* find_by_key(std::string_view key) const;

  std::span<const CanonicalEntity> entities() const { return entities_; }
  std::span<const CausalEdge> edges() const { return edges_; }

  // Edges touching the entity, in edge order.
  std::vector<const CausalEdge*> outgoing(std::string_view id) const;
  std::vector<const CausalEdge*> incoming(std::string_view id) const;
  // Sum of evidence counts over all edges touching the entity.
  std::size_t evidence_count(std::string_view id) const;

  const BuildMetadata& metadata() const { return metadata_; }
  void set_metadata(BuildMetadata metadata) { metadata_ = std::move(metadata); }

  // Throws IntegrityError describing the first violated invariant.
  void check_integrity() const;

  // Graph equality: entities (members compared by count only), edges with
  // evidence, associations and curation flags. Metadata is ignored.
  bool equivalent(const KnowledgeBase& other) const;

 private:
  std::vector<CanonicalEntity> entities_;
  std::vector<CausalEdge> edges_;
  std::map<std::string, std::string, std::less<>> id_by_key_;
  BuildMetadata metadata_;
};

bool is_valid_entity_id(std::string_view id);

// Applies a tab-separated (entity_key, value_name, score) file. Entities named
// in the file are marked curated; on any error nothing is applied. Throws
// ValidationError listing every unknown key, or naming the row of an invalid
// value name or score.
KnowledgeBase load_associations(const KnowledgeBase& kb,
                                const std::filesystem::path& path);
KnowledgeBase load_associations_text(const KnowledgeBase& kb,
                                     std::string_view contents,
                                     const std::string& name);

// Native JSONL snapshot: a metadata line, then one line per entity and edge.
std::string write_snapshot_jsonl(const KnowledgeBase& kb);
KnowledgeBase read_snapshot_jsonl(std::string_view contents);
void save_snapshot(const KnowledgeBase& kb, const std::filesystem::path& path);
KnowledgeBase load_snapshot(const std::filesystem::path& path);

// Entity dump: JSONL {id, label, key, member_count}.
std::string entity_dump_jsonl(const KnowledgeBase& kb);

// Content hash of a snapshot (SHA-256 of its Turtle export).
std::string snapshot_hash(const KnowledgeBase& kb);

}  // namespace climatekb
