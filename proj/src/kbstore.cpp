#include "climatekb/kbstore.hpp"

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <set>

#include "climatekb/text.hpp"
#include "climatekb/turtle.hpp"

namespace climatekb {

using nlohmann::json;
using nlohmann::ordered_json;

bool is_valid_entity_id(std::string_view id) {
  if (id.empty()) return false;
  char first = id.front();
  if (!((first >= 'a' && first <= 'z') || (first >= 'A' && first <= 'Z'))) return false;
  return std::all_of(id.begin(), id.end(), [](char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
           (c >= '0' && c <= '9') || c == '-';
  });
}

void KnowledgeBase::add_entity(CanonicalEntity entity) {
  if (!is_valid_entity_id(entity.id)) {
    throw IntegrityError("invalid entity id '" + entity.id + "'");
  }
  auto pos = std::lower_bound(
      entities_.begin(), entities_.end(), entity.id,
      [](const CanonicalEntity& e, const std::string& id) { return e.id < id; });
  if (pos != entities_.end() && pos->id == entity.id) {
    throw IntegrityError("duplicate entity id '" + entity.id + "'");
  }
  if (id_by_key_.count(entity.key.str())) {
    throw IntegrityError("duplicate entity key '" + entity.key.str() + "'");
  }
  for (int a : entity.associations.raw()) {
    if (a < -1 || a > 1) {
      throw IntegrityError("association score out of range for '" + entity.id + "'");
    }
  }
  id_by_key_.emplace(entity.key.str(), entity.id);
  entities_.insert(pos, std::move(entity));
}

const CanonicalEntity* KnowledgeBase::find_entity(std::string_view id) const {
  auto pos = std::lower_bound(
      entities_.begin(), entities_.end(), id,
      [](const CanonicalEntity& e, std::string_view k) { return e.id < k; });
  if (pos == entities_.end() || pos->id != id) return nullptr;
  return &*pos;
}

const CanonicalEntity* KnowledgeBase::find_by_key(std::string_view key) const {
  auto it = id_by_key_.find(key);
  return it == id_by_key_.end() ? nullptr : find_entity(it->second);
}

void KnowledgeBase::upsert_edge(std::string_view cause_id, std::string_view effect_id,
                                EvidenceRef evidence) {
  if (!find_entity(cause_id)) {
    throw IntegrityError("unknown cause entity '" + std::string(cause_id) + "'");
  }
  if (!find_entity(effect_id)) {
    throw IntegrityError("unknown effect entity '" + std::string(effect_id) + "'");
  }
  if (cause_id == effect_id) {
    throw IntegrityError("self-causation rejected for '" + std::string(cause_id) + "'");
  }
  auto key = std::make_pair(cause_id, effect_id);
  auto pos = std::lower_bound(edges_.begin(), edges_.end(), key,
                              [](const CausalEdge& e, const auto& k) {
                                return std::make_pair(std::string_view(e.cause_id),
                                                      std::string_view(e.effect_id)) < k;
                              });
  if (pos != edges_.end() && pos->cause_id == cause_id && pos->effect_id == effect_id) {
    pos->evidence.push_back(std::move(evidence));
    return;
  }
  CausalEdge edge;
  edge.cause_id = std::string(cause_id);
  edge.effect_id = std::string(effect_id);
  edge.evidence.push_back(std::move(evidence));
  edges_.insert(pos, std::move(edge));
}

void KnowledgeBase::set_associations(std::string_view entity_id,
                                     const AssociationScores& scores) {
  auto pos = std::lower_bound(
      entities_.begin(), entities_.end(), entity_id,
      [](const CanonicalEntity& e, std::string_view k) { return e.id < k; });
  if (pos == entities_.end() || pos->id != entity_id) {
    throw IntegrityError("unknown entity '" + std::string(entity_id) + "'");
  }
  for (int a : scores.raw()) {
    if (a < -1 || a > 1) throw IntegrityError("association score out of range");
  }
  pos->associations = scores;
  pos->curated = true;
}

std::vector<const CausalEdge*> KnowledgeBase::outgoing(std::string_view id) const {
  std::vector<const CausalEdge*> out;
  for (const auto& e : edges_) {
    if (e.cause_id == id) out.push_back(&e);
  }
  return out;
}

std::vector<const CausalEdge*> KnowledgeBase::incoming(std::string_view id) const {
  std::vector<const CausalEdge*> out;
  for (const auto& e : edges_) {
    if (e.effect_id == id) out.push_back(&e);
  }
  return out;
}

std::size_t KnowledgeBase::evidence_count(std::string_view id) const {
  std::size_t n = 0;
  for (const auto& e : edges_) {
    if (e.cause_id == id || e.effect_id == id) n += e.count();
  }
  return n;
}

void KnowledgeBase::check_integrity() const {
  std::set<std::string> keys;
  for (std::size_t i = 0; i < entities_.size(); ++i) {
    const auto& e = entities_[i];
    if (i > 0 && !(entities_[i - 1].id < e.id)) {
      throw IntegrityError("entities not strictly sorted at '" + e.id + "'");
    }
    if (!keys.insert(e.key.str()).second) {
      throw IntegrityError("duplicate entity key '" + e.key.str() + "'");
    }
    if (!e.members.empty() && e.members.size() != e.member_count) {
      throw IntegrityError("member count mismatch for '" + e.id + "'");
    }
    for (int a : e.associations.raw()) {
      if (a < -1 || a > 1) throw IntegrityError("association out of range for '" + e.id + "'");
    }
    if (!e.curated &&
        std::any_of(e.associations.raw().begin(), e.associations.raw().end(),
                    [](int a) { return a != 0; })) {
      throw IntegrityError("uncurated entity '" + e.id + "' carries associations");
    }
  }
  for (std::size_t i = 0; i < edges_.size(); ++i) {
    const auto& e = edges_[i];
    if (!find_entity(e.cause_id) || !find_entity(e.effect_id)) {
      throw IntegrityError("edge " + e.cause_id + " -> " + e.effect_id +
                           " references an unknown entity");
    }
    if (e.cause_id == e.effect_id) throw IntegrityError("self-loop on '" + e.cause_id + "'");
    if (e.evidence.empty()) {
      throw IntegrityError("edge " + e.cause_id + " -> " + e.effect_id + " has no evidence");
    }
    if (i > 0 && !(std::tie(edges_[i - 1].cause_id, edges_[i - 1].effect_id) <
                   std::tie(e.cause_id, e.effect_id))) {
      throw IntegrityError("edges not strictly sorted at " + e.cause_id + " -> " + e.effect_id);
    }
  }
}

bool KnowledgeBase::equivalent(const KnowledgeBase& other) const {
  if (entities_.size() != other.entities_.size() || edges_ != other.edges_) return false;
  for (std::size_t i = 0; i < entities_.size(); ++i) {
    const auto& a = entities_[i];
    const auto& b = other.entities_[i];
    if (a.id != b.id || a.label != b.label || a.key != b.key || a.state != b.state ||
        a.base != b.base || a.unit != b.unit || a.member_count != b.member_count ||
        a.associations != b.associations || a.curated != b.curated) {
      return false;
    }
  }
  return true;
}

KnowledgeBase load_associations_text(const KnowledgeBase& kb, std::string_view contents,
                                     const std::string& name) {
  DataFile file = parse_data_file(contents, name, 3, 3);
  std::vector<std::string> unknown;
  std::map<std::string, AssociationScores> updates;
  for (const auto& row : file.rows) {
    std::string where = name + " row at line " + std::to_string(row.line);
    auto value = parse_personal_value(row.fields[1]);
    if (!value) {
      throw ValidationError(where + ": unknown personal value '" + row.fields[1] + "'");
    }
    const std::string& s = row.fields[2];
    int score;
    if (s == "1" || s == "+1") score = 1;
    else if (s == "0") score = 0;
    else if (s == "-1") score = -1;
    else throw ValidationError(where + ": score '" + s + "' is not one of -1, 0, +1");

    std::string lowered = text::to_lower(row.fields[0]);
    std::vector<std::string> parts;
    for (auto p : text::split(lowered, ' ')) {
      if (!p.empty()) parts.emplace_back(p);
    }
    std::string key = text::join(parts, " ");
    const CanonicalEntity* entity = kb.find_by_key(key);
    if (!entity) {
      if (std::find(unknown.begin(), unknown.end(), key) == unknown.end()) {
        unknown.push_back(key);
      }
      continue;
    }
    auto [it, inserted] = updates.emplace(entity->id, AssociationScores{});
    it->second[*value] = score;
  }
  if (!unknown.empty()) {
    std::string msg = name + ": unknown entity keys:";
    for (const auto& k : unknown) msg += " '" + k + "'";
    throw ValidationError(msg);
  }
  KnowledgeBase out = kb;
  for (const auto& [id, scores] : updates) out.set_associations(id, scores);
  out.check_integrity();
  return out;
}

KnowledgeBase load_associations(const KnowledgeBase& kb,
                                const std::filesystem::path& path) {
  return load_associations_text(kb, text::read_file(path), path.string());
}

namespace {

ordered_json optional_string(const std::optional<std::string>& s) {
  return s ? ordered_json(*s) : ordered_json(nullptr);
}

ordered_json associations_json(const AssociationScores& a) {
  ordered_json obj = ordered_json::object();
  for (PersonalValue v : kAllValues) obj[std::string(to_string(v))] = a[v];
  return obj;
}

std::string dump(const ordered_json& j) {
  return j.dump(-1, ' ', false, json::error_handler_t::strict);
}

}  // namespace

std::string write_snapshot_jsonl(const KnowledgeBase& kb) {
  std::string out;
  ordered_json meta;
  meta["type"] = "metadata";
  meta["corpus_hash"] = kb.metadata().corpus_hash;
  meta["lexicon_versions"] = kb.metadata().lexicon_versions;
  meta["build_timestamp"] = kb.metadata().build_timestamp;
  out += dump(meta) + "\n";
  for (const auto& e : kb.entities()) {
    ordered_json j;
    j["type"] = "entity";
    j["id"] = e.id;
    j["label"] = e.label;
    j["key"] = e.key.str();
    j["state"] = optional_string(e.state);
    j["base"] = e.base;
    j["unit"] = optional_string(e.unit);
    j["member_count"] = e.member_count;
    ordered_json members = ordered_json::array();
    for (const auto& m : e.members) {
      members.push_back(ordered_json{{"article_id", m.article_id},
                                     {"sentence_index", m.sentence_index},
                                     {"role", to_string(m.role)}});
    }
    j["members"] = std::move(members);
    j["curated"] = e.curated;
    j["associations"] = associations_json(e.associations);
    out += dump(j) + "\n";
  }
  for (const auto& e : kb.edges()) {
    ordered_json j;
    j["type"] = "edge";
    j["cause_id"] = e.cause_id;
    j["effect_id"] = e.effect_id;
    j["count"] = e.count();
    ordered_json evidence = ordered_json::array();
    for (const auto& ev : e.evidence) {
      evidence.push_back(ordered_json{{"article_id", ev.article_id},
                                      {"sentence_index", ev.sentence_index},
                                      {"text", ev.text}});
    }
    j["evidence"] = std::move(evidence);
    out += dump(j) + "\n";
  }
  return out;
}

KnowledgeBase read_snapshot_jsonl(std::string_view contents) {
  KnowledgeBase kb;
  std::size_t line_no = 0;
  try {
    for (std::string_view line : text::split(contents, '\n')) {
      ++line_no;
      if (text::trim(line).empty()) continue;
      json j = json::parse(line);
      std::string type = j.at("type").get<std::string>();
      if (type == "metadata") {
        BuildMetadata meta;
        meta.corpus_hash = j.at("corpus_hash").get<std::string>();
        meta.lexicon_versions =
            j.at("lexicon_versions").get<std::map<std::string, std::string>>();
        meta.build_timestamp = j.at("build_timestamp").get<std::string>();
        kb.set_metadata(std::move(meta));
      } else if (type == "entity") {
        CanonicalEntity e;
        e.id = j.at("id").get<std::string>();
        e.label = j.at("label").get<std::string>();
        e.key = CanonicalKey(j.at("key").get<std::string>());
        if (!j.at("state").is_null()) e.state = j["state"].get<std::string>();
        e.base = j.at("base").get<std::string>();
        if (!j.at("unit").is_null()) e.unit = j["unit"].get<std::string>();
        e.member_count = j.at("member_count").get<std::size_t>();
        for (const auto& m : j.at("members")) {
          e.members.push_back({m.at("article_id").get<std::string>(),
                               m.at("sentence_index").get<std::size_t>(),
                               parse_role(m.at("role").get<std::string>())});
        }
        e.curated = j.at("curated").get<bool>();
        for (PersonalValue v : kAllValues) {
          e.associations[v] = j.at("associations").at(std::string(to_string(v))).get<int>();
        }
        kb.add_entity(std::move(e));
      } else if (type == "edge") {
        std::string cause = j.at("cause_id").get<std::string>();
        std::string effect = j.at("effect_id").get<std::string>();
        const auto& evidence = j.at("evidence");
        if (evidence.empty() || j.at("count").get<std::size_t>() != evidence.size()) {
          throw ValidationError("edge count does not match its evidence");
        }
        for (const auto& ev : evidence) {
          kb.upsert_edge(cause, effect,
                         {ev.at("article_id").get<std::string>(),
                          ev.at("sentence_index").get<std::size_t>(),
                          ev.at("text").get<std::string>()});
        }
      } else {
        throw ValidationError("unknown record type '" + type + "'");
      }
    }
  } catch (const json::exception& e) {
    throw ValidationError("snapshot line " + std::to_string(line_no) + ": " + e.what());
  } catch (const IntegrityError& e) {
    throw IntegrityError("snapshot line " + std::to_string(line_no) + ": " + e.what());
  } catch (const ValidationError& e) {
    throw ValidationError("snapshot line " + std::to_string(line_no) + ": " + e.what());
  }
  kb.check_integrity();
  return kb;
}

void save_snapshot(const KnowledgeBase& kb, const std::filesystem::path& path) {
  text::write_file(path, write_snapshot_jsonl(kb));
}

KnowledgeBase load_snapshot(const std::filesystem::path& path) {
  return read_snapshot_jsonl(text::read_file(path));
}

std::string entity_dump_jsonl(const KnowledgeBase& kb) {
  std::string out;
  for (const auto& e : kb.entities()) {
    ordered_json j;
    j["id"] = e.id;
    j["label"] = e.label;
    j["key"] = e.key.str();
    j["member_count"] = e.member_count;
    out += dump(j) + "\n";
  }
  return out;
}

std::string snapshot_hash(const KnowledgeBase& kb) {
  return text::sha256_hex(export_turtle(kb));
}

}  // namespace climatekb
