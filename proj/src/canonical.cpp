#include "climatekb/canonical.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>
#include <unordered_map>

#include "climatekb/text.hpp"

namespace climatekb {

PluralRules PluralRules::load(const std::filesystem::path& rules_path,
                              const std::filesystem::path& exceptions_path) {
  PluralRules rules;
  DataFile r = read_data_file(rules_path, 1, 2);
  rules.rules_version_ = r.version;
  for (auto& row : r.rows) {
    rules.add_rule(row.fields[0], row.fields.size() > 1 ? row.fields[1] : "");
  }
  DataFile e = read_data_file(exceptions_path, 2, 2);
  rules.exceptions_version_ = e.version;
  for (auto& row : e.rows) rules.add_exception(row.fields[0], row.fields[1]);
  for (const auto& [plural, singular] : rules.exceptions_) {
    if (rules.singularize(singular) != singular) {
      throw ValidationError(exceptions_path.string() + ": singular '" + singular +
                            "' is not a fixed point of the plural rules");
    }
  }
  return rules;
}

void PluralRules::add_rule(std::string suffix, std::string replacement) {
  rules_.push_back({text::to_lower(suffix), text::to_lower(replacement)});
}

void PluralRules::add_exception(std::string plural, std::string singular) {
  exceptions_[text::to_lower(plural)] = text::to_lower(singular);
}

std::string PluralRules::singularize(std::string_view word) const {
  if (auto it = exceptions_.find(word); it != exceptions_.end()) return it->second;
  // Irregular singulars are fixed points.
  for (const auto& [plural, singular] : exceptions_) {
    if (singular == word) return std::string(word);
  }
  for (const auto& rule : rules_) {
    if (word.size() < rule.suffix.size()) continue;
    if (word.substr(word.size() - rule.suffix.size()) != rule.suffix) continue;
    std::size_t stem = word.size() - rule.suffix.size();
    if (stem + rule.replacement.size() < 3) continue;
    return std::string(word.substr(0, stem)) + rule.replacement;
  }
  return std::string(word);
}

std::string PluralRules::version() const {
  return rules_version_ + "+" + exceptions_version_;
}

Normalizer::Normalizer(WordList stopwords, PluralRules plurals)
    : stopwords_(std::move(stopwords)), plurals_(std::move(plurals)) {}

void Normalizer::append_tokens(std::string_view s, std::vector<std::string>& out) const {
  for (const auto& tok : text::tokenize(s)) {
    std::string word;
    for (char c : tok.lower) {
      if (c != '\'') word.push_back(c);
    }
    if (word.empty() || stopwords_.contains(word)) continue;
    std::string singular = plurals_.singularize(word);
    if (stopwords_.contains(singular)) continue;
    out.push_back(std::move(singular));
  }
}

CanonicalKey Normalizer::normalize(const Mention& mention) const {
  std::vector<std::string> tokens;
  if (mention.state) append_tokens(*mention.state, tokens);
  append_tokens(mention.base, tokens);
  if (mention.unit) append_tokens(*mention.unit, tokens);
  return CanonicalKey(text::join(tokens, " "));
}

CanonicalKey Normalizer::normalize_text(std::string_view s) const {
  std::vector<std::string> tokens;
  append_tokens(s, tokens);
  return CanonicalKey(text::join(tokens, " "));
}

SynonymTable SynonymTable::load(const std::filesystem::path& path,
                                const Normalizer& normalizer) {
  DataFile file = read_data_file(path, 2, 2);
  SynonymTable table;
  table.version_ = file.version;
  for (auto& row : file.rows) {
    table.add(normalizer.normalize_text(row.fields[0]),
              normalizer.normalize_text(row.fields[1]));
  }
  return table;
}

void SynonymTable::add(CanonicalKey a, CanonicalKey b) {
  edges_.emplace_back(std::move(a), std::move(b));
}

std::string entity_id_for_ordinal(std::size_t ordinal) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "e%04zu", ordinal);
  return buf;
}

namespace {

class DisjointSets {
 public:
  std::size_t add() {
    parent_.push_back(parent_.size());
    rank_.push_back(0);
    return parent_.size() - 1;
  }

  std::size_t find(std::size_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }

  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (rank_[a] < rank_[b]) std::swap(a, b);
    parent_[b] = a;
    if (rank_[a] == rank_[b]) ++rank_[a];
  }

 private:
  std::vector<std::size_t> parent_;
  std::vector<std::size_t> rank_;
};

}  // namespace

namespace {

const std::string& label_text(const Mention& m) {
  return m.surface.empty() ? m.raw_text : m.surface;
}

}  // namespace

Clustering cluster(std::span<const Mention> mentions, const SynonymTable& synonyms,
                   const Normalizer& normalizer) {
  DisjointSets sets;
  std::unordered_map<std::string, std::size_t> key_node;
  auto node_for = [&](const CanonicalKey& key) {
    auto [it, inserted] = key_node.emplace(key.str(), 0);
    if (inserted) it->second = sets.add();
    return it->second;
  };

  std::vector<CanonicalKey> keys;
  std::vector<std::size_t> nodes;
  keys.reserve(mentions.size());
  for (const auto& m : mentions) {
    keys.push_back(normalizer.normalize(m));
    nodes.push_back(node_for(keys.back()));
  }
  for (const auto& [a, b] : synonyms.edges()) {
    if (a == b) continue;
    sets.unite(node_for(a), node_for(b));
  }

  Clustering out;
  out.entity_of_mention.resize(mentions.size());
  std::unordered_map<std::size_t, std::size_t> entity_of_root;
  std::vector<std::vector<std::size_t>> members;
  for (std::size_t i = 0; i < mentions.size(); ++i) {
    std::size_t root = sets.find(nodes[i]);
    auto [it, inserted] = entity_of_root.emplace(root, out.entities.size());
    if (inserted) {
      CanonicalEntity e;
      e.id = entity_id_for_ordinal(out.entities.size() + 1);
      e.key = keys[i];
      out.entities.push_back(std::move(e));
      members.emplace_back();
    }
    out.entity_of_mention[i] = it->second;
    members[it->second].push_back(i);
  }

  for (std::size_t e = 0; e < out.entities.size(); ++e) {
    CanonicalEntity& entity = out.entities[e];
    std::map<std::string, std::size_t> surface_counts;
    for (std::size_t i : members[e]) {
      const Mention& m = mentions[i];
      ++surface_counts[label_text(m)];
      entity.members.push_back(
          {m.provenance.article_id, m.provenance.sentence_index, m.role});
    }
    entity.member_count = entity.members.size();
    // std::map iterates lexicographically, so the first maximum wins ties.
    std::size_t best = 0;
    for (const auto& [surface, count] : surface_counts) {
      if (count > best) {
        best = count;
        entity.label = surface;
      }
    }
    for (std::size_t i : members[e]) {
      if (label_text(mentions[i]) == entity.label) {
        entity.state = mentions[i].state;
        entity.base = mentions[i].base;
        entity.unit = mentions[i].unit;
        break;
      }
    }
  }
  return out;
}

}  // namespace climatekb
