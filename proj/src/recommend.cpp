#include "climatekb/recommend.hpp"

#include <algorithm>

namespace climatekb {

WeightVector exact_weights(const ValueProfile& profile) {
  WeightVector w;
  for (PersonalValue v : kAllValues) {
    w[v] = Rational(profile.raw[v] - kLikertMin, kLikertMax - kLikertMin);
  }
  return w;
}

WeightVector exact_weights(const ValueArray<double>& u) {
  WeightVector w;
  for (PersonalValue v : kAllValues) {
    if (!(u[v] >= 0.0)) throw ValidationError("value weights must be non-negative");
    w[v] = Rational(u[v]);
  }
  return w;
}

Rational exact_relevance(const WeightVector& weights, const CanonicalEntity& entity) {
  Rational sum = 0;
  for (PersonalValue v : kAllValues) {
    int a = entity.associations[v];
    if (a != 0) sum += weights[v] * a;
  }
  return sum;
}

double score_entity(const ValueProfile& profile, const CanonicalEntity& entity) {
  return exact_relevance(exact_weights(profile), entity).convert_to<double>();
}

double score_entity(const ValueArray<double>& u, const CanonicalEntity& entity) {
  return exact_relevance(exact_weights(u), entity).convert_to<double>();
}

std::string evidence_snippet(const KnowledgeBase& kb, const std::string& entity_id) {
  const CausalEdge* best = nullptr;
  for (const auto& e : kb.edges()) {
    if (e.cause_id != entity_id && e.effect_id != entity_id) continue;
    if (!best || e.count() > best->count()) best = &e;
  }
  return best ? best->evidence.front().text : std::string();
}

std::vector<Recommendation> rank_entities(const WeightVector& weights,
                                          const KnowledgeBase& kb,
                                          const RankOptions& options) {
  if (options.limit == 0) throw ValidationError("limit must be at least 1");
  struct Scored {
    const CanonicalEntity* entity;
    Rational relevance;
    std::size_t evidence;
  };
  std::vector<Scored> scored;
  for (const auto& e : kb.entities()) {
    if (options.exclude_uncurated && !e.curated) continue;
    scored.push_back({&e, exact_relevance(weights, e), kb.evidence_count(e.id)});
  }
  std::sort(scored.begin(), scored.end(), [](const Scored& a, const Scored& b) {
    if (a.relevance != b.relevance) return a.relevance > b.relevance;
    if (a.evidence != b.evidence) return a.evidence > b.evidence;
    return a.entity->id < b.entity->id;
  });
  std::size_t n = std::min(options.limit, scored.size());
  std::vector<Recommendation> feed;
  feed.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& s = scored[i];
    feed.push_back({s.entity->id, s.entity->label, s.relevance.convert_to<double>(), i + 1,
                    evidence_snippet(kb, s.entity->id)});
  }
  return feed;
}

std::vector<Recommendation> rank_entities(const ValueProfile& profile,
                                          const KnowledgeBase& kb,
                                          const RankOptions& options) {
  return rank_entities(exact_weights(profile), kb, options);
}

}  // namespace climatekb
