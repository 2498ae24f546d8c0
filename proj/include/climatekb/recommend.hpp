#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cstddef>
#include <string>
#include <vector>

#include "climatekb/canonical.hpp"
#include "climatekb/kbstore.hpp"
#include "climatekb/values.hpp"

namespace climatekb {

// Exact rational arithmetic keeps ranking ties exact: Likert weights are
// multiples of 1/5, which doubles cannot represent.
using Rational = boost::multiprecision::cpp_rational;
using WeightVector = ValueArray<Rational>;

// (raw - 1) / 5 per value, exactly.
WeightVector exact_weights(const ValueProfile& profile);
// Exact conversion of arbitrary non-negative double weights.
WeightVector exact_weights(const ValueArray<double>& u);

// S_e = sum over the ten values of u_v * a_v^e.
Rational exact_relevance(const WeightVector& weights, const CanonicalEntity& entity);

// The relevance rounded once to double.
double score_entity(const ValueProfile& profile, const CanonicalEntity& entity);
double score_entity(const ValueArray<double>& u, const CanonicalEntity& entity);

struct Recommendation {
  std::string entity_id;
  std::string label;
  double relevance = 0.0;
  std::size_t rank = 0;  // 1-based
  std::string evidence_snippet;

  bool operator==(const Recommendation&) const = default;
};

struct RankOptions {
  std::size_t limit = 20;
  bool exclude_uncurated = false;
};

// Relevance descending, then total evidence count descending, then id
// ascending. An empty KB yields an empty feed.
std::vector<Recommendation> rank_entities(const WeightVector& weights,
                                          const KnowledgeBase& kb,
                                          const RankOptions& options);
std::vector<Recommendation> rank_entities(const ValueProfile& profile,
                                          const KnowledgeBase& kb,
                                          const RankOptions& options);

// First evidence sentence of the entity's highest-count edge; empty when the
// entity has no edges.
std::string evidence_snippet(const KnowledgeBase& kb, const std::string& entity_id);

}  // namespace climatekb
