#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "climatekb/error.hpp"

namespace climatekb {

// The ten Schwartz basic values, in canonical order.
enum class PersonalValue : std::uint8_t {
  kConformity,
  kTradition,
  kBenevolence,
  kUniversalism,
  kSelfDirection,
  kStimulation,
  kHedonism,
  kAchievement,
  kPower,
  kSecurity,
};

inline constexpr std::size_t kValueCount = 10;

inline constexpr std::array<PersonalValue, kValueCount> kAllValues = {
    PersonalValue::kConformity,    PersonalValue::kTradition,
    PersonalValue::kBenevolence,   PersonalValue::kUniversalism,
    PersonalValue::kSelfDirection, PersonalValue::kStimulation,
    PersonalValue::kHedonism,      PersonalValue::kAchievement,
    PersonalValue::kPower,         PersonalValue::kSecurity,
};

// snake_case wire name, e.g. "self_direction".
std::string_view to_string(PersonalValue v);
std::optional<PersonalValue> parse_personal_value(std::string_view name);

// Fixed-size array indexed by PersonalValue.
template <typename T>
class ValueArray {
 public:
  constexpr ValueArray() : data_{} {}
  explicit constexpr ValueArray(const std::array<T, kValueCount>& data)
      : data_(data) {}

  constexpr T& operator[](PersonalValue v) {
    return data_[static_cast<std::size_t>(v)];
  }
  constexpr const T& operator[](PersonalValue v) const {
    return data_[static_cast<std::size_t>(v)];
  }
  const std::array<T, kValueCount>& raw() const { return data_; }

  bool operator==(const ValueArray&) const = default;

 private:
  std::array<T, kValueCount> data_;
};

// Expert association per value: -1 negative, 0 neutral, +1 positive.
using AssociationScores = ValueArray<int>;

inline constexpr int kLikertMin = 1;
inline constexpr int kLikertMax = 6;

inline constexpr std::array<std::string_view, 6> kLikertLabels = {
    "strongly disagree", "disagree", "slightly disagree",
    "slightly agree",    "agree",    "strongly agree",
};

// raw holds the 1..6 Likert answers; u = (raw - 1) / 5 lies in [0, 1].
struct ValueProfile {
  ValueArray<int> raw;
  ValueArray<double> u;

  bool operator==(const ValueProfile&) const = default;
};

double likert_weight(int answer);

class MissingAnswerError : public ValidationError {
 public:
  explicit MissingAnswerError(PersonalValue v)
      : ValidationError("missing answer for '" + std::string(to_string(v)) + "'"),
        value_(v) {}
  PersonalValue value() const { return value_; }

 private:
  PersonalValue value_;
};

class InvalidAnswerError : public ValidationError {
 public:
  InvalidAnswerError(std::string field, const std::string& what)
      : ValidationError(what), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

// Per-field problems with a set of answers keyed by value name.
struct AnswerCheck {
  std::vector<PersonalValue> missing;
  std::map<std::string, std::string> invalid;  // field -> message

  bool ok() const { return missing.empty() && invalid.empty(); }
};

AnswerCheck check_answers(const std::map<std::string, int>& answers);

// Throws InvalidAnswerError for unknown names or out-of-range answers, then
// MissingAnswerError for the first missing value.
ValueProfile profile_from_answers(const std::map<std::string, int>& answers);
ValueProfile profile_from_answers(const std::map<PersonalValue, int>& answers);

struct QuestionnaireItem {
  int id = 0;
  PersonalValue value = PersonalValue::kConformity;
  std::string statement;

  bool operator==(const QuestionnaireItem&) const = default;
};

// Loads the JSONL {id, value, statement} questionnaire file and returns the
// items in canonical value order. Throws unless ids are 1..10 and items map
// one-to-one onto the values.
std::vector<QuestionnaireItem> load_questionnaire(const std::filesystem::path& path);

}  // namespace climatekb
