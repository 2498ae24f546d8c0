#include "climatekb/values.hpp"

#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <set>

#include "climatekb/text.hpp"

namespace climatekb {

namespace {
constexpr std::array<std::string_view, kValueCount> kValueNames = {
    "conformity",  "tradition",  "benevolence", "universalism", "self_direction",
    "stimulation", "hedonism",   "achievement", "power",        "security",
};
}  // namespace

std::string_view to_string(PersonalValue v) {
  return kValueNames[static_cast<std::size_t>(v)];
}

std::optional<PersonalValue> parse_personal_value(std::string_view name) {
  for (std::size_t i = 0; i < kValueCount; ++i) {
    if (kValueNames[i] == name) return kAllValues[i];
  }
  return std::nullopt;
}

double likert_weight(int answer) {
  if (answer < kLikertMin || answer > kLikertMax) {
    throw ValidationError("answer " + std::to_string(answer) + " is outside 1..6");
  }
  return static_cast<double>(answer - kLikertMin) / (kLikertMax - kLikertMin);
}

AnswerCheck check_answers(const std::map<std::string, int>& answers) {
  AnswerCheck check;
  for (const auto& [name, answer] : answers) {
    if (!parse_personal_value(name)) {
      check.invalid[name] = "unknown personal value '" + name + "'";
    } else if (answer < kLikertMin || answer > kLikertMax) {
      check.invalid[name] = "answer " + std::to_string(answer) + " for '" + name +
                            "' is outside 1..6";
    }
  }
  for (PersonalValue v : kAllValues) {
    if (!answers.count(std::string(to_string(v)))) check.missing.push_back(v);
  }
  return check;
}

ValueProfile profile_from_answers(const std::map<std::string, int>& answers) {
  AnswerCheck check = check_answers(answers);
  if (!check.invalid.empty()) {
    const auto& [field, message] = *check.invalid.begin();
    throw InvalidAnswerError(field, message);
  }
  if (!check.missing.empty()) throw MissingAnswerError(check.missing.front());
  ValueProfile p;
  for (PersonalValue v : kAllValues) {
    int a = answers.at(std::string(to_string(v)));
    p.raw[v] = a;
    p.u[v] = likert_weight(a);
  }
  return p;
}

ValueProfile profile_from_answers(const std::map<PersonalValue, int>& answers) {
  std::map<std::string, int> named;
  for (const auto& [v, a] : answers) named[std::string(to_string(v))] = a;
  return profile_from_answers(named);
}

std::vector<QuestionnaireItem> load_questionnaire(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open questionnaire " + path.string());
  std::vector<QuestionnaireItem> items;
  std::set<int> ids;
  std::set<PersonalValue> values;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    std::string where = path.string() + " line " + std::to_string(line_no);
    nlohmann::json obj;
    try {
      obj = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw ValidationError(where + ": invalid JSON: " + e.what());
    }
    if (!obj.is_object() || !obj.contains("id") || !obj["id"].is_number_integer() ||
        !obj.contains("value") || !obj["value"].is_string() ||
        !obj.contains("statement") || !obj["statement"].is_string()) {
      throw ValidationError(where + ": expected {id, value, statement}");
    }
    QuestionnaireItem item;
    item.id = obj["id"].get<int>();
    auto value = parse_personal_value(obj["value"].get<std::string>());
    if (!value) {
      throw ValidationError(where + ": unknown value '" +
                            obj["value"].get<std::string>() + "'");
    }
    item.value = *value;
    item.statement = obj["statement"].get<std::string>();
    if (item.id < 1 || item.id > static_cast<int>(kValueCount)) {
      throw ValidationError(where + ": item id must lie in 1..10");
    }
    if (!ids.insert(item.id).second) {
      throw ValidationError(where + ": duplicate item id " + std::to_string(item.id));
    }
    if (!values.insert(item.value).second) {
      throw ValidationError(where + ": second item for value '" +
                            std::string(to_string(item.value)) + "'");
    }
    if (text::trim(item.statement).empty()) {
      throw ValidationError(where + ": empty statement");
    }
    items.push_back(std::move(item));
  }
  if (items.size() != kValueCount) {
    throw ValidationError(path.string() + ": expected 10 items, found " +
                          std::to_string(items.size()));
  }
  std::sort(items.begin(), items.end(), [](const auto& a, const auto& b) {
    return a.value < b.value;
  });
  return items;
}

}  // namespace climatekb
