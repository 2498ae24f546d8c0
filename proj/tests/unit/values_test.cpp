#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "climatekb/pipeline.hpp"
#include "climatekb/values.hpp"
#include "test_support.hpp"

using namespace climatekb;

namespace {

std::map<std::string, int> all(int answer) {
  std::map<std::string, int> out;
  for (auto v : kAllValues) out[std::string(to_string(v))] = answer;
  return out;
}

}  // namespace

TEST(Profile, AllSixIsOne) {
  auto p = profile_from_answers(all(6));
  for (auto v : kAllValues) EXPECT_EQ(p.u[v], 1.0);
}

TEST(Profile, AllOneIsZero) {
  auto p = profile_from_answers(all(1));
  for (auto v : kAllValues) EXPECT_EQ(p.u[v], 0.0);
}

TEST(Profile, MixedAnswers) {
  auto a = all(4);
  a["power"] = 6;
  a["universalism"] = 2;
  auto p = profile_from_answers(a);
  EXPECT_EQ(p.u[PersonalValue::kPower], 1.0);
  EXPECT_EQ(p.u[PersonalValue::kUniversalism], 0.2);
  EXPECT_EQ(p.u[PersonalValue::kSecurity], 0.6);
  EXPECT_EQ(p.raw[PersonalValue::kUniversalism], 2);
}

TEST(Profile, LikertWeights) {
  const double expected[] = {0.0, 0.2, 0.4, 0.6, 0.8, 1.0};
  for (int r = 1; r <= 6; ++r) EXPECT_EQ(likert_weight(r), expected[r - 1]);
  EXPECT_THROW(likert_weight(0), ValidationError);
  EXPECT_THROW(likert_weight(7), ValidationError);
}

TEST(Profile, MissingValueNamed) {
  auto a = all(3);
  a.erase("hedonism");
  try {
    profile_from_answers(a);
    FAIL();
  } catch (const MissingAnswerError& e) {
    EXPECT_EQ(e.value(), PersonalValue::kHedonism);
    EXPECT_NE(std::string(e.what()).find("hedonism"), std::string::npos);
  }
}

TEST(Profile, OutOfRangeNamesValueAndAnswer) {
  auto a = all(3);
  a["power"] = 7;
  try {
    profile_from_answers(a);
    FAIL();
  } catch (const InvalidAnswerError& e) {
    EXPECT_EQ(e.field(), "power");
    EXPECT_NE(std::string(e.what()).find("7"), std::string::npos);
  }
}

TEST(Profile, UnknownValueRejected) {
  auto a = all(3);
  a["greed"] = 3;
  EXPECT_THROW(profile_from_answers(a), InvalidAnswerError);
  auto check = check_answers(a);
  EXPECT_EQ(check.invalid.count("greed"), 1u);
}

TEST(ProfileProperty, StrictlyIncreasingAndAffine) {
  for (auto v : kAllValues) {
    for (int r = 1; r < 6; ++r) {
      auto lo = all(3);
      auto hi = all(3);
      lo[std::string(to_string(v))] = r;
      hi[std::string(to_string(v))] = r + 1;
      EXPECT_LT(profile_from_answers(lo).u[v], profile_from_answers(hi).u[v]);
      EXPECT_NEAR(profile_from_answers(hi).u[v] - profile_from_answers(lo).u[v], 0.2, 1e-15);
    }
  }
}

TEST(ProfileProperty, SubmissionOrderIrrelevant) {
  std::mt19937_64 rng(61);
  std::uniform_int_distribution<int> answer(1, 6);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<std::pair<PersonalValue, int>> pairs;
    for (auto v : kAllValues) pairs.emplace_back(v, answer(rng));
    std::map<PersonalValue, int> a(pairs.begin(), pairs.end());
    std::shuffle(pairs.begin(), pairs.end(), rng);
    std::map<PersonalValue, int> b;
    for (const auto& [v, r] : pairs) b.emplace(v, r);
    ASSERT_EQ(profile_from_answers(a), profile_from_answers(b));
  }
}

TEST(ValueNames, RoundTrip) {
  for (auto v : kAllValues) EXPECT_EQ(parse_personal_value(to_string(v)), v);
  EXPECT_EQ(to_string(PersonalValue::kSelfDirection), "self_direction");
  EXPECT_FALSE(parse_personal_value("Power").has_value());
}

TEST(Questionnaire, ShippedFile) {
  auto items = load_questionnaire(default_data_dir() / "questionnaire.jsonl");
  ASSERT_EQ(items.size(), kValueCount);
  for (std::size_t i = 0; i < kValueCount; ++i) {
    EXPECT_EQ(items[i].value, kAllValues[i]);
    EXPECT_FALSE(items[i].statement.empty());
  }
  EXPECT_EQ(kLikertLabels.front(), "strongly disagree");
  EXPECT_EQ(kLikertLabels.back(), "strongly agree");
}

TEST(Questionnaire, IncompleteFileRejected) {
  climatekb::testing::TempDir dir;
  std::string full = text::read_file(default_data_dir() / "questionnaire.jsonl");
  std::string partial = full.substr(0, full.rfind('\n', full.size() - 2) + 1);
  text::write_file(dir / "q.jsonl", partial);
  EXPECT_THROW(load_questionnaire(dir / "q.jsonl"), ValidationError);
  EXPECT_THROW(load_questionnaire(dir / "missing.jsonl"), IoError);
}
