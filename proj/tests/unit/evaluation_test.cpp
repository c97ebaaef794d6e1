#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <sstream>

#include "dsm/evaluation.hpp"

using namespace dsm;

namespace {

scenario pre(std::string id, meal_context c, int bg, exercise_action a, glycemic_band b) {
  scenario s;
  s.id = std::move(id);
  s.when = phase::pre_exercise;
  s.context = c;
  s.bg = bg;
  s.expected_action = a;
  s.expected_band = b;
  return s;
}

std::vector<scenario_score> scores(std::initializer_list<int> v) {
  std::vector<scenario_score> out;
  for (int x : v) out.push_back({"x", x, exercise_action::block, glycemic_band::low, ""});
  return out;
}

}  // namespace

TEST(Metrics, ArithmeticExamples) {
  EXPECT_DOUBLE_EQ(proficiency(scores({1, 1, 0, -1})), 25.0);
  EXPECT_DOUBLE_EQ(efficiency(scores({1, 1, 0, -1})), 50.0);
  std::vector<scenario_score> ten = scores({1, 1, 1, 1, 1, 1, 1, 1, 1, 1});
  EXPECT_DOUBLE_EQ(proficiency(ten), 100.0);
  EXPECT_DOUBLE_EQ(efficiency(ten), 100.0);
  EXPECT_THROW(proficiency({}), no_data);
  EXPECT_THROW(efficiency({}), no_data);
}

TEST(Score, MatchScoresPlusOne) {
  std::vector<scenario> c{pre("a", meal_context::fasting, 65, exercise_action::block, glycemic_band::low)};
  auto r = evaluate(c);
  EXPECT_EQ(r.scores[0].score, 1);
}

TEST(Score, ActionMismatchScoresMinusOne) {
  std::vector<scenario> c{pre("a", meal_context::fasting, 65, exercise_action::allow_light, glycemic_band::low)};
  auto r = evaluate(c);
  EXPECT_EQ(r.scores[0].score, -1);
  EXPECT_EQ(r.scores[0].engine_action, exercise_action::block);
}

TEST(Score, SharedOutputWithDifferentExpectationsScoresZero) {
  std::vector<scenario> c{
      pre("a", meal_context::pre_meal, 100, exercise_action::allow_light_to_moderate, glycemic_band::normal),
      pre("b", meal_context::pre_meal, 110, exercise_action::allow_light_to_moderate, glycemic_band::elevated)};
  auto r = evaluate(c);
  EXPECT_EQ(r.scores[0].score, 0);
  EXPECT_EQ(r.scores[1].score, 0);
}

TEST(Score, SharedOutputWithSameExpectationStaysPlusOne) {
  std::vector<scenario> c{
      pre("a", meal_context::pre_meal, 100, exercise_action::allow_light_to_moderate, glycemic_band::normal),
      pre("b", meal_context::post_meal, 110, exercise_action::allow_light_to_moderate, glycemic_band::normal)};
  auto r = evaluate(c);
  EXPECT_EQ(r.scores[0].score, 1);
  EXPECT_EQ(r.scores[1].score, 1);
}

TEST(Score, BandOnlyMismatchScoresZero) {
  std::vector<scenario> c{pre("a", meal_context::fasting, 100, exercise_action::allow_light, glycemic_band::high)};
  EXPECT_EQ(evaluate(c).scores[0].score, 0);
}

TEST(Evaluate, DuplicateIdsRejected) {
  std::vector<scenario> c{pre("a", meal_context::fasting, 65, exercise_action::block, glycemic_band::low),
                          pre("a", meal_context::fasting, 66, exercise_action::block, glycemic_band::low)};
  EXPECT_THROW(evaluate(c), validation_error);
}

TEST(Evaluate, RuleTableCorpusScoresFull) {
  auto c = scenarios_from_rule_table();
  EXPECT_EQ(c.size(), 28u);
  auto r = evaluate(c);
  EXPECT_DOUBLE_EQ(r.efficiency_pct, 100.0);
  EXPECT_DOUBLE_EQ(r.proficiency_pct, 100.0);
}

TEST(Evaluate, PermutationInvariant) {
  std::ifstream in(std::string(DSM_DATA_DIR) + "/scenarios.jsonl");
  auto c = read_corpus(in).scenarios;
  auto base = evaluate(c);
  std::mt19937 rng(1);
  for (int i = 0; i < 20; ++i) {
    std::shuffle(c.begin(), c.end(), rng);
    auto r = evaluate(c);
    EXPECT_DOUBLE_EQ(r.proficiency_pct, base.proficiency_pct);
    EXPECT_DOUBLE_EQ(r.efficiency_pct, base.efficiency_pct);
  }
}

TEST(Corpus, BundledCorpusReproducesTargets) {
  auto r = run_corpus(std::string(DSM_DATA_DIR) + "/scenarios.jsonl");
  EXPECT_EQ(r.scores.size(), 50u);
  EXPECT_DOUBLE_EQ(r.proficiency_pct, 90.0);
  EXPECT_DOUBLE_EQ(r.efficiency_pct, 92.0);
  EXPECT_TRUE(r.skipped.empty());
}

TEST(Corpus, JsonRoundTrip) {
  for (const auto& s : scenarios_from_rule_table()) {
    auto back = scenario_from_json(scenario_to_json(s));
    EXPECT_EQ(back.id, s.id);
    EXPECT_EQ(back.bg, s.bg);
    EXPECT_EQ(back.when, s.when);
    EXPECT_EQ(back.session.has_value(), s.session.has_value());
  }
}

TEST(Corpus, MalformedLineReportsLineNumber) {
  std::istringstream in(
      "{\"id\":\"a\",\"phase\":\"pre_exercise\",\"context\":\"fasting\",\"bg\":65,"
      "\"expected_action\":\"block\",\"expected_band\":\"low\"}\n"
      "\n"
      "{not json\n");
  try {
    read_corpus(in);
    FAIL() << "expected parse_error";
  } catch (const parse_error& e) {
    EXPECT_EQ(e.line(), 3u);
  }
}

TEST(Corpus, SchemaViolationsAreSkippedWithNote) {
  std::istringstream in(
      "{\"id\":\"a\",\"phase\":\"pre_exercise\",\"context\":\"fasting\",\"bg\":65,"
      "\"expected_action\":\"block\",\"expected_band\":\"low\"}\n"
      "{\"id\":\"b\",\"phase\":\"post_exercise\",\"context\":\"fasting\",\"bg\":65,"
      "\"expected_action\":\"block\",\"expected_band\":\"low\"}\n"
      "{\"id\":\"c\",\"phase\":\"pre_exercise\",\"context\":\"fasting\",\"bg\":700,"
      "\"expected_action\":\"block\",\"expected_band\":\"low\"}\n"
      "{\"id\":\"d\",\"phase\":\"pre_exercise\",\"context\":\"fasting\",\"bg\":200,"
      "\"expected_action\":\"warn_block\",\"expected_band\":\"elevated\"}\n");
  auto c = read_corpus(in);
  EXPECT_EQ(c.scenarios.size(), 1u);
  ASSERT_EQ(c.skipped.size(), 3u);
  EXPECT_EQ(c.skipped[0].line, 2u);
}

TEST(Corpus, EmptyFileIsAnError) {
  std::istringstream in("");
  EXPECT_THROW(read_corpus(in), parse_error);
}

TEST(Report, JsonCarriesPercentages) {
  auto r = run_corpus(std::string(DSM_DATA_DIR) + "/scenarios.jsonl");
  auto j = report_to_json(r);
  EXPECT_EQ(j["n"], 50);
  EXPECT_DOUBLE_EQ(j["proficiency_pct"].get<double>(), 90.0);
  EXPECT_EQ(j["scores"].size(), 50u);
}
