#include <gtest/gtest.h>

#include <random>

#include "dsm/recommendation.hpp"
#include "oracle.hpp"

using namespace dsm;

namespace {

glucose_reading reading(int bg, meal_context c) { return {0, bg, c, {}}; }

exercise_session session(int duration, double kcal, int before) {
  exercise_session s;
  s.duration_min = duration;
  s.kcal_burned = kcal;
  s.bg_before = reading(before, meal_context::fasting);
  return s;
}

oracle::ctx ctx_of(meal_context c) {
  return c == meal_context::fasting ? oracle::ctx::fasting
         : c == meal_context::pre_meal ? oracle::ctx::pre_meal
                                       : oracle::ctx::post_meal;
}

}  // namespace

TEST(Recommend, FastingLowBlocks) {
  auto r = recommend(phase::pre_exercise, reading(65, meal_context::fasting));
  EXPECT_EQ(r.action, exercise_action::block);
  EXPECT_EQ(r.key.band, glycemic_band::low);
  EXPECT_EQ(r.message, "Your BG is critically low. Please avoid exercise and consult a healthcare professional.");
  EXPECT_FALSE(r.reward_promised);
}

TEST(Recommend, FastingNormalAllowsLight) {
  auto r = recommend(phase::pre_exercise, reading(95, meal_context::fasting));
  EXPECT_EQ(r.action, exercise_action::allow_light);
  EXPECT_TRUE(r.reward_promised);
}

TEST(Recommend, MealElevatedAllowsLightToModerate) {
  auto r = recommend(phase::pre_exercise, reading(200, meal_context::post_meal));
  EXPECT_EQ(r.action, exercise_action::allow_light_to_moderate);
  EXPECT_NE(r.message.find("avoid intense activity"), std::string::npos);
}

TEST(Recommend, KetoneWarnings) {
  EXPECT_EQ(recommend(phase::pre_exercise, reading(181, meal_context::fasting)).action, exercise_action::warn_block);
  EXPECT_EQ(recommend(phase::pre_exercise, reading(251, meal_context::pre_meal)).action, exercise_action::warn_block);
  EXPECT_NE(recommend(phase::pre_exercise, reading(300, meal_context::fasting)).message.find("ketones"),
            std::string::npos);
}

TEST(Recommend, PostExerciseFillsPlaceholders) {
  auto r = recommend(phase::post_exercise, reading(110, meal_context::fasting), session(30, 120, 140));
  EXPECT_EQ(r.message,
            "Well done! Your BG dropped to 30 mg/dL after 30 min of exercise. Keep up the good work and monitor "
            "levels, especially after meals and exercise. Burned calories: 120 kcal. Stay hydrated.");
}

TEST(Recommend, PostExerciseUsesSessionAfterReadingWhenPresent) {
  auto s = session(20, 80, 150);
  s.bg_after = reading(120, meal_context::pre_meal);
  auto r = recommend(phase::post_exercise, reading(120, meal_context::pre_meal), s);
  EXPECT_NE(r.message.find("dropped to 30 mg/dL after 20 min"), std::string::npos);
}

TEST(Recommend, KcalRoundsHalfUp) {
  auto r = recommend(phase::post_exercise, reading(100, meal_context::pre_meal), session(25, 99.5, 110));
  EXPECT_NE(r.message.find("Burned calories: 100 kcal"), std::string::npos);
  r = recommend(phase::post_exercise, reading(100, meal_context::pre_meal), session(25, 99.49, 110));
  EXPECT_NE(r.message.find("Burned calories: 99 kcal"), std::string::npos);
}

TEST(Recommend, PostExerciseWithoutSessionIsIncomplete) {
  EXPECT_THROW(recommend(phase::post_exercise, reading(100, meal_context::fasting)), incomplete_input);
  exercise_session s;
  s.duration_min = 10;
  EXPECT_THROW(recommend(phase::post_exercise, reading(100, meal_context::fasting), s), incomplete_input);
}

TEST(Recommend, RejectsOutOfRangeReading) {
  EXPECT_THROW(recommend(phase::pre_exercise, reading(0, meal_context::fasting)), rejected_reading);
  EXPECT_THROW(recommend(phase::pre_exercise, reading(700, meal_context::fasting)), rejected_reading);
}

TEST(Recommend, MatchesOracleOverWholeDomain) {
  for (auto c : all_meal_contexts) {
    for (int bg = 1; bg <= 600; ++bg) {
      auto want = oracle::lookup(ctx_of(c), bg);
      auto pre = recommend(phase::pre_exercise, reading(bg, c));
      ASSERT_EQ(to_string(pre.action), want.action) << bg;
      ASSERT_NE(pre.message.find(want.pre_phrase), std::string::npos) << bg << " " << pre.message;
      auto post = recommend(phase::post_exercise, reading(bg, c), session(30, 120, std::min(600, bg + 10)));
      ASSERT_EQ(to_string(post.action), want.action) << bg;
      ASSERT_NE(post.message.find(want.post_phrase), std::string::npos) << bg << " " << post.message;
      ASSERT_EQ(post.message.find('{'), std::string::npos);
    }
  }
}

TEST(Recommend, BlockingRulesNeverPromiseRewards) {
  for (const auto& r : default_rule_table().rules())
    if (!permits_exercise(r.action)) {
      EXPECT_FALSE(r.promises_reward) << rule_table::describe(r.key);
    }
}

TEST(RuleTable, HasExactlyOneRulePerReachableCell) {
  const auto& t = default_rule_table();
  EXPECT_EQ(t.rules().size(), 28u);
  for (auto p : all_phases)
    for (auto c : all_meal_contexts)
      for (auto b : all_glycemic_bands) {
        if (band_reachable(c, b)) EXPECT_NO_THROW(t.lookup({p, c, b}));
        else EXPECT_THROW(t.lookup({p, c, b}), not_found);
      }
}

TEST(RuleTable, RejectsMissingDuplicateAndBadTemplates) {
  auto rules = canonical_rules();
  auto missing = rules;
  missing.pop_back();
  EXPECT_THROW(rule_table{missing}, validation_error);

  auto dup = rules;
  dup.push_back(rules.front());
  EXPECT_THROW(rule_table{dup}, validation_error);

  auto pre_placeholder = rules;
  for (auto& r : pre_placeholder)
    if (r.key.when == phase::pre_exercise) {
      r.message_template += " {kcal}";
      break;
    }
  EXPECT_THROW(rule_table{pre_placeholder}, validation_error);

  auto unknown = rules;
  for (auto& r : unknown)
    if (r.key.when == phase::post_exercise) {
      r.message_template += " {steps}";
      break;
    }
  EXPECT_THROW(rule_table{unknown}, validation_error);

  auto rewarded_block = rules;
  for (auto& r : rewarded_block)
    if (r.action == exercise_action::block) {
      r.promises_reward = true;
      break;
    }
  EXPECT_THROW(rule_table{rewarded_block}, validation_error);

  auto unreachable = rules;
  unreachable.push_back({{phase::pre_exercise, meal_context::fasting, glycemic_band::elevated},
                         exercise_action::allow_light, "x", false, false, false});
  EXPECT_THROW(rule_table{unreachable}, validation_error);
}

TEST(RuleTable, JsonRoundTrip) {
  auto doc = rules_to_json(default_rule_table());
  auto back = rules_from_json(doc);
  ASSERT_EQ(back.rules().size(), default_rule_table().rules().size());
  for (std::size_t i = 0; i < back.rules().size(); ++i) {
    const auto& a = back.rules()[i];
    const auto& b = default_rule_table().lookup(a.key);
    EXPECT_EQ(a.action, b.action);
    EXPECT_EQ(a.message_template, b.message_template);
    EXPECT_EQ(a.promises_reward, b.promises_reward);
  }
  doc["rules"].erase(0);
  EXPECT_THROW(rules_from_json(doc), validation_error);
}

TEST(Templates, RenderAndReportMissingValues) {
  EXPECT_EQ(render_message("a {bg_drop} b", {12, std::nullopt, std::nullopt}), "a 12 b");
  EXPECT_THROW(render_message("{kcal}", {}), template_error);
  EXPECT_THROW(placeholders_in("broken {kcal"), template_error);
  EXPECT_EQ(placeholders_in("{bg_drop} {duration_min} {kcal}").size(), 3u);
}

TEST(Recommend, DeterministicForRandomInputs) {
  std::mt19937 rng(7);
  std::uniform_int_distribution<int> bg(1, 600), ctx(0, 2);
  for (int i = 0; i < 2000; ++i) {
    auto c = all_meal_contexts[static_cast<std::size_t>(ctx(rng))];
    int v = bg(rng);
    auto a = recommend(phase::pre_exercise, reading(v, c));
    auto b = recommend(phase::pre_exercise, reading(v, c));
    ASSERT_EQ(a.message, b.message);
    ASSERT_EQ(a.action, b.action);
  }
}
