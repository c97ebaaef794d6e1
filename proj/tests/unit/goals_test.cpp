#include <gtest/gtest.h>

#include "dsm/goals.hpp"
#include "oracle.hpp"

using namespace dsm;
using namespace std::chrono;

namespace {

const date d0 = parse_date("2024-03-04");

timestamp at(const char* hhmm) { return timestamp{d0} + parse_time_of_day(hhmm); }

goal_set goals() {
  goal_set g;
  g.user = 1;
  g.bg = {80, 140};
  g.daily_steps = 6000;
  g.daily_kcal_burn = 150;
  g.effective_from = d0;
  return g;
}

}  // namespace

TEST(ValidateGoals, AcceptsSafeGoals) {
  auto v = validate_goals(goals());
  EXPECT_EQ(v.verdict, goal_verdict::accepted);
  EXPECT_TRUE(v.issues.empty());
  EXPECT_EQ(v.goal, goals());
}

TEST(ValidateGoals, InvertedRangeIsInvalidWithRecommendation) {
  auto g = goals();
  g.bg = {150, 90};
  auto v = validate_goals(g);
  EXPECT_EQ(v.verdict, goal_verdict::invalid);
  EXPECT_EQ(v.goal.bg, (bg_target{70, 130}));
  g.bg = {100, 100};
  EXPECT_EQ(validate_goals(g).verdict, goal_verdict::invalid);
}

TEST(ValidateGoals, ClampsUnsafeValues) {
  auto g = goals();
  g.bg = {40, 260};
  g.daily_steps = 80000;
  g.daily_kcal_burn = 10;
  auto v = validate_goals(g);
  EXPECT_EQ(v.verdict, goal_verdict::corrected);
  EXPECT_EQ(v.goal.bg, (bg_target{70, 180}));
  EXPECT_EQ(v.goal.daily_steps, 30000);
  EXPECT_DOUBLE_EQ(v.goal.daily_kcal_burn, 50);
  EXPECT_EQ(v.issues.size(), 3u);
}

TEST(ValidateGoals, CollapsedRangeOpensAValidWindow) {
  auto g = goals();
  g.bg = {200, 260};
  auto v = validate_goals(g);
  EXPECT_EQ(v.verdict, goal_verdict::corrected);
  EXPECT_LT(v.goal.bg.low, v.goal.bg.high);
  EXPECT_EQ(v.goal.bg.high, 180);
  g.bg = {10, 20};
  v = validate_goals(g);
  EXPECT_EQ(v.goal.bg, (bg_target{70, 71}));
}

TEST(ValidateGoals, CorrectedGoalsAreThemselvesAccepted) {
  for (int lo = 0; lo <= 300; lo += 7)
    for (int hi = lo + 1; hi <= 320; hi += 11) {
      auto g = goals();
      g.bg = {lo, hi};
      auto v = validate_goals(g);
      ASSERT_NE(v.verdict, goal_verdict::invalid);
      ASSERT_EQ(validate_goals(v.goal).verdict, goal_verdict::accepted) << lo << "-" << hi;
    }
}

TEST(Education, GateSelectsOneInterventionPerGap) {
  knowledge_survey s;
  s.knows[adherence_area::diet] = false;
  s.knows[adherence_area::medication] = false;
  auto out = education_gate(s);
  ASSERT_EQ(out.size(), 2u);
  EXPECT_EQ(out[0].area, adherence_area::medication);
  EXPECT_EQ(out[0].content_key, "education.medication");
  EXPECT_EQ(out[1].area, adherence_area::diet);
  EXPECT_TRUE(education_gate(knowledge_survey{}).empty());
  for (const auto& i : out) EXPECT_TRUE(default_education_catalog().count(i.content_key));
}

TEST(Reminders, ExamplesAroundTheThreeDayGap) {
  date today = d0 + days{10};
  EXPECT_TRUE(reminder_due(today - days{3}, std::nullopt, today, d0));
  EXPECT_FALSE(reminder_due(today - days{2}, std::nullopt, today, d0));
  EXPECT_FALSE(reminder_due(today - days{5}, today - days{1}, today, d0));
  EXPECT_TRUE(reminder_due(today - days{5}, today - days{3}, today, d0));
  EXPECT_FALSE(reminder_due(std::nullopt, std::nullopt, d0 + days{2}, d0));
  EXPECT_TRUE(reminder_due(std::nullopt, std::nullopt, d0 + days{3}, d0));
}

TEST(Reminders, AgreesWithOracleOnSmallGrid) {
  for (int today = 0; today < 15; ++today)
    for (int log = -1; log <= today; ++log)
      for (int rem = -1; rem <= today; ++rem) {
        auto l = log < 0 ? std::nullopt : std::optional<date>(d0 + days{log});
        auto r = rem < 0 ? std::nullopt : std::optional<date>(d0 + days{rem});
        auto ol = log < 0 ? std::nullopt : std::optional<int>(log);
        auto orr = rem < 0 ? std::nullopt : std::optional<int>(rem);
        ASSERT_EQ(reminder_due(l, r, d0 + days{today}, d0), oracle::reminder_due(ol, orr, today, 0));
      }
}

TEST(EvaluateDay, NoLogsMeansNothingMet) {
  auto st = evaluate_day(1, d0, {}, goals());
  for (auto a : all_adherence_areas) {
    EXPECT_FALSE(st.logged[a]) << to_string(a);
    EXPECT_FALSE(st.goals_met[a]) << to_string(a);
  }
}

TEST(EvaluateDay, StepsGoalMetByTracker) {
  day_logs logs;
  logs.tracker_steps = 6500;
  auto st = evaluate_day(1, d0, logs, goals());
  EXPECT_TRUE(st.goals_met[adherence_area::exercise]);
  logs.tracker_steps = 3000;  // 120 kcal, under both goals
  EXPECT_FALSE(evaluate_day(1, d0, logs, goals()).goals_met[adherence_area::exercise]);
}

TEST(EvaluateDay, KcalGoalMetBySession) {
  day_logs logs;
  exercise_session s;
  s.user = 1;
  s.started_at = at("18:00");
  s.duration_min = 35;
  s.kcal_burned = 150;
  logs.sessions.push_back(s);
  EXPECT_TRUE(evaluate_day(1, d0, logs, goals()).goals_met[adherence_area::exercise]);
}

TEST(EvaluateDay, BgGoalNeedsEveryReadingInRange) {
  day_logs logs;
  logs.readings.push_back({1, 100, meal_context::fasting, at("07:00")});
  logs.readings.push_back({1, 135, meal_context::post_meal, at("13:00")});
  EXPECT_TRUE(evaluate_day(1, d0, logs, goals()).goals_met[adherence_area::bg_monitoring]);
  logs.readings.push_back({1, 190, meal_context::post_meal, at("19:00")});
  auto st = evaluate_day(1, d0, logs, goals());
  EXPECT_TRUE(st.logged[adherence_area::bg_monitoring]);
  EXPECT_FALSE(st.goals_met[adherence_area::bg_monitoring]);
}

TEST(EvaluateDay, MedicationWithinAnHour) {
  auto g = goals();
  g.medication_times = {parse_time_of_day("08:00"), parse_time_of_day("20:00")};
  day_logs logs;
  logs.medications.push_back({1, at("08:00"), at("08:59"), "metformin"});
  EXPECT_FALSE(evaluate_day(1, d0, logs, g).goals_met[adherence_area::medication]);
  logs.medications.push_back({1, at("20:00"), at("21:00"), "metformin"});
  EXPECT_TRUE(evaluate_day(1, d0, logs, g).goals_met[adherence_area::medication]);
  logs.medications.back().taken_at = at("21:01");
  EXPECT_FALSE(evaluate_day(1, d0, logs, g).goals_met[adherence_area::medication]);
  logs.medications.back().taken_at = std::nullopt;
  EXPECT_FALSE(evaluate_day(1, d0, logs, g).goals_met[adherence_area::medication]);
}

TEST(EvaluateDay, EmptyScheduleIsMetOnActiveDays) {
  day_logs logs;
  logs.readings.push_back({1, 100, meal_context::fasting, at("07:00")});
  auto st = evaluate_day(1, d0, logs, goals());
  EXPECT_TRUE(st.goals_met[adherence_area::medication]);
}

TEST(EvaluateDay, DietOnlyWhenRequired) {
  day_logs logs;
  logs.meals.push_back({1, at("12:00"), "lunch", 600});
  auto g = goals();
  EXPECT_FALSE(evaluate_day(1, d0, logs, g).goals_met[adherence_area::diet]);
  g.diet_log_required = true;
  EXPECT_TRUE(evaluate_day(1, d0, logs, g).goals_met[adherence_area::diet]);
}

TEST(EvaluateDay, StepsTakeTheLargerSource) {
  day_logs logs;
  exercise_session s;
  s.steps = 4000;
  s.kcal_burned = 100;
  logs.sessions.push_back(s);
  logs.tracker_steps = 3000;
  EXPECT_EQ(day_steps(logs), 4000);
  logs.tracker_steps = 9000;
  EXPECT_EQ(day_steps(logs), 9000);
  EXPECT_DOUBLE_EQ(day_kcal_burned(logs), 360.0);
}
