#include <gtest/gtest.h>

#include "dsm/domain.hpp"
#include "oracle.hpp"

using namespace dsm;

namespace {

oracle::ctx ctx_of(meal_context c) {
  switch (c) {
    case meal_context::fasting: return oracle::ctx::fasting;
    case meal_context::pre_meal: return oracle::ctx::pre_meal;
    case meal_context::post_meal: return oracle::ctx::post_meal;
  }
  return oracle::ctx::fasting;
}

}  // namespace

TEST(Classify, ExamplesFromTheBandTable) {
  EXPECT_EQ(classify_bg(65, meal_context::fasting), glycemic_band::low);
  EXPECT_EQ(classify_bg(70, meal_context::fasting), glycemic_band::normal);
  EXPECT_EQ(classify_bg(130, meal_context::fasting), glycemic_band::normal);
  EXPECT_EQ(classify_bg(131, meal_context::fasting), glycemic_band::high);
  EXPECT_EQ(classify_bg(181, meal_context::fasting), glycemic_band::critically_high);
  EXPECT_EQ(classify_bg(200, meal_context::pre_meal), glycemic_band::elevated);
  EXPECT_EQ(classify_bg(250, meal_context::post_meal), glycemic_band::elevated);
  EXPECT_EQ(classify_bg(251, meal_context::post_meal), glycemic_band::critically_high);
}

TEST(Classify, RejectsValuesOutsideTheValidRange) {
  EXPECT_THROW(classify_bg(0, meal_context::fasting), rejected_reading);
  EXPECT_THROW(classify_bg(601, meal_context::pre_meal), rejected_reading);
  EXPECT_THROW(classify_bg(-5, meal_context::post_meal), rejected_reading);
  EXPECT_NO_THROW(classify_bg(1, meal_context::fasting));
  EXPECT_NO_THROW(classify_bg(600, meal_context::fasting));
}

TEST(Classify, AgreesWithOracleEverywhere) {
  for (auto c : all_meal_contexts)
    for (int bg = 1; bg <= 600; ++bg)
      ASSERT_EQ(to_string(classify_bg(bg, c)), oracle::lookup(ctx_of(c), bg).band) << bg << " " << to_string(c);
}

TEST(Classify, FastingNeverElevated) {
  for (int bg = 1; bg <= 600; ++bg) EXPECT_NE(classify_bg(bg, meal_context::fasting), glycemic_band::elevated);
  EXPECT_FALSE(band_reachable(meal_context::fasting, glycemic_band::elevated));
  EXPECT_TRUE(band_reachable(meal_context::pre_meal, glycemic_band::elevated));
}

TEST(Classify, MonotoneInValue) {
  auto rank = [](glycemic_band b) {
    switch (b) {
      case glycemic_band::low: return 0;
      case glycemic_band::normal: return 1;
      case glycemic_band::high: return 2;
      case glycemic_band::elevated: return 3;
      case glycemic_band::critically_high: return 4;
    }
    return -1;
  };
  for (auto c : all_meal_contexts)
    for (int bg = 2; bg <= 600; ++bg) EXPECT_LE(rank(classify_bg(bg - 1, c)), rank(classify_bg(bg, c)));
}

TEST(Classify, CustomThresholdsMoveTheSeams) {
  band_thresholds t;
  t.low_below = 80;
  EXPECT_EQ(classify_bg(75, meal_context::fasting, t), glycemic_band::low);
  EXPECT_EQ(classify_bg(80, meal_context::fasting, t), glycemic_band::normal);
}

TEST(Steps, ConvertAtDefaultRate) {
  EXPECT_DOUBLE_EQ(kcal_from_steps(5000), 200.0);
  EXPECT_DOUBLE_EQ(kcal_from_steps(0), 0.0);
  EXPECT_DOUBLE_EQ(kcal_from_steps(1000, 0.05), 50.0);
}

TEST(Profile, ValidationNamesTheField) {
  user_profile p;
  p.nickname = "kim";
  p.email = "kim@example.org";
  p.age = 50;
  p.height_cm = 165;
  p.weight_kg = 60;
  EXPECT_NO_THROW(validate_profile(p));
  auto bad = p;
  bad.email = "no-at-sign";
  EXPECT_THROW(validate_profile(bad), validation_error);
  bad = p;
  bad.age = 0;
  EXPECT_THROW(validate_profile(bad), validation_error);
  bad = p;
  bad.weight_kg = -1;
  EXPECT_THROW(validate_profile(bad), validation_error);
}

TEST(Names, RoundTrip) {
  for (auto c : all_meal_contexts) EXPECT_EQ(enum_from_string<meal_context>(to_string(c)), c);
  for (auto b : all_glycemic_bands) EXPECT_EQ(enum_from_string<glycemic_band>(to_string(b)), b);
  EXPECT_EQ(enum_from_string<gender>("female"), gender::female);
  EXPECT_EQ(enum_from_string<exercise_status>("regular"), exercise_status::regular);
  EXPECT_THROW(enum_from_string<meal_context>("brunch"), validation_error);
}
