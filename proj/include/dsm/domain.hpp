#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "dsm/error.hpp"
#include "dsm/time.hpp"

namespace dsm {

using user_id = std::int64_t;

enum class gender { male, female, other };
enum class exercise_status { sedentary, occasional, regular };

struct user_profile {
  user_id id = 0;
  std::string nickname;
  std::string email;
  int age = 0;
  gender sex = gender::other;
  double height_cm = 0;
  double weight_kg = 0;
  exercise_status activity = exercise_status::sedentary;
  timestamp registered_at{};
};

// Throws validation_error naming the first field out of bounds.
inline void validate_profile(const user_profile& p) {
  if (p.age < 1 || p.age > 120) throw validation_error("age must be within [1, 120]");
  if (!(p.height_cm > 50 && p.height_cm < 250)) throw validation_error("height must be within (50, 250) cm");
  if (!(p.weight_kg > 20 && p.weight_kg < 300)) throw validation_error("weight must be within (20, 300) kg");
  if (p.nickname.empty()) throw validation_error("nickname is required");
  if (p.email.find('@') == std::string::npos) throw validation_error("email is malformed");
}

enum class meal_context { fasting, pre_meal, post_meal };

inline constexpr std::array all_meal_contexts{meal_context::fasting, meal_context::pre_meal,
                                              meal_context::post_meal};

// Ordered by severity on the glucose axis; the classifier is monotone in it.
enum class glycemic_band { low, normal, high, elevated, critically_high };

inline constexpr std::array all_glycemic_bands{glycemic_band::low, glycemic_band::normal,
                                               glycemic_band::high, glycemic_band::elevated,
                                               glycemic_band::critically_high};

struct glucose_reading {
  user_id user = 0;
  int value_mg_dl = 0;
  meal_context context = meal_context::fasting;
  timestamp taken_at{};
};

struct exercise_session {
  user_id user = 0;
  timestamp started_at{};
  int duration_min = 0;
  std::int64_t steps = 0;
  double kcal_burned = 0;
  std::optional<glucose_reading> bg_before;
  std::optional<glucose_reading> bg_after;
};

struct meal_record {
  user_id user = 0;
  timestamp eaten_at{};
  std::string description;
  double kcal = 0;
};

struct medication_event {
  user_id user = 0;
  timestamp scheduled_at{};
  std::optional<timestamp> taken_at;
  std::string name;
};

// Every classification threshold in one place. Bounds are inclusive on the
// upper side: a value equal to normal_max is normal, one above is high.
struct band_thresholds {
  int min_valid = 1;
  int max_valid = 600;
  int low_below = 70;
  int normal_max = 130;
  int high_max = 180;
  // Meal contexts only; fasting goes straight from high to critically_high.
  int elevated_max = 250;
};

inline constexpr double default_kcal_per_step = 0.04;

inline double kcal_from_steps(std::int64_t steps, double kcal_per_step = default_kcal_per_step) {
  return static_cast<double>(steps) * kcal_per_step;
}

inline void check_reading_value(int value, const band_thresholds& t = {}) {
  if (value < t.min_valid || value > t.max_valid) {
    throw rejected_reading("glucose value " + std::to_string(value) + " mg/dL outside [" +
                           std::to_string(t.min_valid) + ", " + std::to_string(t.max_valid) + "]");
  }
}

inline glycemic_band classify_bg(int value, meal_context context, const band_thresholds& t = {}) {
  check_reading_value(value, t);
  if (value < t.low_below) return glycemic_band::low;
  if (value <= t.normal_max) return glycemic_band::normal;
  if (value <= t.high_max) return glycemic_band::high;
  if (context != meal_context::fasting && value <= t.elevated_max) return glycemic_band::elevated;
  return glycemic_band::critically_high;
}

inline glycemic_band classify_bg(const glucose_reading& r, const band_thresholds& t = {}) {
  return classify_bg(r.value_mg_dl, r.context, t);
}

// Bands a context can produce. Fasting never yields `elevated`.
inline bool band_reachable(meal_context context, glycemic_band band) {
  return !(context == meal_context::fasting && band == glycemic_band::elevated);
}

// --- names -----------------------------------------------------------------

inline std::string_view to_string(meal_context c) {
  switch (c) {
    case meal_context::fasting: return "fasting";
    case meal_context::pre_meal: return "pre_meal";
    case meal_context::post_meal: return "post_meal";
  }
  return "?";
}

inline std::string_view to_string(glycemic_band b) {
  switch (b) {
    case glycemic_band::low: return "low";
    case glycemic_band::normal: return "normal";
    case glycemic_band::high: return "high";
    case glycemic_band::elevated: return "elevated";
    case glycemic_band::critically_high: return "critically_high";
  }
  return "?";
}

inline std::string_view to_string(gender g) {
  switch (g) {
    case gender::male: return "male";
    case gender::female: return "female";
    case gender::other: return "other";
  }
  return "?";
}

inline std::string_view to_string(exercise_status s) {
  switch (s) {
    case exercise_status::sedentary: return "sedentary";
    case exercise_status::occasional: return "occasional";
    case exercise_status::regular: return "regular";
  }
  return "?";
}

template <typename Enum>
Enum enum_from_string(std::string_view s);

template <>
inline meal_context enum_from_string<meal_context>(std::string_view s) {
  for (auto c : all_meal_contexts)
    if (to_string(c) == s) return c;
  throw validation_error("unknown meal context '" + std::string(s) + "'");
}

template <>
inline glycemic_band enum_from_string<glycemic_band>(std::string_view s) {
  for (auto b : all_glycemic_bands)
    if (to_string(b) == s) return b;
  throw validation_error("unknown glycemic band '" + std::string(s) + "'");
}

template <>
inline gender enum_from_string<gender>(std::string_view s) {
  for (auto g : {gender::male, gender::female, gender::other})
    if (to_string(g) == s) return g;
  throw validation_error("unknown gender '" + std::string(s) + "'");
}

template <>
inline exercise_status enum_from_string<exercise_status>(std::string_view s) {
  for (auto e : {exercise_status::sedentary, exercise_status::occasional, exercise_status::regular})
    if (to_string(e) == s) return e;
  throw validation_error("unknown exercise status '" + std::string(s) + "'");
}

}  // namespace dsm
