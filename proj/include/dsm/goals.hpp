#pragma once

#include <algorithm>
#include <array>
#include <chrono>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "dsm/domain.hpp"

namespace dsm {

enum class adherence_area { bg_monitoring, medication, diet, exercise };

inline constexpr std::array all_adherence_areas{adherence_area::bg_monitoring, adherence_area::medication,
                                                adherence_area::diet, adherence_area::exercise};

inline std::string_view to_string(adherence_area a) {
  switch (a) {
    case adherence_area::bg_monitoring: return "bg_monitoring";
    case adherence_area::medication: return "medication";
    case adherence_area::diet: return "diet";
    case adherence_area::exercise: return "exercise";
  }
  return "?";
}

template <>
inline adherence_area enum_from_string<adherence_area>(std::string_view s) {
  for (auto a : all_adherence_areas)
    if (to_string(a) == s) return a;
  throw validation_error("unknown adherence area '" + std::string(s) + "'");
}

// Fixed-size map over the four areas, indexed by enum.
template <typename T>
struct per_area {
  std::array<T, 4> values{};

  T& operator[](adherence_area a) { return values[static_cast<std::size_t>(a)]; }
  const T& operator[](adherence_area a) const { return values[static_cast<std::size_t>(a)]; }

  friend bool operator==(const per_area&, const per_area&) = default;
};

struct bg_target {
  int low = 70;
  int high = 130;

  bool contains(int v) const noexcept { return low <= v && v <= high; }
  friend bool operator==(const bg_target&, const bg_target&) = default;
};

struct goal_set {
  user_id user = 0;
  bg_target bg;
  std::int64_t daily_steps = 6000;
  double daily_kcal_burn = 150;
  std::vector<std::chrono::minutes> medication_times;
  bool diet_log_required = false;
  date effective_from{};

  friend bool operator==(const goal_set&, const goal_set&) = default;
};

// Acceptable goal ranges. The glucose window is the union of the normal and
// high-but-safe bands.
struct goal_bounds {
  int bg_min = 70;
  int bg_max = 180;
  std::int64_t steps_min = 1000;
  std::int64_t steps_max = 30000;
  double kcal_min = 50;
  double kcal_max = 2000;
};

enum class goal_verdict { accepted, corrected, invalid };

struct goal_validation {
  goal_verdict verdict = goal_verdict::accepted;
  // The accepted goal, or the recommended replacement.
  goal_set goal;
  std::vector<std::string> issues;
};

inline goal_validation validate_goals(const goal_set& proposed, const goal_bounds& bounds = {}) {
  goal_validation out{goal_verdict::accepted, proposed, {}};
  auto& g = out.goal;

  if (proposed.bg.low >= proposed.bg.high) {
    out.verdict = goal_verdict::invalid;
    out.issues.push_back("glucose target lower bound must be below upper bound");
    g.bg = bg_target{70, 130};
  } else {
    g.bg.low = std::clamp(proposed.bg.low, bounds.bg_min, bounds.bg_max);
    g.bg.high = std::clamp(proposed.bg.high, bounds.bg_min, bounds.bg_max);
    if (g.bg.low >= g.bg.high) {
      // Both ends clamped onto the same edge; open the narrowest valid window.
      if (g.bg.high > bounds.bg_min) g.bg.low = g.bg.high - 1;
      else g.bg.high = g.bg.low + 1;
    }
    if (!(g.bg == proposed.bg)) out.issues.push_back("glucose target outside the safe range");
  }

  g.daily_steps = std::clamp(proposed.daily_steps, bounds.steps_min, bounds.steps_max);
  if (g.daily_steps != proposed.daily_steps) out.issues.push_back("daily step goal outside the safe range");

  g.daily_kcal_burn = std::clamp(proposed.daily_kcal_burn, bounds.kcal_min, bounds.kcal_max);
  if (g.daily_kcal_burn != proposed.daily_kcal_burn)
    out.issues.push_back("daily calorie-burn goal outside the safe range");

  for (auto t : proposed.medication_times) {
    if (t < std::chrono::minutes{0} || t >= std::chrono::hours{24}) {
      out.issues.push_back("medication time outside the day");
      g.medication_times.clear();
      break;
    }
  }

  if (out.verdict != goal_verdict::invalid && !out.issues.empty()) out.verdict = goal_verdict::corrected;
  return out;
}

// --- education ---------------------------------------------------------------

struct knowledge_survey {
  user_id user = 0;
  per_area<bool> knows{{true, true, true, true}};
};

struct education_intervention {
  adherence_area area;
  std::string content_key;

  friend bool operator==(const education_intervention&, const education_intervention&) = default;
};

inline std::string education_key(adherence_area a) { return "education." + std::string(to_string(a)); }

using education_catalog = std::map<std::string, std::string>;

inline const education_catalog& default_education_catalog() {
  static const education_catalog catalog{
      {"education.bg_monitoring",
       "Check your blood glucose several times a day, before and after meals and around exercise. "
       "Frequent checks show how food, activity and medicine move your numbers."},
      {"education.medication",
       "Take each medicine at the scheduled time every day. Set reminders and do not skip or double "
       "doses without asking your doctor."},
      {"education.diet",
       "Plan meals with calorie control in mind, prefer low glycemic index foods and use food "
       "exchange tables to swap items within a meal plan."},
      {"education.exercise",
       "Regular physical activity lowers blood glucose. Aim for light to moderate sessions of about "
       "30 minutes most days and match intensity to your glucose reading."},
  };
  return catalog;
}

inline education_catalog load_education_catalog(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw not_found("cannot open education catalog " + path);
  education_catalog catalog;
  try {
    auto doc = nlohmann::json::parse(in);
    for (auto& [k, v] : doc.items()) catalog[k] = v.get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw validation_error("education catalog " + path + ": " + e.what());
  }
  for (auto a : all_adherence_areas)
    if (!catalog.count(education_key(a)))
      throw validation_error("education catalog lacks " + education_key(a));
  return catalog;
}

// One intervention per knowledge gap, in area order.
inline std::vector<education_intervention> education_gate(const knowledge_survey& survey) {
  std::vector<education_intervention> out;
  for (auto a : all_adherence_areas)
    if (!survey.knows[a]) out.push_back({a, education_key(a)});
  return out;
}

// --- reminders ---------------------------------------------------------------

inline constexpr int reminder_interval_days = 3;

// A missing last_log counts from the goal's effective date; a missing
// last_reminder never blocks.
inline bool reminder_due(std::optional<date> last_log, std::optional<date> last_reminder, date today,
                         date goals_effective_from) {
  date since_log = last_log.value_or(goals_effective_from);
  if ((today - since_log).count() < reminder_interval_days) return false;
  if (last_reminder && (today - *last_reminder).count() < reminder_interval_days) return false;
  return true;
}

// --- daily evaluation --------------------------------------------------------

struct day_logs {
  std::vector<glucose_reading> readings;
  std::vector<exercise_session> sessions;
  std::vector<meal_record> meals;
  std::vector<medication_event> medications;
  // Daily total from an activity tracker import, when present.
  std::optional<std::int64_t> tracker_steps;

  bool empty() const noexcept {
    return readings.empty() && sessions.empty() && meals.empty() && medications.empty() && !tracker_steps;
  }
};

struct daily_log_status {
  user_id user = 0;
  date day{};
  per_area<bool> logged;
  per_area<bool> goals_met;
};

inline constexpr std::chrono::minutes medication_window{60};

inline std::int64_t day_steps(const day_logs& logs) {
  std::int64_t session_steps = 0;
  for (const auto& s : logs.sessions) session_steps += s.steps;
  return std::max(session_steps, logs.tracker_steps.value_or(0));
}

inline double day_kcal_burned(const day_logs& logs, double kcal_per_step = default_kcal_per_step) {
  double kcal = 0;
  for (const auto& s : logs.sessions) kcal += s.kcal_burned;
  return std::max(kcal, kcal_from_steps(logs.tracker_steps.value_or(0), kcal_per_step));
}

// Diet counts only when the goal asks for meal logging. An empty medication
// schedule is met on any day the user logged something.
inline daily_log_status evaluate_day(user_id user, date day, const day_logs& logs, const goal_set& goals,
                                     double kcal_per_step = default_kcal_per_step) {
  daily_log_status st{user, day, {}, {}};

  st.logged[adherence_area::bg_monitoring] = !logs.readings.empty();
  st.goals_met[adherence_area::bg_monitoring] =
      !logs.readings.empty() && std::all_of(logs.readings.begin(), logs.readings.end(), [&](const auto& r) {
        return goals.bg.contains(r.value_mg_dl);
      });

  auto steps = day_steps(logs);
  st.logged[adherence_area::exercise] = !logs.sessions.empty() || steps > 0;
  st.goals_met[adherence_area::exercise] =
      st.logged[adherence_area::exercise] &&
      (steps >= goals.daily_steps || day_kcal_burned(logs, kcal_per_step) >= goals.daily_kcal_burn);

  if (goals.medication_times.empty()) {
    bool active = !logs.empty();
    st.logged[adherence_area::medication] = active;
    st.goals_met[adherence_area::medication] = active;
  } else {
    st.logged[adherence_area::medication] = !logs.medications.empty();
    st.goals_met[adherence_area::medication] =
        std::all_of(goals.medication_times.begin(), goals.medication_times.end(), [&](auto tod) {
          timestamp due = timestamp{day} + tod;
          return std::any_of(logs.medications.begin(), logs.medications.end(), [&](const auto& m) {
            return m.taken_at && *m.taken_at >= due - medication_window && *m.taken_at <= due + medication_window;
          });
        });
  }

  st.logged[adherence_area::diet] = !logs.meals.empty();
  st.goals_met[adherence_area::diet] = goals.diet_log_required && !logs.meals.empty();
  return st;
}

}  // namespace dsm
