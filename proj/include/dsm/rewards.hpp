#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "dsm/goals.hpp"
#include "dsm/recommendation.hpp"

namespace dsm {

using points = std::int64_t;

struct reward_schedule {
  double kcal_per_point = 10;
  points area_bonus = 5;
  points in_range_check_bonus = 2;
  int in_range_daily_cap = 3;

  void validate() const {
    if (!(kcal_per_point > 0) || area_bonus <= 0 || in_range_check_bonus <= 0 || in_range_daily_cap <= 0)
      throw validation_error("reward schedule values must all be positive");
  }
};

enum class reward_kind { exercise_kcal, area_goal, in_range_check };

struct reward_reason {
  reward_kind kind = reward_kind::exercise_kcal;
  // Set only for area_goal.
  std::optional<adherence_area> area;

  static reward_reason exercise() { return {reward_kind::exercise_kcal, std::nullopt}; }
  static reward_reason goal(adherence_area a) { return {reward_kind::area_goal, a}; }
  static reward_reason in_range() { return {reward_kind::in_range_check, std::nullopt}; }

  friend auto operator<=>(const reward_reason&, const reward_reason&) = default;
};

inline std::string to_string(const reward_reason& r) {
  switch (r.kind) {
    case reward_kind::exercise_kcal: return "exercise_kcal";
    case reward_kind::in_range_check: return "in_range_check";
    case reward_kind::area_goal: return "area_goal:" + std::string(to_string(r.area.value()));
  }
  return "?";
}

inline reward_reason reward_reason_from_string(std::string_view s) {
  if (s == "exercise_kcal") return reward_reason::exercise();
  if (s == "in_range_check") return reward_reason::in_range();
  constexpr std::string_view prefix = "area_goal:";
  if (s.substr(0, prefix.size()) == prefix) return reward_reason::goal(enum_from_string<adherence_area>(s.substr(prefix.size())));
  throw validation_error("unknown reward reason '" + std::string(s) + "'");
}

struct reward_entry {
  user_id user = 0;
  timestamp earned_at{};
  points amount = 0;
  reward_reason reason;
  std::string source_ref;

  friend bool operator==(const reward_entry&, const reward_entry&) = default;
};

// floor(kcal / kcal_per_point). Exercising against a blocking pre-exercise
// recommendation earns nothing.
inline points exercise_points(const exercise_session& session, const reward_schedule& schedule,
                              std::optional<exercise_action> governing_action = std::nullopt) {
  if (governing_action && !permits_exercise(*governing_action)) return 0;
  if (!(session.kcal_burned > 0)) return 0;
  // The epsilon keeps exact multiples like 0.3 / 0.1 from flooring down.
  return static_cast<points>(std::floor(session.kcal_burned / schedule.kcal_per_point + 1e-9));
}

inline points daily_area_points(const daily_log_status& status, const reward_schedule& schedule) {
  points met = 0;
  for (auto a : all_adherence_areas)
    if (status.goals_met[a]) ++met;
  return schedule.area_bonus * met;
}

inline points in_range_bonus(std::span<const glucose_reading> day_readings, const bg_target& target,
                             const reward_schedule& schedule) {
  auto in_range = std::count_if(day_readings.begin(), day_readings.end(),
                                [&](const auto& r) { return target.contains(r.value_mg_dl); });
  return schedule.in_range_check_bonus * std::min<points>(in_range, schedule.in_range_daily_cap);
}

// Append-only points history. Balance is always derived from the entries.
class reward_ledger {
 public:
  // Throws conflict when (user, reason, source_ref) was already awarded.
  const reward_entry& append(reward_entry entry) {
    if (entry.amount < 0) throw validation_error("reward points must be non-negative");
    if (entry.source_ref.empty()) throw validation_error("reward entry needs a source_ref");
    auto key = std::make_tuple(entry.user, entry.reason, entry.source_ref);
    if (!keys_.insert(key).second) {
      throw conflict("reward " + to_string(entry.reason) + " for " + entry.source_ref + " already awarded");
    }
    entries_.push_back(std::move(entry));
    return entries_.back();
  }

  bool contains(user_id user, const reward_reason& reason, const std::string& source_ref) const {
    return keys_.count(std::make_tuple(user, reason, source_ref)) > 0;
  }

  points balance(user_id user) const {
    points total = 0;
    for (const auto& e : entries_)
      if (e.user == user) total += e.amount;
    return total;
  }

  std::vector<reward_entry> entries_for(user_id user) const {
    std::vector<reward_entry> out;
    std::copy_if(entries_.begin(), entries_.end(), std::back_inserter(out),
                 [&](const auto& e) { return e.user == user; });
    return out;
  }

  const std::vector<reward_entry>& entries() const noexcept { return entries_; }
  std::size_t size() const noexcept { return entries_.size(); }

 private:
  std::vector<reward_entry> entries_;
  std::set<std::tuple<user_id, reward_reason, std::string>> keys_;
};

}  // namespace dsm
