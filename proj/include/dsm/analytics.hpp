#pragma once

#include <array>
#include <cstdio>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dsm/goals.hpp"
#include "dsm/rewards.hpp"

namespace dsm {

struct dated_value {
  date day{};
  double value = 0;
};

// Mean of the values dated inside `week`; nullopt when none are.
inline std::optional<double> weekly_average(std::span<const dated_value> entries, date_range week) {
  if (week.days() != 7) throw validation_error("a week must span 7 consecutive days");
  double sum = 0;
  std::size_t n = 0;
  for (const auto& e : entries) {
    if (week.contains(e.day)) {
      sum += e.value;
      ++n;
    }
  }
  if (n == 0) return std::nullopt;
  return sum / static_cast<double>(n);
}

inline constexpr int study_window_days = 21;

enum class denominator_mode {
  // Always divide by the window length, whether or not every day has data.
  paper_literal,
  per_entry,
};

inline std::string_view to_string(denominator_mode m) {
  return m == denominator_mode::paper_literal ? "paper_literal" : "per_entry";
}

// `daily_values` holds one value per day that has data within a 21-day window.
inline std::optional<double> user_average_21(std::span<const double> daily_values, denominator_mode mode) {
  if (daily_values.size() > static_cast<std::size_t>(study_window_days))
    throw validation_error("more daily values than days in the window");
  // A window without any data has no average in either mode.
  if (daily_values.empty()) return std::nullopt;
  double sum = 0;
  for (double v : daily_values) sum += v;
  if (mode == denominator_mode::paper_literal) return sum / study_window_days;
  return sum / static_cast<double>(daily_values.size());
}

// --- per-user history snapshot ----------------------------------------------

struct user_history {
  user_id user = 0;
  std::vector<glucose_reading> readings;
  std::vector<exercise_session> sessions;
  std::vector<meal_record> meals;
  std::vector<reward_entry> rewards;
  std::map<date, std::int64_t> tracker_steps;
};

enum class metric { bg, bg_before, bg_after, exercise_min, kcal_out, steps, kcal_in, reward_points };

inline constexpr std::array all_metrics{metric::bg,      metric::bg_before, metric::bg_after,
                                        metric::exercise_min, metric::kcal_out, metric::steps,
                                        metric::kcal_in, metric::reward_points};

inline std::string_view to_string(metric m) {
  switch (m) {
    case metric::bg: return "bg";
    case metric::bg_before: return "bg_before";
    case metric::bg_after: return "bg_after";
    case metric::exercise_min: return "exercise_min";
    case metric::kcal_out: return "kcal_out";
    case metric::steps: return "steps";
    case metric::kcal_in: return "kcal_in";
    case metric::reward_points: return "reward_points";
  }
  return "?";
}

// Glucose metrics yield one entry per measurement; the others one entry per
// day with activity, holding that day's total.
inline std::vector<dated_value> metric_entries(const user_history& h, metric m,
                                               double kcal_per_step = default_kcal_per_step) {
  std::vector<dated_value> out;
  std::map<date, double> daily;
  switch (m) {
    case metric::bg:
      for (const auto& r : h.readings) out.push_back({day_of(r.taken_at), static_cast<double>(r.value_mg_dl)});
      break;
    case metric::bg_before:
      for (const auto& s : h.sessions)
        if (s.bg_before) out.push_back({day_of(s.started_at), static_cast<double>(s.bg_before->value_mg_dl)});
      break;
    case metric::bg_after:
      for (const auto& s : h.sessions)
        if (s.bg_after) out.push_back({day_of(s.started_at), static_cast<double>(s.bg_after->value_mg_dl)});
      break;
    case metric::exercise_min:
      for (const auto& s : h.sessions) daily[day_of(s.started_at)] += s.duration_min;
      break;
    case metric::kcal_out:
    case metric::steps: {
      std::map<date, day_logs> days;
      for (const auto& s : h.sessions) days[day_of(s.started_at)].sessions.push_back(s);
      for (const auto& [d, n] : h.tracker_steps) days[d].tracker_steps = n;
      for (const auto& [d, logs] : days)
        daily[d] = m == metric::steps ? static_cast<double>(day_steps(logs)) : day_kcal_burned(logs, kcal_per_step);
      break;
    }
    case metric::kcal_in:
      for (const auto& meal : h.meals) daily[day_of(meal.eaten_at)] += meal.kcal;
      break;
    case metric::reward_points:
      for (const auto& e : h.rewards) daily[day_of(e.earned_at)] += static_cast<double>(e.amount);
      break;
  }
  for (const auto& [d, v] : daily) out.push_back({d, v});
  return out;
}

struct weekly_stats {
  int week_index = 0;
  date_range days{};
  std::optional<double> avg_bg_before;
  std::optional<double> avg_bg_after;
  std::optional<double> avg_reward_points;
  std::optional<double> avg_exercise_min;
  std::size_t n_bg_before = 0, n_bg_after = 0, n_reward_points = 0, n_exercise_min = 0;
};

namespace detail {

inline std::size_t count_in(std::span<const dated_value> entries, date_range r) {
  std::size_t n = 0;
  for (const auto& e : entries)
    if (r.contains(e.day)) ++n;
  return n;
}

}  // namespace detail

// Consecutive 7-day weeks anchored at `study_start`, pooling the entries of
// every history given. Daily totals stay per user.
inline std::vector<weekly_stats> weekly_breakdown(std::span<const user_history> users, date study_start,
                                                  int weeks = 3) {
  std::array<std::vector<dated_value>, 4> pooled;
  constexpr std::array<metric, 4> tracked{metric::bg_before, metric::bg_after, metric::reward_points,
                                          metric::exercise_min};
  for (const auto& h : users) {
    for (std::size_t i = 0; i < tracked.size(); ++i) {
      auto e = metric_entries(h, tracked[i]);
      pooled[i].insert(pooled[i].end(), e.begin(), e.end());
    }
  }
  std::vector<weekly_stats> out;
  for (int w = 0; w < weeks; ++w) {
    date_range r{study_start + std::chrono::days{7 * w}, study_start + std::chrono::days{7 * w + 6}};
    out.push_back({w + 1, r, weekly_average(pooled[0], r), weekly_average(pooled[1], r),
                   weekly_average(pooled[2], r), weekly_average(pooled[3], r), detail::count_in(pooled[0], r),
                   detail::count_in(pooled[1], r), detail::count_in(pooled[2], r), detail::count_in(pooled[3], r)});
  }
  return out;
}

inline std::vector<weekly_stats> weekly_breakdown(const user_history& h, date study_start, int weeks = 3) {
  return weekly_breakdown(std::span<const user_history>(&h, 1), study_start, weeks);
}

struct user_stats {
  user_id user = 0;
  denominator_mode mode = denominator_mode::paper_literal;
  std::optional<double> avg_bg_before;
  std::optional<double> avg_bg_after;
  std::optional<double> avg_reward_points;
  std::optional<double> avg_exercise_min;
};

// Per-day values over the 21-day window starting at `study_start`. Days with
// several glucose measurements contribute their mean.
inline std::vector<double> daily_values_21(const user_history& h, metric m, date study_start) {
  date_range window{study_start, study_start + std::chrono::days{study_window_days - 1}};
  std::map<date, std::pair<double, int>> days;
  for (const auto& e : metric_entries(h, m)) {
    if (!window.contains(e.day)) continue;
    auto& [sum, n] = days[e.day];
    sum += e.value;
    ++n;
  }
  std::vector<double> out;
  for (const auto& [d, sn] : days) out.push_back(sn.first / sn.second);
  return out;
}

inline user_stats user_stats_21(const user_history& h, date study_start, denominator_mode mode) {
  auto avg = [&](metric m) { return user_average_21(daily_values_21(h, m, study_start), mode); };
  return {h.user, mode, avg(metric::bg_before), avg(metric::bg_after), avg(metric::reward_points),
          avg(metric::exercise_min)};
}

// --- dashboard series --------------------------------------------------------

enum class granularity { daily, weekly, monthly };

inline std::string_view to_string(granularity g) {
  switch (g) {
    case granularity::daily: return "daily";
    case granularity::weekly: return "weekly";
    case granularity::monthly: return "monthly";
  }
  return "?";
}

template <>
inline granularity enum_from_string<granularity>(std::string_view s) {
  for (auto g : {granularity::daily, granularity::weekly, granularity::monthly})
    if (to_string(g) == s) return g;
  throw validation_error("unknown granularity '" + std::string(s) + "'");
}

struct bucket {
  date_range days{};
  std::optional<double> value;
  std::size_t n = 0;
};

struct series_bundle {
  user_id user = 0;
  granularity grain = granularity::daily;
  date_range range{};
  std::map<metric, std::vector<bucket>> series;
};

// Bucket boundaries covering `range` exactly. Weeks are anchored at
// range.first, months follow the calendar; the trailing bucket may be short.
inline std::vector<date_range> bucket_ranges(date_range range, granularity g) {
  std::vector<date_range> out;
  if (range.last < range.first) return out;
  date start = range.first;
  while (start <= range.last) {
    date end;
    switch (g) {
      case granularity::daily: end = start; break;
      case granularity::weekly: end = start + std::chrono::days{6}; break;
      case granularity::monthly: {
        std::chrono::year_month_day ymd{start};
        auto next = std::chrono::year_month_day{ymd.year() / ymd.month() / 1} + std::chrono::months{1};
        end = date{next} - std::chrono::days{1};
        break;
      }
    }
    if (end > range.last) end = range.last;
    out.push_back({start, end});
    start = end + std::chrono::days{1};
  }
  return out;
}

inline series_bundle dashboard_series(const user_history& h, date_range range, granularity g,
                                      double kcal_per_step = default_kcal_per_step) {
  series_bundle out{h.user, g, range, {}};
  auto ranges = bucket_ranges(range, g);
  for (auto m : all_metrics) {
    auto entries = metric_entries(h, m, kcal_per_step);
    auto& s = out.series[m];
    for (const auto& r : ranges) {
      double sum = 0;
      std::size_t n = 0;
      for (const auto& e : entries) {
        if (r.contains(e.day)) {
          sum += e.value;
          ++n;
        }
      }
      s.push_back({r, n ? std::optional<double>{sum / static_cast<double>(n)} : std::nullopt, n});
    }
  }
  return out;
}

// --- CSV export --------------------------------------------------------------

inline constexpr std::string_view analytics_csv_header = "user_id,bucket_start,metric,value,n";

inline std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

// One row per (metric, bucket); a bucket without data has an empty value.
inline void write_analytics_csv(std::ostream& out, std::span<const series_bundle> bundles, bool header = true) {
  if (header) out << analytics_csv_header << '\n';
  for (const auto& b : bundles) {
    for (auto m : all_metrics) {
      auto it = b.series.find(m);
      if (it == b.series.end()) continue;
      for (const auto& bk : it->second) {
        out << b.user << ',' << format_date(bk.days.first) << ',' << to_string(m) << ','
            << (bk.value ? format_number(*bk.value) : std::string{}) << ',' << bk.n << '\n';
      }
    }
  }
}

}  // namespace dsm
