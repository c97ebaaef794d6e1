#pragma once

#include <istream>
#include <map>
#include <string>
#include <vector>

#include "dsm/connectors.hpp"
#include "dsm/service.hpp"

namespace dsm {

// Replay log: CSV with header `date,user,kind,field1,field2,field3`, applied
// row by row in file order through the same application calls the HTTP API
// makes. `date` is YYYY-MM-DD or YYYY-MM-DDTHH:MM:SSZ; `user` is a nickname
// introduced by a `user` row earlier in the file. Field meanings per kind are
// listed in docs/formats.md.
inline constexpr std::string_view replay_header = "date,user,kind,field1,field2,field3";

struct replay_report {
  std::size_t applied = 0;
  std::vector<row_error> errors;
  std::map<std::string, user_id> users;
};

namespace replay_detail {

inline int to_int(std::string_view s, const char* what) {
  int v = 0;
  if (!detail::parse_number(s, v))
    throw validation_error(std::string(what) + " must be an integer, got '" + std::string(s) + "'");
  return v;
}

inline double to_double(std::string_view s, const char* what) {
  double v = 0;
  if (!detail::parse_number(s, v))
    throw validation_error(std::string(what) + " must be a number, got '" + std::string(s) + "'");
  return v;
}

// "a/b/c" into its parts, trimmed.
inline std::vector<std::string_view> parts(std::string_view s) {
  auto out = detail::split(s, '/');
  for (auto& p : out) p = detail::trim(p);
  return out;
}

}  // namespace replay_detail

inline void apply_replay_row(app& a, replay_report& rep, std::string_view date_col, std::string_view nick,
                             std::string_view kind, std::string_view f1, std::string_view f2, std::string_view f3) {
  using namespace replay_detail;
  timestamp at = parse_timestamp(date_col);
  date day = day_of(at);
  std::string nickname(nick);
  if (nickname.empty()) throw validation_error("user column is empty");

  if (kind == "user") {
    if (rep.users.count(nickname)) throw conflict("user '" + nickname + "' already defined");
    user_profile p;
    p.nickname = nickname;
    p.email = std::string(f1);
    p.registered_at = at;
    p.age = 40;
    p.height_cm = 170;
    p.weight_kg = 70;
    if (!f3.empty()) {
      auto v = parts(f3);
      if (v.size() != 5) throw validation_error("profile must be age/gender/height_cm/weight_kg/exercise_status");
      p.age = to_int(v[0], "age");
      p.sex = enum_from_string<gender>(v[1]);
      p.height_cm = to_double(v[2], "height_cm");
      p.weight_kg = to_double(v[3], "weight_kg");
      p.activity = enum_from_string<exercise_status>(v[4]);
    }
    rep.users[nickname] = a.register_user(p, std::string(f2));
    return;
  }

  auto it = rep.users.find(nickname);
  if (it == rep.users.end()) throw not_found("user '" + nickname + "' not defined earlier in the log");
  user_id u = it->second;

  if (kind == "goals") {
    auto range = detail::split(f1, '-');
    if (range.size() != 2) throw validation_error("goal range must be low-high");
    goal_set g;
    g.bg = {to_int(range[0], "bg low"), to_int(range[1], "bg high")};
    if (!f2.empty()) g.daily_steps = to_int(f2, "daily_steps");
    if (!f3.empty()) g.daily_kcal_burn = to_double(f3, "daily_kcal_burn");
    g.effective_from = day;
    auto v = a.set_goals(u, g);
    if (v.verdict != goal_verdict::accepted)
      throw validation_error("goals not accepted" + (v.issues.empty() ? std::string() : ": " + v.issues.front()));
  } else if (kind == "reading") {
    a.add_reading(u, to_int(f1, "bg"), enum_from_string<meal_context>(f2), at);
  } else if (kind == "exercise") {
    exercise_input in;
    in.started_at = at;
    in.duration_min = to_int(f1, "duration_min");
    if (!f2.empty()) in.kcal_burned = to_double(f2, "kcal_burned");
    auto v = parts(f3);
    if (v.size() < 2 || v.size() > 4) throw validation_error("exercise field3 must be before/after[/context[/steps]]");
    in.bg_before = to_int(v[0], "bg_before");
    in.bg_after = to_int(v[1], "bg_after");
    if (v.size() >= 3) in.context = enum_from_string<meal_context>(v[2]);
    if (v.size() == 4) in.steps = to_int(v[3], "steps");
    a.add_exercise(u, in);
  } else if (kind == "steps") {
    step_import one{{{day, to_int(f1, "steps")}}, {}};
    auto r = a.import_steps(u, one);
    if (!r.errors.empty()) throw conflict(r.errors.front().message);
  } else if (kind == "meal") {
    if (!f2.empty()) {
      a.add_meal(u, meal_record{u, at, std::string(f1), to_double(f2, "kcal")});
    } else {
      a.add_meal_from_food(u, std::string(f1), to_double(f3, "grams"), at);
    }
  } else if (kind == "medication") {
    medication_event m{u, at, std::nullopt, std::string(f1)};
    if (!f2.empty()) m.taken_at = parse_timestamp(f2);
    a.add_medication(u, m);
  } else if (kind == "close_day") {
    a.close_day(u, day);
  } else {
    throw validation_error("unknown row kind '" + std::string(kind) + "'");
  }
}

// Bad rows are reported with their line number and skipped; a bad header
// aborts with parse_error.
inline replay_report replay(app& a, std::istream& in) {
  replay_report rep;
  std::string line;
  if (!std::getline(in, line) || detail::trim(line) != replay_header)
    throw parse_error(1, "expected header '" + std::string(replay_header) + "'");
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    auto t = detail::trim(line);
    if (t.empty()) continue;
    auto cols = detail::split(t, ',');
    if (cols.size() != 6) {
      rep.errors.push_back({lineno, "expected 6 columns, got " + std::to_string(cols.size())});
      continue;
    }
    for (auto& c : cols) c = detail::trim(c);
    try {
      apply_replay_row(a, rep, cols[0], cols[1], cols[2], cols[3], cols[4], cols[5]);
      ++rep.applied;
    } catch (const error& e) {
      rep.errors.push_back({lineno, e.what()});
    }
  }
  return rep;
}

}  // namespace dsm
