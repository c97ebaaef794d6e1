#pragma once

#include <algorithm>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dsm/recommendation.hpp"

namespace dsm {

struct scenario {
  std::string id;
  phase when = phase::pre_exercise;
  meal_context context = meal_context::fasting;
  int bg = 0;
  std::optional<exercise_session> session;
  exercise_action expected_action = exercise_action::block;
  glycemic_band expected_band = glycemic_band::normal;
};

struct scenario_score {
  std::string scenario_id;
  int score = 0;
  exercise_action engine_action = exercise_action::block;
  glycemic_band engine_band = glycemic_band::normal;
  std::string note;
};

struct skipped_scenario {
  std::size_t line = 0;
  std::string note;
};

struct evaluation_report {
  std::vector<scenario_score> scores;
  std::vector<skipped_scenario> skipped;
  double proficiency_pct = 0;
  double efficiency_pct = 0;
};

// Signed sum of scores over N, as a percentage.
inline double proficiency(std::span<const scenario_score> scores) {
  if (scores.empty()) throw no_data("proficiency is undefined for an empty score list");
  long sum = 0;
  for (const auto& s : scores) sum += s.score;
  return 100.0 * static_cast<double>(sum) / static_cast<double>(scores.size());
}

// Count of +1 scores over N, as a percentage.
inline double efficiency(std::span<const scenario_score> scores) {
  if (scores.empty()) throw no_data("efficiency is undefined for an empty score list");
  auto hits = std::count_if(scores.begin(), scores.end(), [](const auto& s) { return s.score == 1; });
  return 100.0 * static_cast<double>(hits) / static_cast<double>(scores.size());
}

struct engine_output {
  recommendation rec;
  glycemic_band band = glycemic_band::normal;
};

// Rendered message -> ids of every scenario that received it.
using output_index = std::map<std::string, std::set<std::string>>;

inline engine_output run_engine(const scenario& s, const rule_table& table = default_rule_table()) {
  glucose_reading reading{0, s.bg, s.context, {}};
  auto rec = recommend(s.when, reading, s.session, table);
  return {rec, rec.key.band};
}

// +1 when action and band match. 0 when the action matches but the same
// rendered message also went to a scenario expecting a different outcome,
// or when only the band is off. -1 when the action differs.
inline scenario_score score_scenario(const scenario& s, const engine_output& out, const output_index& index,
                                     const std::map<std::string, const scenario*>& by_id) {
  scenario_score sc{s.id, 0, out.rec.action, out.band, {}};
  if (out.rec.action != s.expected_action) {
    sc.score = -1;
    sc.note = "expected " + std::string(to_string(s.expected_action)) + ", engine gave " +
              std::string(to_string(out.rec.action));
    return sc;
  }
  if (auto it = index.find(out.rec.message); it != index.end()) {
    for (const auto& other_id : it->second) {
      if (other_id == s.id) continue;
      const scenario* other = by_id.at(other_id);
      if (other->expected_action != s.expected_action || other->expected_band != s.expected_band) {
        sc.note = "identical recommendation also produced for " + other_id;
        return sc;
      }
    }
  }
  if (out.band != s.expected_band) {
    sc.note = "band " + std::string(to_string(out.band)) + " differs from expected " +
              std::string(to_string(s.expected_band));
    return sc;
  }
  sc.score = 1;
  return sc;
}

// Scenario ids must be unique.
inline evaluation_report evaluate(std::span<const scenario> scenarios, const rule_table& table = default_rule_table()) {
  std::map<std::string, const scenario*> by_id;
  for (const auto& s : scenarios)
    if (!by_id.emplace(s.id, &s).second) throw validation_error("duplicate scenario id " + s.id);

  std::vector<engine_output> outputs;
  outputs.reserve(scenarios.size());
  output_index index;
  for (const auto& s : scenarios) {
    outputs.push_back(run_engine(s, table));
    index[outputs.back().rec.message].insert(s.id);
  }

  evaluation_report report;
  for (std::size_t i = 0; i < scenarios.size(); ++i)
    report.scores.push_back(score_scenario(scenarios[i], outputs[i], index, by_id));
  report.proficiency_pct = proficiency(report.scores);
  report.efficiency_pct = efficiency(report.scores);
  return report;
}

// --- corpus I/O --------------------------------------------------------------

inline nlohmann::json scenario_to_json(const scenario& s) {
  nlohmann::json j{{"id", s.id},
                   {"phase", to_string(s.when)},
                   {"context", to_string(s.context)},
                   {"bg", s.bg},
                   {"expected_action", to_string(s.expected_action)},
                   {"expected_band", to_string(s.expected_band)}};
  if (s.session) {
    j["session"] = {{"duration_min", s.session->duration_min},
                    {"kcal_burned", s.session->kcal_burned},
                    {"bg_before", s.session->bg_before ? s.session->bg_before->value_mg_dl : 0}};
  }
  return j;
}

// Throws validation_error for schema problems; the corpus reader turns those
// into skipped entries.
inline scenario scenario_from_json(const nlohmann::json& j) {
  try {
    scenario s;
    s.id = j.at("id").get<std::string>();
    if (s.id.empty()) throw validation_error("empty scenario id");
    s.when = enum_from_string<phase>(j.at("phase").get<std::string>());
    s.context = enum_from_string<meal_context>(j.at("context").get<std::string>());
    s.bg = j.at("bg").get<int>();
    check_reading_value(s.bg);
    s.expected_action = enum_from_string<exercise_action>(j.at("expected_action").get<std::string>());
    s.expected_band = enum_from_string<glycemic_band>(j.at("expected_band").get<std::string>());
    if (!band_reachable(s.context, s.expected_band)) throw validation_error("expected band unreachable for context");
    if (j.contains("session")) {
      const auto& js = j.at("session");
      exercise_session sess;
      sess.duration_min = js.at("duration_min").get<int>();
      sess.kcal_burned = js.at("kcal_burned").get<double>();
      sess.bg_before = glucose_reading{0, js.at("bg_before").get<int>(), s.context, {}};
      check_reading_value(sess.bg_before->value_mg_dl);
      s.session = sess;
    }
    if (s.when == phase::post_exercise && !s.session) throw validation_error("post-exercise scenario needs a session");
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw validation_error(e.what());
  } catch (const rejected_reading& e) {
    throw validation_error(e.what());
  }
}

struct corpus {
  std::vector<scenario> scenarios;
  std::vector<skipped_scenario> skipped;
};

// JSON-lines. Blank lines are ignored; a line that is not JSON aborts with
// its line number; a JSON line failing the schema is skipped with a note.
inline corpus read_corpus(std::istream& in) {
  corpus c;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw parse_error(lineno, std::string("not JSON: ") + e.what());
    }
    try {
      c.scenarios.push_back(scenario_from_json(j));
    } catch (const validation_error& e) {
      c.skipped.push_back({lineno, e.what()});
    }
  }
  if (c.scenarios.empty()) throw parse_error(lineno, "corpus contains no scenarios");
  return c;
}

inline evaluation_report run_corpus(const std::string& path, const rule_table& table = default_rule_table()) {
  std::ifstream in(path);
  if (!in) throw not_found("cannot open corpus " + path);
  auto c = read_corpus(in);
  auto report = evaluate(c.scenarios, table);
  report.skipped = std::move(c.skipped);
  return report;
}

inline nlohmann::json report_to_json(const evaluation_report& r) {
  nlohmann::json scores = nlohmann::json::array();
  for (const auto& s : r.scores) {
    scores.push_back({{"scenario_id", s.scenario_id},
                      {"score", s.score},
                      {"engine_action", to_string(s.engine_action)},
                      {"engine_band", to_string(s.engine_band)},
                      {"note", s.note}});
  }
  nlohmann::json skipped = nlohmann::json::array();
  for (const auto& s : r.skipped) skipped.push_back({{"line", s.line}, {"note", s.note}});
  return {{"n", r.scores.size()},
          {"proficiency_pct", r.proficiency_pct},
          {"efficiency_pct", r.efficiency_pct},
          {"scores", std::move(scores)},
          {"skipped", std::move(skipped)}};
}

// Every rule cell as a scenario whose expectation is the rule itself.
inline std::vector<scenario> scenarios_from_rule_table(const rule_table& table = default_rule_table(),
                                                       const band_thresholds& t = {}) {
  auto representative = [&](meal_context c, glycemic_band b) {
    switch (b) {
      case glycemic_band::low: return t.low_below - 5;
      case glycemic_band::normal: return (t.low_below + t.normal_max) / 2;
      case glycemic_band::high: return (t.normal_max + t.high_max) / 2;
      case glycemic_band::elevated: return (t.high_max + t.elevated_max) / 2;
      case glycemic_band::critically_high:
        return (c == meal_context::fasting ? t.high_max : t.elevated_max) + 20;
    }
    return t.normal_max;
  };
  std::vector<scenario> out;
  int serial = 0;
  for (const auto& r : table.rules()) {
    ++serial;
    scenario s;
    s.id = rule_table::describe(r.key);
    s.when = r.key.when;
    s.context = r.key.context;
    s.bg = representative(r.key.context, r.key.band);
    if (s.when == phase::post_exercise) {
      exercise_session sess;
      // Distinct durations keep cells that share wording from rendering
      // byte-identical messages.
      sess.duration_min = 20 + serial;
      sess.kcal_burned = 120;
      sess.bg_before = glucose_reading{0, s.bg + 10, s.context, {}};
      s.session = sess;
    }
    s.expected_action = r.action;
    s.expected_band = r.key.band;
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace dsm
