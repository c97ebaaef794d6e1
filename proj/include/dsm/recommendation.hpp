#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include <nlohmann/json.hpp>

#include "dsm/domain.hpp"

namespace dsm {

enum class phase { pre_exercise, post_exercise };

inline constexpr std::array all_phases{phase::pre_exercise, phase::post_exercise};

enum class exercise_action { block, allow_light, allow_moderate, allow_light_to_moderate, warn_block };

inline constexpr bool permits_exercise(exercise_action a) {
  return a != exercise_action::block && a != exercise_action::warn_block;
}

inline std::string_view to_string(phase p) {
  return p == phase::pre_exercise ? "pre_exercise" : "post_exercise";
}

inline std::string_view to_string(exercise_action a) {
  switch (a) {
    case exercise_action::block: return "block";
    case exercise_action::allow_light: return "allow_light";
    case exercise_action::allow_moderate: return "allow_moderate";
    case exercise_action::allow_light_to_moderate: return "allow_light_to_moderate";
    case exercise_action::warn_block: return "warn_block";
  }
  return "?";
}

template <>
inline phase enum_from_string<phase>(std::string_view s) {
  for (auto p : all_phases)
    if (to_string(p) == s) return p;
  throw validation_error("unknown phase '" + std::string(s) + "'");
}

template <>
inline exercise_action enum_from_string<exercise_action>(std::string_view s) {
  for (auto a : {exercise_action::block, exercise_action::allow_light, exercise_action::allow_moderate,
                 exercise_action::allow_light_to_moderate, exercise_action::warn_block})
    if (to_string(a) == s) return a;
  throw validation_error("unknown exercise action '" + std::string(s) + "'");
}

struct rule_key {
  phase when = phase::pre_exercise;
  meal_context context = meal_context::fasting;
  glycemic_band band = glycemic_band::normal;

  friend auto operator<=>(const rule_key&, const rule_key&) = default;
};

struct recommendation_rule {
  rule_key key;
  exercise_action action = exercise_action::block;
  std::string message_template;
  bool promises_reward = false;
  bool advises_hydration = false;
  bool advises_doctor = false;
};

struct recommendation {
  rule_key key;
  std::string message;
  exercise_action action = exercise_action::block;
  bool reward_promised = false;
};

// --- message templates -----------------------------------------------------

struct message_values {
  std::optional<int> bg_drop;
  std::optional<int> duration_min;
  std::optional<double> kcal;
};

inline constexpr std::array<std::string_view, 3> known_placeholders{"bg_drop", "duration_min", "kcal"};

// Names of every {placeholder} in the template, in order of appearance.
inline std::vector<std::string> placeholders_in(std::string_view tmpl) {
  std::vector<std::string> out;
  for (std::size_t pos = 0; (pos = tmpl.find('{', pos)) != std::string_view::npos;) {
    auto close = tmpl.find('}', pos);
    if (close == std::string_view::npos) throw template_error("unterminated placeholder in template");
    out.emplace_back(tmpl.substr(pos + 1, close - pos - 1));
    pos = close + 1;
  }
  return out;
}

// Integers rendered as-is (bg_drop keeps its sign); kcal rounds half-up.
inline std::string render_message(std::string_view tmpl, const message_values& values) {
  std::string out;
  out.reserve(tmpl.size() + 16);
  std::size_t pos = 0;
  while (pos < tmpl.size()) {
    auto open = tmpl.find('{', pos);
    if (open == std::string_view::npos) {
      out.append(tmpl.substr(pos));
      break;
    }
    out.append(tmpl.substr(pos, open - pos));
    auto close = tmpl.find('}', open);
    if (close == std::string_view::npos) throw template_error("unterminated placeholder in template");
    auto name = tmpl.substr(open + 1, close - open - 1);
    if (name == "bg_drop" && values.bg_drop) {
      out += std::to_string(*values.bg_drop);
    } else if (name == "duration_min" && values.duration_min) {
      out += std::to_string(*values.duration_min);
    } else if (name == "kcal" && values.kcal) {
      out += std::to_string(static_cast<std::int64_t>(std::floor(*values.kcal + 0.5)));
    } else {
      throw template_error("no value for placeholder {" + std::string(name) + "}");
    }
    pos = close + 1;
  }
  return out;
}

// --- rule table --------------------------------------------------------------

class rule_table {
 public:
  static constexpr int format_version = 1;

  // Throws validation_error unless the rules cover every reachable
  // (phase, context, band) exactly once and nothing else.
  explicit rule_table(std::vector<recommendation_rule> rules) : rules_(std::move(rules)) {
    std::set<rule_key> seen;
    for (const auto& r : rules_) {
      if (!band_reachable(r.key.context, r.key.band)) {
        throw validation_error("rule for unreachable cell " + describe(r.key));
      }
      if (!seen.insert(r.key).second) throw validation_error("duplicate rule for " + describe(r.key));
      auto names = placeholders_in(r.message_template);
      if (r.key.when == phase::pre_exercise && !names.empty()) {
        throw validation_error("pre-exercise template has placeholders: " + describe(r.key));
      }
      for (const auto& n : names) {
        if (std::find(known_placeholders.begin(), known_placeholders.end(), n) == known_placeholders.end()) {
          throw validation_error("unknown placeholder {" + n + "} in " + describe(r.key));
        }
      }
      if (r.promises_reward && !permits_exercise(r.action)) {
        throw validation_error("blocking rule promises a reward: " + describe(r.key));
      }
      slot(r.key) = &r - rules_.data();
    }
    for (auto p : all_phases)
      for (auto c : all_meal_contexts)
        for (auto b : all_glycemic_bands)
          if (band_reachable(c, b) && !seen.count(rule_key{p, c, b}))
            throw validation_error("rule table is not total, missing " + describe(rule_key{p, c, b}));
  }

  const recommendation_rule& lookup(const rule_key& key) const {
    auto idx = index_[static_cast<int>(key.when)][static_cast<int>(key.context)][static_cast<int>(key.band)];
    if (idx < 0) throw not_found("no rule for " + describe(key));
    return rules_[static_cast<std::size_t>(idx)];
  }

  const std::vector<recommendation_rule>& rules() const noexcept { return rules_; }

  static std::string describe(const rule_key& k) {
    return std::string(to_string(k.when)) + "/" + std::string(to_string(k.context)) + "/" +
           std::string(to_string(k.band));
  }

 private:
  std::ptrdiff_t& slot(const rule_key& k) {
    return index_[static_cast<int>(k.when)][static_cast<int>(k.context)][static_cast<int>(k.band)];
  }

  std::vector<recommendation_rule> rules_;
  std::ptrdiff_t index_[2][3][5] = {{{-1, -1, -1, -1, -1}, {-1, -1, -1, -1, -1}, {-1, -1, -1, -1, -1}},
                                    {{-1, -1, -1, -1, -1}, {-1, -1, -1, -1, -1}, {-1, -1, -1, -1, -1}}};
};

namespace detail {

struct cell {
  glycemic_band band;
  exercise_action action;
  const char* pre;
  const char* post;
  bool pre_reward, post_reward;
  bool pre_hydration, post_hydration;
  bool pre_doctor, post_doctor;
};

// clang-format off
inline constexpr cell fasting_cells[] = {
  {glycemic_band::low, exercise_action::block,
   "Your BG is critically low. Please avoid exercise and consult a healthcare professional.",
   "Post-exercise hypoglycemia. Please consult a doctor. Stay hydrated and avoid further exercise",
   false, false, false, true, true, true},
  {glycemic_band::normal, exercise_action::allow_light,
   "Great job! Start your exercise session with light intensity based on your calorie. You will earn points for completing the exercise.",
   "Well done! Your BG dropped to {bg_drop} mg/dL after {duration_min} min of exercise. Keep up the good work and monitor levels, especially after meals and exercise. Burned calories: {kcal} kcal. Stay hydrated.",
   true, true, false, true, false, false},
  {glycemic_band::high, exercise_action::allow_moderate,
   "(Hyperglycemia) Start moderate exercise depending on your calories but monitor exercise closely. You will earn points after completing the exercise.",
   "Well done! Your BG dropped to {bg_drop} mg/dL after {duration_min} min of exercise. Burned calories: {kcal} kcal. Stay hydrated.",
   true, true, false, true, false, false},
  {glycemic_band::critically_high, exercise_action::warn_block,
   "Your BG is critically high. Please avoid exercise and check for ketones. You should consult a doctor before engaging in any physical activity due to the risk of Ketoacidosis.",
   "Your BG is still very high, avoid further exercise and check for ketones. Stay hydrated and consult a doctor.",
   false, false, false, true, true, true},
};

inline constexpr cell meal_cells[] = {
  {glycemic_band::low, exercise_action::block,
   "Your BG is critically low. Please avoid exercise until your BG returns to a safe range.",
   "Post-exercise hypoglycemia, Your BG dropped to {bg_drop} mg/dL after {duration_min} min of exercise. Burned calories: {kcal} kcal. Please avoid further exercise and stay hydrated. Consult a doctor if necessary.",
   false, false, false, true, false, true},
  {glycemic_band::normal, exercise_action::allow_light_to_moderate,
   "You can start light to moderate exercise based on your calorie. Earn points after completing the exercise.",
   "Well done! Your BG dropped to {bg_drop} mg/dL after {duration_min} min of exercise. Burned calories: {kcal} kcal. Stay hydrated.",
   true, true, false, true, false, false},
  {glycemic_band::high, exercise_action::allow_moderate,
   "Great job! Safe to exercise. Start moderate exercise depending on your calories. You will earn points after completing the exercise.",
   "Well done! Your BG dropped to {bg_drop} mg/dL after {duration_min} min of exercise. Keep monitoring to ensure it does not rise too much. Burned calories: {kcal} kcal and stay hydrated.",
   true, true, false, true, false, false},
  {glycemic_band::elevated, exercise_action::allow_light_to_moderate,
   "Your BG is elevated. It is safe to exercise but avoid intense activity. Light to moderate exercise to help bring your BG downed. Earn reward for completing exercise.",
   "Good job on completing exercise! Your BG is still elevated, but exercise has helped. Continue monitoring to ensure it does not spike further.",
   true, true, false, false, false, false},
  {glycemic_band::critically_high, exercise_action::warn_block,
   "Your BG is critically high. Please avoid exercise and check for ketones You should consult a healthcare professionals before engaging in any physical activity.",
   "Your BG is still critically high. Please avoid further activity. Consumes plenty of fluid and consult a doctor. Consider adjustment to your medication and diet.",
   false, false, false, true, true, true},
};
// clang-format on

template <std::size_t N>
void emit_cells(std::vector<recommendation_rule>& out, meal_context ctx, const cell (&cells)[N]) {
  for (const auto& c : cells) {
    out.push_back({{phase::pre_exercise, ctx, c.band}, c.action, c.pre, c.pre_reward, c.pre_hydration, c.pre_doctor});
    out.push_back({{phase::post_exercise, ctx, c.band}, c.action, c.post, c.post_reward, c.post_hydration, c.post_doctor});
  }
}

}  // namespace detail

// The canonical exercise guidance table. Pre-meal and post-meal share one
// block of wording and are emitted as two keyed copies.
inline std::vector<recommendation_rule> canonical_rules() {
  std::vector<recommendation_rule> out;
  detail::emit_cells(out, meal_context::fasting, detail::fasting_cells);
  detail::emit_cells(out, meal_context::pre_meal, detail::meal_cells);
  detail::emit_cells(out, meal_context::post_meal, detail::meal_cells);
  return out;
}

inline const rule_table& default_rule_table() {
  static const rule_table table{canonical_rules()};
  return table;
}

// --- rules file --------------------------------------------------------------

inline nlohmann::json rules_to_json(const rule_table& table) {
  nlohmann::json rules = nlohmann::json::array();
  for (const auto& r : table.rules()) {
    rules.push_back({{"phase", to_string(r.key.when)},
                     {"context", to_string(r.key.context)},
                     {"band", to_string(r.key.band)},
                     {"action", to_string(r.action)},
                     {"template", r.message_template},
                     {"promises_reward", r.promises_reward},
                     {"advises_hydration", r.advises_hydration},
                     {"advises_doctor", r.advises_doctor}});
  }
  return {{"version", rule_table::format_version}, {"rules", std::move(rules)}};
}

inline rule_table rules_from_json(const nlohmann::json& doc) {
  try {
    if (doc.at("version").get<int>() != rule_table::format_version) {
      throw validation_error("unsupported rules file version " + doc.at("version").dump());
    }
    std::vector<recommendation_rule> rules;
    for (const auto& j : doc.at("rules")) {
      recommendation_rule r;
      r.key.when = enum_from_string<phase>(j.at("phase").get<std::string>());
      r.key.context = enum_from_string<meal_context>(j.at("context").get<std::string>());
      r.key.band = enum_from_string<glycemic_band>(j.at("band").get<std::string>());
      r.action = enum_from_string<exercise_action>(j.at("action").get<std::string>());
      r.message_template = j.at("template").get<std::string>();
      r.promises_reward = j.at("promises_reward").get<bool>();
      r.advises_hydration = j.value("advises_hydration", false);
      r.advises_doctor = j.value("advises_doctor", false);
      rules.push_back(std::move(r));
    }
    return rule_table{std::move(rules)};
  } catch (const nlohmann::json::exception& e) {
    throw validation_error(std::string("malformed rules file: ") + e.what());
  }
}

inline rule_table load_rules_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw not_found("cannot open rules file " + path);
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw validation_error("rules file " + path + " is not JSON: " + e.what());
  }
  return rules_from_json(doc);
}

// --- engine ------------------------------------------------------------------

// Post-exercise needs the session: bg_before is required, bg_after falls back
// to `reading` itself (the measurement taken when the session ended).
inline recommendation recommend(phase when, const glucose_reading& reading,
                                const std::optional<exercise_session>& session = std::nullopt,
                                const rule_table& table = default_rule_table(),
                                const band_thresholds& thresholds = {}) {
  rule_key key{when, reading.context, classify_bg(reading, thresholds)};
  const auto& rule = table.lookup(key);
  message_values values;
  if (when == phase::post_exercise) {
    if (!session) throw incomplete_input("post-exercise recommendation requires an exercise session");
    if (!session->bg_before) throw incomplete_input("post-exercise recommendation requires bg_before");
    int after = session->bg_after ? session->bg_after->value_mg_dl : reading.value_mg_dl;
    values.bg_drop = session->bg_before->value_mg_dl - after;
    values.duration_min = session->duration_min;
    values.kcal = session->kcal_burned;
  }
  return {key, render_message(rule.message_template, values), rule.action, rule.promises_reward};
}

}  // namespace dsm
