#pragma once

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "dsm/goals.hpp"
#include "dsm/rewards.hpp"
#include "dsm/security.hpp"

namespace dsm {

struct service_config {
  std::string host = "127.0.0.1";
  int port = 8080;
  // 0 disables the glucometer socket listener.
  int device_port = 0;
  std::string db_path = "dsm.sqlite";
  std::string rules_path;
  std::string foods_path;
  std::string education_path;
  double kcal_per_step = default_kcal_per_step;
  std::chrono::hours token_ttl{24};
  hash_strength password_hashing = hash_strength::interactive;
  reward_schedule schedule;
  band_thresholds thresholds;
  goal_bounds bounds;
  // From DSM_NUTRITION_URL / DSM_NUTRITION_KEY, never from the file.
  std::string nutrition_url;
  std::string nutrition_key;
};

inline service_config config_from_json(const nlohmann::json& j) {
  service_config c;
  try {
    c.host = j.value("host", c.host);
    c.port = j.value("port", c.port);
    c.device_port = j.value("device_port", c.device_port);
    c.db_path = j.value("db_path", c.db_path);
    c.rules_path = j.value("rules_path", c.rules_path);
    c.foods_path = j.value("foods_path", c.foods_path);
    c.education_path = j.value("education_path", c.education_path);
    c.kcal_per_step = j.value("kcal_per_step", c.kcal_per_step);
    c.token_ttl = std::chrono::hours{j.value("token_ttl_hours", static_cast<int>(c.token_ttl.count()))};
    auto hashing = j.value("password_hashing", std::string("interactive"));
    if (hashing == "fast") c.password_hashing = hash_strength::fast;
    else if (hashing != "interactive") throw validation_error("password_hashing must be 'interactive' or 'fast'");
    if (j.contains("schedule")) {
      const auto& s = j["schedule"];
      c.schedule.kcal_per_point = s.value("kcal_per_point", c.schedule.kcal_per_point);
      c.schedule.area_bonus = s.value("area_bonus", c.schedule.area_bonus);
      c.schedule.in_range_check_bonus = s.value("in_range_check_bonus", c.schedule.in_range_check_bonus);
      c.schedule.in_range_daily_cap = s.value("in_range_daily_cap", c.schedule.in_range_daily_cap);
    }
    if (j.contains("thresholds")) {
      const auto& t = j["thresholds"];
      c.thresholds.min_valid = t.value("min_valid", c.thresholds.min_valid);
      c.thresholds.max_valid = t.value("max_valid", c.thresholds.max_valid);
      c.thresholds.low_below = t.value("low_below", c.thresholds.low_below);
      c.thresholds.normal_max = t.value("normal_max", c.thresholds.normal_max);
      c.thresholds.high_max = t.value("high_max", c.thresholds.high_max);
      c.thresholds.elevated_max = t.value("elevated_max", c.thresholds.elevated_max);
    }
    if (j.contains("goal_bounds")) {
      const auto& b = j["goal_bounds"];
      c.bounds.bg_min = b.value("bg_min", c.bounds.bg_min);
      c.bounds.bg_max = b.value("bg_max", c.bounds.bg_max);
      c.bounds.steps_min = b.value("steps_min", c.bounds.steps_min);
      c.bounds.steps_max = b.value("steps_max", c.bounds.steps_max);
      c.bounds.kcal_min = b.value("kcal_min", c.bounds.kcal_min);
      c.bounds.kcal_max = b.value("kcal_max", c.bounds.kcal_max);
    }
  } catch (const nlohmann::json::exception& e) {
    throw validation_error(std::string("bad config: ") + e.what());
  }
  c.schedule.validate();
  const auto& t = c.thresholds;
  if (!(t.min_valid <= t.low_below && t.low_below <= t.normal_max && t.normal_max <= t.high_max &&
        t.high_max <= t.elevated_max && t.elevated_max <= t.max_valid))
    throw validation_error("band thresholds must be ordered");
  return c;
}

inline void apply_environment(service_config& c) {
  if (const char* url = std::getenv("DSM_NUTRITION_URL")) c.nutrition_url = url;
  if (const char* key = std::getenv("DSM_NUTRITION_KEY")) c.nutrition_key = key;
}

inline service_config load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw not_found("cannot open config " + path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw validation_error("config " + path + " is not JSON: " + e.what());
  }
  auto c = config_from_json(j);
  apply_environment(c);
  return c;
}

}  // namespace dsm
