#pragma once

#include <memory>
#include <optional>

#include "dsm/config.hpp"
#include "dsm/nutrition_http.hpp"
#include "dsm/service.hpp"
#include "dsm/sqlite_storage.hpp"

namespace dsm {

// Everything `serve`, `replay` and `seed` need, wired from one config.
struct runtime {
  service_config config;
  std::unique_ptr<storage> store;
  std::unique_ptr<app> application;
};

inline rule_table rules_for(const service_config& c) {
  return c.rules_path.empty() ? default_rule_table() : load_rules_file(c.rules_path);
}

inline education_catalog education_for(const service_config& c) {
  return c.education_path.empty() ? default_education_catalog() : load_education_catalog(c.education_path);
}

// Local catalog from foods_path; the remote source only when a URL is set.
inline std::optional<nutrition_lookup> nutrition_for(const service_config& c) {
  if (c.foods_path.empty() && c.nutrition_url.empty()) return std::nullopt;
  food_catalog catalog = c.foods_path.empty() ? food_catalog{} : food_catalog::load_file(c.foods_path);
  remote_food_source remote;
  if (!c.nutrition_url.empty()) remote = http_food_source(c.nutrition_url, c.nutrition_key);
  return nutrition_lookup(std::move(catalog), std::move(remote));
}

inline runtime make_runtime(service_config c, std::unique_ptr<storage> store = nullptr) {
  runtime rt;
  rt.config = std::move(c);
  rt.store = store ? std::move(store) : std::make_unique<sqlite_storage>(rt.config.db_path);
  rt.application = std::make_unique<app>(*rt.store, rt.config, rules_for(rt.config), education_for(rt.config),
                                         nutrition_for(rt.config));
  return rt;
}

}  // namespace dsm
