#pragma once

#include <chrono>
#include <memory>
#include <string>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "dsm/connectors.hpp"

namespace dsm {

// Remote nutrition database over HTTP.
//
//   GET <base_url>/foods/search?query=<q>&api_key=<key>
//   200 {"foods": [{"name": "...", "kcal_per_100g": 130.0}, ...]}
//
// The first entry wins; an empty list means no match. Non-200 statuses,
// malformed bodies and timeouts throw, which makes the lookup fall back to the
// local catalog.
inline remote_food_source http_food_source(const std::string& base_url, const std::string& api_key,
                                           std::chrono::milliseconds timeout = std::chrono::milliseconds{2000}) {
  auto client = std::make_shared<httplib::Client>(base_url);
  client->set_connection_timeout(timeout);
  client->set_read_timeout(timeout);
  client->set_write_timeout(timeout);
  return [client, api_key](std::string_view query) -> std::optional<food_record> {
    httplib::Params params{{"query", std::string(query)}, {"api_key", api_key}};
    auto res = client->Get("/foods/search", params, httplib::Headers{});
    if (!res) throw error("nutrition service unreachable: " + httplib::to_string(res.error()));
    if (res->status != 200) throw error("nutrition service answered " + std::to_string(res->status));
    try {
      auto j = nlohmann::json::parse(res->body);
      const auto& foods = j.at("foods");
      if (foods.empty()) return std::nullopt;
      const auto& f = foods.at(0);
      food_record r;
      r.matched_name = f.at("name").get<std::string>();
      r.kcal_per_100g = f.at("kcal_per_100g").get<double>();
      if (r.kcal_per_100g < 0) throw error("negative calories from nutrition service");
      return r;
    } catch (const nlohmann::json::exception& e) {
      throw error(std::string("malformed nutrition response: ") + e.what());
    }
  };
}

}  // namespace dsm
