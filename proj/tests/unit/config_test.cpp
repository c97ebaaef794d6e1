#include <gtest/gtest.h>

#include <cstdlib>

#include "dsm/bootstrap.hpp"

using namespace dsm;

TEST(Config, DefaultsWhenKeysAbsent) {
  auto c = config_from_json(nlohmann::json::object());
  EXPECT_EQ(c.port, 8080);
  EXPECT_EQ(c.device_port, 0);
  EXPECT_DOUBLE_EQ(c.kcal_per_step, 0.04);
  EXPECT_EQ(c.password_hashing, hash_strength::interactive);
  EXPECT_EQ(c.thresholds.normal_max, 130);
}

TEST(Config, OverridesAndValidation) {
  auto c = config_from_json({{"port", 9000},
                             {"password_hashing", "fast"},
                             {"token_ttl_hours", 2},
                             {"schedule", {{"kcal_per_point", 5}}},
                             {"thresholds", {{"normal_max", 120}}}});
  EXPECT_EQ(c.port, 9000);
  EXPECT_EQ(c.password_hashing, hash_strength::fast);
  EXPECT_EQ(c.token_ttl, std::chrono::hours{2});
  EXPECT_DOUBLE_EQ(c.schedule.kcal_per_point, 5);
  EXPECT_EQ(c.thresholds.normal_max, 120);
  EXPECT_THROW(config_from_json({{"password_hashing", "none"}}), validation_error);
  EXPECT_THROW(config_from_json({{"port", "eighty"}}), validation_error);
  EXPECT_THROW(config_from_json({{"thresholds", {{"normal_max", 60}}}}), validation_error);
  EXPECT_THROW(config_from_json({{"schedule", {{"kcal_per_point", 0}}}}), validation_error);
}

TEST(Config, BundledFileLoads) {
  auto c = load_config(std::string(DSM_DATA_DIR) + "/config.json");
  EXPECT_EQ(c.device_port, 9090);
  EXPECT_EQ(c.foods_path, "data/foods.csv");
  EXPECT_THROW(load_config("/nonexistent.json"), not_found);
}

TEST(Config, SecretsComeFromEnvironment) {
  ::setenv("DSM_NUTRITION_URL", "http://127.0.0.1:1", 1);
  ::setenv("DSM_NUTRITION_KEY", "k", 1);
  service_config c;
  apply_environment(c);
  ::unsetenv("DSM_NUTRITION_URL");
  ::unsetenv("DSM_NUTRITION_KEY");
  EXPECT_EQ(c.nutrition_url, "http://127.0.0.1:1");
  EXPECT_EQ(c.nutrition_key, "k");
}

TEST(Bootstrap, RemoteFailureFallsBackToCatalog) {
  service_config c;
  c.password_hashing = hash_strength::fast;
  c.foods_path = std::string(DSM_DATA_DIR) + "/foods.csv";
  c.nutrition_url = "http://127.0.0.1:1";
  auto rt = make_runtime(c, std::make_unique<memory_storage>());
  auto r = rt.application->lookup_food("white rice");
  EXPECT_EQ(r.record.source, food_source::fixture);
  EXPECT_DOUBLE_EQ(r.record.kcal_per_100g, 130);
  EXPECT_TRUE(r.warning.has_value());
}

TEST(Bootstrap, NoNutritionConfigured) {
  service_config c;
  auto rt = make_runtime(c, std::make_unique<memory_storage>());
  EXPECT_THROW(rt.application->lookup_food("rice"), not_found);
}
