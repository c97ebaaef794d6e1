#include <gtest/gtest.h>

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include "dsm/device_listener.hpp"
#include "dsm/http_api.hpp"

using namespace dsm;
using nlohmann::json;

namespace {

const date d0 = parse_date("2024-03-04");

class HttpTest : public ::testing::Test {
 protected:
  void SetUp() override {
    port = http.start("127.0.0.1", 0);
    client = std::make_unique<httplib::Client>("127.0.0.1", port);
  }

  httplib::Headers auth() const { return {{"Authorization", "Bearer " + token}}; }

  void sign_up() {
    json u{{"nickname", "kim"},       {"email", "kim@example.com"}, {"age", 52},
           {"gender", "female"},      {"height_cm", 160},           {"weight_kg", 60},
           {"exercise_status", "occasional"}, {"password", "secret-1"}};
    auto r = client->Post("/users", u.dump(), "application/json");
    ASSERT_TRUE(r);
    ASSERT_EQ(r->status, 201) << r->body;
    auto l = client->Post("/login", json{{"email", "kim@example.com"}, {"password", "secret-1"}}.dump(),
                          "application/json");
    ASSERT_EQ(l->status, 200);
    token = json::parse(l->body)["token"];
  }

  timestamp clock = timestamp{d0} + std::chrono::hours{6};
  memory_storage store;
  service_config cfg = [] {
    service_config c;
    c.password_hashing = hash_strength::fast;
    return c;
  }();
  app a{store, cfg, default_rule_table(), default_education_catalog(),
        nutrition_lookup(food_catalog{{{"white rice cooked", 130}}}), [this] { return clock; }};
  http_service http{a};
  int port = 0;
  std::unique_ptr<httplib::Client> client;
  std::string token;
};

}  // namespace

TEST_F(HttpTest, ReadingReturnsBandAndAdvice) {
  sign_up();
  auto r = client->Post("/readings", auth(), json{{"bg", 95}, {"context", "fasting"}}.dump(), "application/json");
  ASSERT_EQ(r->status, 200) << r->body;
  auto j = json::parse(r->body);
  EXPECT_EQ(j["band"], "normal");
  EXPECT_EQ(j["recommendation"]["action"], "allow_light");
}

TEST_F(HttpTest, ExerciseRetryIs409AndBalanceUnchanged) {
  sign_up();
  json e{{"started_at", "2024-03-04T18:00:00Z"}, {"duration_min", 35}, {"kcal_burned", 150},
         {"bg_before", 160},                   {"bg_after", 130},    {"context", "post_meal"}};
  httplib::Headers h = auth();
  h.emplace("Idempotency-Key", "walk-1");
  auto first = client->Post("/exercise", h, e.dump(), "application/json");
  ASSERT_EQ(first->status, 200) << first->body;
  auto retry = client->Post("/exercise", h, e.dump(), "application/json");
  EXPECT_EQ(retry->status, 409);
  auto bal = client->Get("/rewards", auth());
  EXPECT_EQ(json::parse(bal->body)["balance"], 15);
}

TEST_F(HttpTest, StatusMapping) {
  EXPECT_EQ(client->Get("/me")->status, 401);
  EXPECT_EQ(client->Get("/me", httplib::Headers{{"Authorization", "Bearer bogus"}})->status, 401);
  sign_up();
  EXPECT_EQ(client->Get("/goals", auth())->status, 404);
  EXPECT_EQ(client->Post("/readings", auth(), "{oops", "application/json")->status, 400);
  EXPECT_EQ(client->Post("/readings", auth(), json{{"bg", 900}, {"context", "fasting"}}.dump(), "application/json")
                ->status,
            400);
  EXPECT_EQ(client->Post("/users", json{{"email", "x"}}.dump(), "application/json")->status, 400);
  EXPECT_EQ(client->Get("/foods?q=pizza")->status, 404);
  EXPECT_EQ(client->Get("/foods?q=rice")->status, 200);
  EXPECT_EQ(client->Post("/days/close", auth(), "{}", "application/json")->status, 400);
}

TEST_F(HttpTest, GoalsVerdictStatuses) {
  sign_up();
  auto put = [&](int lo, int hi) {
    return client->Put("/goals", auth(), json{{"bg_target", {{"low", lo}, {"high", hi}}}}.dump(), "application/json")
        ->status;
  };
  EXPECT_EQ(put(80, 140), 200);
  EXPECT_EQ(put(40, 260), 202);
  EXPECT_EQ(put(150, 90), 400);
  auto g = client->Get("/goals?date=2024-03-04", auth());
  ASSERT_EQ(g->status, 200);
  EXPECT_EQ(json::parse(g->body)["bg_target"]["high"], 140);
}

TEST_F(HttpTest, RecommendationIsStateless) {
  auto r = client->Get("/recommendation?phase=pre_exercise&context=fasting&bg=65");
  ASSERT_EQ(r->status, 200);
  EXPECT_EQ(json::parse(r->body)["action"], "block");
  auto post = client->Get(
      "/recommendation?phase=post_exercise&context=pre_meal&bg=110&duration_min=30&kcal=120&bg_before=140");
  ASSERT_EQ(post->status, 200);
  EXPECT_NE(json::parse(post->body)["message"].get<std::string>().find("dropped to 30 mg/dL"), std::string::npos);
  EXPECT_EQ(client->Get("/recommendation?phase=post_exercise&context=fasting&bg=110")->status, 400);
  EXPECT_EQ(client->Get("/rules")->status, 200);
}

TEST_F(HttpTest, StepImportPartialIs207) {
  sign_up();
  auto ok = client->Post("/steps/import", auth(), "date,steps\n2024-03-04,6000\n", "text/csv");
  EXPECT_EQ(ok->status, 200);
  auto partial = client->Post("/steps/import", auth(), "date,steps\n2024-03-04,6100\n2024-03-05,5000\n", "text/csv");
  EXPECT_EQ(partial->status, 207);
}

TEST_F(HttpTest, AnalyticsCsvAndJson) {
  sign_up();
  client->Post("/readings", auth(), json{{"bg", 95}, {"context", "fasting"}}.dump(), "application/json");
  auto csv = client->Get("/analytics?granularity=daily&from=2024-03-04&to=2024-03-05&format=csv", auth());
  ASSERT_EQ(csv->status, 200);
  EXPECT_EQ(csv->body.rfind("user_id,bucket_start,metric,value,n\n", 0), 0u);
  auto js = client->Get("/analytics?granularity=weekly&from=2024-03-04&to=2024-03-10", auth());
  EXPECT_EQ(js->status, 200);
  EXPECT_EQ(client->Get("/analytics?from=2024-03-10&to=2024-03-04", auth())->status, 400);
}

TEST_F(HttpTest, SurveyAndReminders) {
  sign_up();
  auto s = client->Post("/education/survey", auth(), json{{"diet", false}, {"exercise", true}}.dump(),
                        "application/json");
  ASSERT_EQ(s->status, 200) << s->body;
  auto j = json::parse(s->body);
  ASSERT_EQ(j.size(), 1u);
  EXPECT_EQ(j[0]["area"], "diet");
  auto r = client->Get("/reminders?date=2024-03-07", auth());
  ASSERT_EQ(r->status, 200);
  EXPECT_EQ(json::parse(r->body).size(), 4u);
}

TEST_F(HttpTest, MealsAndMedications) {
  sign_up();
  auto m = client->Post("/meals", auth(), json{{"food", "rice"}, {"grams", 200}}.dump(), "application/json");
  ASSERT_EQ(m->status, 201) << m->body;
  EXPECT_DOUBLE_EQ(json::parse(m->body)["kcal"].get<double>(), 260);
  auto med = client->Post("/medications", auth(),
                          json{{"name", "metformin"}, {"scheduled_at", "2024-03-04T08:00:00Z"}}.dump(),
                          "application/json");
  EXPECT_EQ(med->status, 201);
}

namespace {

std::string talk(int port, const std::string& lines) {
  int fd = ::socket(AF_INET, SOCK_STREAM, 0);
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(static_cast<std::uint16_t>(port));
  ::inet_pton(AF_INET, "127.0.0.1", &addr.sin_addr);
  if (::connect(fd, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0) {
    ::close(fd);
    return "connect failed";
  }
  ::send(fd, lines.data(), lines.size(), 0);
  ::shutdown(fd, SHUT_WR);
  std::string out;
  char buf[256];
  for (ssize_t n; (n = ::recv(fd, buf, sizeof buf, 0)) > 0;) out.append(buf, static_cast<std::size_t>(n));
  ::close(fd);
  return out;
}

}  // namespace

TEST_F(HttpTest, GlucometerSocketStoresReadings) {
  sign_up();
  device_listener dev(a);
  int dport = dev.start("127.0.0.1", 0);
  auto reply = talk(dport, "GLU 2024-03-04T07:00:00Z 100 fasting\nAUTH " + token +
                               "\nGLU 2024-03-04T07:00:00Z 100 fasting\nGLU 2024-03-04T07:05:00Z 999 fasting\n");
  EXPECT_EQ(reply, "NAK\nACK\nACK\nNAK\n");
  dev.stop();
  EXPECT_EQ(store.readings(1, all_time()).size(), 1u);
}
