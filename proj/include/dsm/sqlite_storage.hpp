#pragma once

#include <memory>
#include <mutex>
#include <string>
#include <string_view>
#include <vector>

#include <sqlite3.h>

#include "dsm/storage.hpp"

namespace dsm {

namespace sqlite {

class statement {
 public:
  statement(sqlite3* db, std::string_view sql) : db_(db) {
    if (sqlite3_prepare_v2(db, sql.data(), static_cast<int>(sql.size()), &stmt_, nullptr) != SQLITE_OK)
      throw error(std::string("sqlite prepare failed: ") + sqlite3_errmsg(db));
  }
  statement(const statement&) = delete;
  statement& operator=(const statement&) = delete;
  ~statement() { sqlite3_finalize(stmt_); }

  statement& bind(int idx, std::int64_t v) {
    check(sqlite3_bind_int64(stmt_, idx, v));
    return *this;
  }
  statement& bind(int idx, int v) { return bind(idx, static_cast<std::int64_t>(v)); }
  statement& bind(int idx, double v) {
    check(sqlite3_bind_double(stmt_, idx, v));
    return *this;
  }
  statement& bind(int idx, std::string_view v) {
    check(sqlite3_bind_text(stmt_, idx, v.data(), static_cast<int>(v.size()), SQLITE_TRANSIENT));
    return *this;
  }
  statement& bind(int idx, const std::string& v) { return bind(idx, std::string_view{v}); }
  statement& bind(int idx, const char* v) { return bind(idx, std::string_view{v}); }
  statement& bind_null(int idx) {
    check(sqlite3_bind_null(stmt_, idx));
    return *this;
  }
  template <typename T>
  statement& bind(int idx, const std::optional<T>& v) {
    return v ? bind(idx, *v) : bind_null(idx);
  }

  // True while rows remain.
  bool step() {
    int rc = sqlite3_step(stmt_);
    if (rc == SQLITE_ROW) return true;
    if (rc == SQLITE_DONE) return false;
    if ((rc & 0xff) == SQLITE_CONSTRAINT) throw conflict(std::string("constraint violated: ") + sqlite3_errmsg(db_));
    throw error(std::string("sqlite step failed: ") + sqlite3_errmsg(db_));
  }

  void run() {
    while (step()) {
    }
  }

  std::int64_t integer(int col) const { return sqlite3_column_int64(stmt_, col); }
  double real(int col) const { return sqlite3_column_double(stmt_, col); }
  bool is_null(int col) const { return sqlite3_column_type(stmt_, col) == SQLITE_NULL; }
  std::string text(int col) const {
    auto p = sqlite3_column_text(stmt_, col);
    return p ? std::string(reinterpret_cast<const char*>(p)) : std::string{};
  }

 private:
  void check(int rc) {
    if (rc != SQLITE_OK) throw error(std::string("sqlite bind failed: ") + sqlite3_errmsg(db_));
  }

  sqlite3* db_;
  sqlite3_stmt* stmt_ = nullptr;
};

}  // namespace sqlite

inline constexpr std::string_view schema_sql = R"sql(
PRAGMA foreign_keys = ON;
CREATE TABLE IF NOT EXISTS users (
  id INTEGER PRIMARY KEY,
  nickname TEXT NOT NULL,
  email TEXT NOT NULL UNIQUE,
  password_hash TEXT NOT NULL,
  age INTEGER NOT NULL,
  gender TEXT NOT NULL,
  height_cm REAL NOT NULL,
  weight_kg REAL NOT NULL,
  exercise_status TEXT NOT NULL,
  registered_at TEXT NOT NULL
);
CREATE TABLE IF NOT EXISTS goals (
  id INTEGER PRIMARY KEY,
  user_id INTEGER NOT NULL REFERENCES users(id),
  bg_low INTEGER NOT NULL,
  bg_high INTEGER NOT NULL,
  daily_steps INTEGER NOT NULL,
  daily_kcal_burn REAL NOT NULL,
  medication_times TEXT NOT NULL,
  diet_log_required INTEGER NOT NULL,
  effective_from TEXT NOT NULL
);
CREATE TABLE IF NOT EXISTS bg_records (
  id INTEGER PRIMARY KEY,
  user_id INTEGER NOT NULL REFERENCES users(id),
  value INTEGER NOT NULL,
  context TEXT NOT NULL,
  taken_at TEXT NOT NULL
);
CREATE TABLE IF NOT EXISTS diet_records (
  id INTEGER PRIMARY KEY,
  user_id INTEGER NOT NULL REFERENCES users(id),
  eaten_at TEXT NOT NULL,
  description TEXT NOT NULL,
  kcal REAL NOT NULL
);
CREATE TABLE IF NOT EXISTS exercise_records (
  id INTEGER PRIMARY KEY,
  user_id INTEGER NOT NULL REFERENCES users(id),
  started_at TEXT NOT NULL,
  duration_min INTEGER NOT NULL,
  steps INTEGER NOT NULL,
  kcal_burned REAL NOT NULL,
  bg_before INTEGER,
  bg_before_context TEXT,
  bg_after INTEGER,
  bg_after_context TEXT,
  idempotency_key TEXT,
  UNIQUE (user_id, idempotency_key)
);
CREATE TABLE IF NOT EXISTS step_records (
  user_id INTEGER NOT NULL REFERENCES users(id),
  day TEXT NOT NULL,
  steps INTEGER NOT NULL,
  PRIMARY KEY (user_id, day)
);
CREATE TABLE IF NOT EXISTS medication_records (
  id INTEGER PRIMARY KEY,
  user_id INTEGER NOT NULL REFERENCES users(id),
  name TEXT NOT NULL,
  scheduled_at TEXT NOT NULL,
  taken_at TEXT
);
CREATE TABLE IF NOT EXISTS reward_entries (
  id INTEGER PRIMARY KEY,
  user_id INTEGER NOT NULL REFERENCES users(id),
  earned_at TEXT NOT NULL,
  points INTEGER NOT NULL CHECK (points >= 0),
  reason TEXT NOT NULL,
  source_ref TEXT NOT NULL,
  UNIQUE (user_id, reason, source_ref)
);
CREATE TABLE IF NOT EXISTS reminders (
  id INTEGER PRIMARY KEY,
  user_id INTEGER NOT NULL REFERENCES users(id),
  area TEXT NOT NULL,
  sent_on TEXT NOT NULL
);
)sql";

// File-backed store. ":memory:" gives a private in-memory database.
class sqlite_storage final : public storage {
 public:
  explicit sqlite_storage(const std::string& path) {
    sqlite3* db = nullptr;
    if (sqlite3_open(path.c_str(), &db) != SQLITE_OK) {
      std::string msg = db ? sqlite3_errmsg(db) : "out of memory";
      sqlite3_close(db);
      throw error("cannot open database " + path + ": " + msg);
    }
    db_.reset(db);
    exec(schema_sql);
  }

  user_id add_user(const user_profile& p, const std::string& password_hash) override {
    std::lock_guard lock(mu_);
    if (find_user_by_email_locked(p.email)) throw conflict("email already registered");
    sqlite::statement st(db(),
                         "INSERT INTO users (nickname, email, password_hash, age, gender, height_cm, weight_kg, "
                         "exercise_status, registered_at) VALUES (?,?,?,?,?,?,?,?,?)");
    st.bind(1, p.nickname).bind(2, p.email).bind(3, password_hash).bind(4, p.age).bind(5, to_string(p.sex));
    st.bind(6, p.height_cm).bind(7, p.weight_kg).bind(8, to_string(p.activity)).bind(9, format_timestamp(p.registered_at));
    st.run();
    return sqlite3_last_insert_rowid(db());
  }

  std::optional<stored_user> find_user(user_id id) const override {
    std::lock_guard lock(mu_);
    sqlite::statement st(db(), std::string(user_columns) + " WHERE id = ?");
    st.bind(1, id);
    if (!st.step()) return std::nullopt;
    return read_user(st);
  }

  std::optional<stored_user> find_user_by_email(const std::string& email) const override {
    std::lock_guard lock(mu_);
    return find_user_by_email_locked(email);
  }

  std::vector<user_id> user_ids() const override {
    std::lock_guard lock(mu_);
    sqlite::statement st(db(), "SELECT id FROM users ORDER BY id");
    std::vector<user_id> out;
    while (st.step()) out.push_back(st.integer(0));
    return out;
  }

  void put_goals(const goal_set& g) override {
    std::lock_guard lock(mu_);
    require_user(g.user);
    std::string times;
    for (auto t : g.medication_times) {
      if (!times.empty()) times += ' ';
      times += format_time_of_day(t);
    }
    sqlite::statement st(db(),
                         "INSERT INTO goals (user_id, bg_low, bg_high, daily_steps, daily_kcal_burn, medication_times, "
                         "diet_log_required, effective_from) VALUES (?,?,?,?,?,?,?,?)");
    st.bind(1, g.user).bind(2, g.bg.low).bind(3, g.bg.high).bind(4, g.daily_steps).bind(5, g.daily_kcal_burn);
    st.bind(6, times).bind(7, g.diet_log_required ? 1 : 0).bind(8, format_date(g.effective_from));
    st.run();
  }

  std::optional<goal_set> goals_for(user_id user, date day) const override {
    std::lock_guard lock(mu_);
    sqlite::statement st(db(),
                         "SELECT bg_low, bg_high, daily_steps, daily_kcal_burn, medication_times, diet_log_required, "
                         "effective_from FROM goals WHERE user_id = ? AND effective_from <= ? "
                         "ORDER BY effective_from DESC, id DESC LIMIT 1");
    st.bind(1, user).bind(2, format_date(day));
    if (!st.step()) return std::nullopt;
    goal_set g;
    g.user = user;
    g.bg = {static_cast<int>(st.integer(0)), static_cast<int>(st.integer(1))};
    g.daily_steps = st.integer(2);
    g.daily_kcal_burn = st.real(3);
    auto times = st.text(4);
    for (std::size_t pos = 0; pos < times.size(); pos += 6) g.medication_times.push_back(parse_time_of_day(times.substr(pos, 5)));
    g.diet_log_required = st.integer(5) != 0;
    g.effective_from = parse_date(st.text(6));
    return g;
  }

  record_id add_reading(const glucose_reading& r) override {
    std::lock_guard lock(mu_);
    require_user(r.user);
    sqlite::statement st(db(), "INSERT INTO bg_records (user_id, value, context, taken_at) VALUES (?,?,?,?)");
    st.bind(1, r.user).bind(2, r.value_mg_dl).bind(3, to_string(r.context)).bind(4, format_timestamp(r.taken_at));
    st.run();
    return sqlite3_last_insert_rowid(db());
  }

  std::vector<glucose_reading> readings(user_id user, date_range range) const override {
    std::lock_guard lock(mu_);
    sqlite::statement st(db(),
                         "SELECT value, context, taken_at FROM bg_records WHERE user_id = ? AND substr(taken_at,1,10) "
                         "BETWEEN ? AND ? ORDER BY taken_at, id");
    bind_range(st, user, range);
    std::vector<glucose_reading> out;
    while (st.step())
      out.push_back({user, static_cast<int>(st.integer(0)), enum_from_string<meal_context>(st.text(1)),
                     parse_timestamp(st.text(2))});
    return out;
  }

  record_id add_exercise(const exercise_session& s, const std::string& key) override {
    std::lock_guard lock(mu_);
    require_user(s.user);
    sqlite::statement st(db(),
                         "INSERT INTO exercise_records (user_id, started_at, duration_min, steps, kcal_burned, bg_before, "
                         "bg_before_context, bg_after, bg_after_context, idempotency_key) VALUES (?,?,?,?,?,?,?,?,?,?)");
    st.bind(1, s.user).bind(2, format_timestamp(s.started_at)).bind(3, s.duration_min).bind(4, s.steps);
    st.bind(5, s.kcal_burned);
    bind_reading(st, 6, s.bg_before);
    bind_reading(st, 8, s.bg_after);
    if (key.empty()) st.bind_null(10);
    else st.bind(10, key);
    try {
      st.run();
    } catch (const conflict&) {
      throw conflict("exercise with idempotency key '" + key + "' already recorded");
    }
    return sqlite3_last_insert_rowid(db());
  }

  bool exercise_key_used(user_id user, const std::string& key) const override {
    std::lock_guard lock(mu_);
    sqlite::statement st(db(), "SELECT 1 FROM exercise_records WHERE user_id = ? AND idempotency_key = ?");
    st.bind(1, user).bind(2, key);
    return st.step();
  }

  std::vector<exercise_session> exercises(user_id user, date_range range) const override {
    std::lock_guard lock(mu_);
    sqlite::statement st(db(),
                         "SELECT started_at, duration_min, steps, kcal_burned, bg_before, bg_before_context, bg_after, "
                         "bg_after_context FROM exercise_records WHERE user_id = ? AND substr(started_at,1,10) "
                         "BETWEEN ? AND ? ORDER BY started_at, id");
    bind_range(st, user, range);
    std::vector<exercise_session> out;
    while (st.step()) {
      exercise_session s;
      s.user = user;
      s.started_at = parse_timestamp(st.text(0));
      s.duration_min = static_cast<int>(st.integer(1));
      s.steps = st.integer(2);
      s.kcal_burned = st.real(3);
      if (!st.is_null(4))
        s.bg_before = glucose_reading{user, static_cast<int>(st.integer(4)), enum_from_string<meal_context>(st.text(5)),
                                      s.started_at};
      if (!st.is_null(6))
        s.bg_after = glucose_reading{user, static_cast<int>(st.integer(6)), enum_from_string<meal_context>(st.text(7)),
                                     s.started_at + std::chrono::minutes{s.duration_min}};
      out.push_back(std::move(s));
    }
    return out;
  }

  record_id add_meal(const meal_record& m) override {
    std::lock_guard lock(mu_);
    require_user(m.user);
    sqlite::statement st(db(), "INSERT INTO diet_records (user_id, eaten_at, description, kcal) VALUES (?,?,?,?)");
    st.bind(1, m.user).bind(2, format_timestamp(m.eaten_at)).bind(3, m.description).bind(4, m.kcal);
    st.run();
    return sqlite3_last_insert_rowid(db());
  }

  std::vector<meal_record> meals(user_id user, date_range range) const override {
    std::lock_guard lock(mu_);
    sqlite::statement st(db(),
                         "SELECT eaten_at, description, kcal FROM diet_records WHERE user_id = ? AND "
                         "substr(eaten_at,1,10) BETWEEN ? AND ? ORDER BY eaten_at, id");
    bind_range(st, user, range);
    std::vector<meal_record> out;
    while (st.step()) out.push_back({user, parse_timestamp(st.text(0)), st.text(1), st.real(2)});
    return out;
  }

  record_id add_medication(const medication_event& m) override {
    std::lock_guard lock(mu_);
    require_user(m.user);
    sqlite::statement st(db(),
                         "INSERT INTO medication_records (user_id, name, scheduled_at, taken_at) VALUES (?,?,?,?)");
    st.bind(1, m.user).bind(2, m.name).bind(3, format_timestamp(m.scheduled_at));
    if (m.taken_at) st.bind(4, format_timestamp(*m.taken_at));
    else st.bind_null(4);
    st.run();
    return sqlite3_last_insert_rowid(db());
  }

  std::vector<medication_event> medications(user_id user, date_range range) const override {
    std::lock_guard lock(mu_);
    sqlite::statement st(db(),
                         "SELECT scheduled_at, taken_at, name FROM medication_records WHERE user_id = ? AND "
                         "substr(scheduled_at,1,10) BETWEEN ? AND ? ORDER BY scheduled_at, id");
    bind_range(st, user, range);
    std::vector<medication_event> out;
    while (st.step()) {
      medication_event m{user, parse_timestamp(st.text(0)), std::nullopt, st.text(2)};
      if (!st.is_null(1)) m.taken_at = parse_timestamp(st.text(1));
      out.push_back(std::move(m));
    }
    return out;
  }

  void upsert_steps(user_id user, date day, std::int64_t steps) override {
    std::lock_guard lock(mu_);
    require_user(user);
    sqlite::statement q(db(), "SELECT steps FROM step_records WHERE user_id = ? AND day = ?");
    q.bind(1, user).bind(2, format_date(day));
    if (q.step()) {
      if (q.integer(0) != steps) throw conflict("conflicting step count for " + format_date(day));
      return;
    }
    sqlite::statement st(db(), "INSERT INTO step_records (user_id, day, steps) VALUES (?,?,?)");
    st.bind(1, user).bind(2, format_date(day)).bind(3, steps);
    st.run();
  }

  std::map<date, std::int64_t> tracker_steps(user_id user, date_range range) const override {
    std::lock_guard lock(mu_);
    sqlite::statement st(db(), "SELECT day, steps FROM step_records WHERE user_id = ? AND day BETWEEN ? AND ?");
    bind_range(st, user, range);
    std::map<date, std::int64_t> out;
    while (st.step()) out[parse_date(st.text(0))] = st.integer(1);
    return out;
  }

  void append_reward(const reward_entry& e) override {
    std::lock_guard lock(mu_);
    require_user(e.user);
    if (e.amount < 0) throw validation_error("reward points must be non-negative");
    sqlite::statement st(db(),
                         "INSERT INTO reward_entries (user_id, earned_at, points, reason, source_ref) VALUES (?,?,?,?,?)");
    st.bind(1, e.user).bind(2, format_timestamp(e.earned_at)).bind(3, e.amount).bind(4, to_string(e.reason));
    st.bind(5, e.source_ref);
    try {
      st.run();
    } catch (const conflict&) {
      throw conflict("reward " + to_string(e.reason) + " for " + e.source_ref + " already awarded");
    }
  }

  bool reward_exists(user_id user, const reward_reason& reason, const std::string& source_ref) const override {
    std::lock_guard lock(mu_);
    sqlite::statement st(db(), "SELECT 1 FROM reward_entries WHERE user_id = ? AND reason = ? AND source_ref = ?");
    st.bind(1, user).bind(2, to_string(reason)).bind(3, source_ref);
    return st.step();
  }

  std::vector<reward_entry> rewards(user_id user) const override {
    std::lock_guard lock(mu_);
    sqlite::statement st(db(),
                         "SELECT earned_at, points, reason, source_ref FROM reward_entries WHERE user_id = ? ORDER BY id");
    st.bind(1, user);
    std::vector<reward_entry> out;
    while (st.step())
      out.push_back({user, parse_timestamp(st.text(0)), st.integer(1), reward_reason_from_string(st.text(2)), st.text(3)});
    return out;
  }

  points audit_balance(user_id user) const override {
    std::lock_guard lock(mu_);
    sqlite::statement st(db(), "SELECT COALESCE(SUM(points), 0) FROM reward_entries WHERE user_id = ?");
    st.bind(1, user);
    st.step();
    return st.integer(0);
  }

  void add_reminder(const reminder_record& r) override {
    std::lock_guard lock(mu_);
    require_user(r.user);
    sqlite::statement st(db(), "INSERT INTO reminders (user_id, area, sent_on) VALUES (?,?,?)");
    st.bind(1, r.user).bind(2, to_string(r.area)).bind(3, format_date(r.sent_on));
    st.run();
  }

  std::vector<reminder_record> reminders(user_id user) const override {
    std::lock_guard lock(mu_);
    sqlite::statement st(db(), "SELECT area, sent_on FROM reminders WHERE user_id = ? ORDER BY id");
    st.bind(1, user);
    std::vector<reminder_record> out;
    while (st.step()) out.push_back({user, enum_from_string<adherence_area>(st.text(0)), parse_date(st.text(1))});
    return out;
  }

  void begin() override {
    mu_.lock();
    try {
      exec("BEGIN IMMEDIATE");
    } catch (...) {
      mu_.unlock();
      throw;
    }
  }
  void commit() override {
    exec("COMMIT");
    mu_.unlock();
  }
  void rollback() override {
    exec("ROLLBACK");
    mu_.unlock();
  }

 private:
  struct closer {
    void operator()(sqlite3* db) const { sqlite3_close(db); }
  };

  static constexpr std::string_view user_columns =
      "SELECT id, nickname, email, password_hash, age, gender, height_cm, weight_kg, exercise_status, registered_at "
      "FROM users";

  sqlite3* db() const { return db_.get(); }

  void exec(std::string_view sql) {
    char* err = nullptr;
    if (sqlite3_exec(db(), std::string(sql).c_str(), nullptr, nullptr, &err) != SQLITE_OK) {
      std::string msg = err ? err : "unknown";
      sqlite3_free(err);
      throw error("sqlite: " + msg);
    }
  }

  static stored_user read_user(const sqlite::statement& st) {
    stored_user u;
    u.profile.id = st.integer(0);
    u.profile.nickname = st.text(1);
    u.profile.email = st.text(2);
    u.password_hash = st.text(3);
    u.profile.age = static_cast<int>(st.integer(4));
    u.profile.sex = enum_from_string<gender>(st.text(5));
    u.profile.height_cm = st.real(6);
    u.profile.weight_kg = st.real(7);
    u.profile.activity = enum_from_string<exercise_status>(st.text(8));
    u.profile.registered_at = parse_timestamp(st.text(9));
    return u;
  }

  std::optional<stored_user> find_user_by_email_locked(const std::string& email) const {
    sqlite::statement st(db(), std::string(user_columns) + " WHERE email = ?");
    st.bind(1, email);
    if (!st.step()) return std::nullopt;
    return read_user(st);
  }

  void require_user(user_id id) const {
    sqlite::statement st(db(), "SELECT 1 FROM users WHERE id = ?");
    st.bind(1, id);
    if (!st.step()) throw not_found("unknown user " + std::to_string(id));
  }

  static void bind_range(sqlite::statement& st, user_id user, date_range range) {
    st.bind(1, user).bind(2, format_date(range.first)).bind(3, format_date(range.last));
  }

  static void bind_reading(sqlite::statement& st, int idx, const std::optional<glucose_reading>& r) {
    if (r) {
      st.bind(idx, r->value_mg_dl).bind(idx + 1, to_string(r->context));
    } else {
      st.bind_null(idx).bind_null(idx + 1);
    }
  }

  std::unique_ptr<sqlite3, closer> db_;
  mutable std::recursive_mutex mu_;
};

}  // namespace dsm
