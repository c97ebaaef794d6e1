#pragma once

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <functional>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "dsm/domain.hpp"

namespace dsm {

// --- nutrition lookup --------------------------------------------------------

enum class food_source { fixture, remote };

inline std::string_view to_string(food_source s) { return s == food_source::fixture ? "fixture" : "remote"; }

struct food_record {
  std::string query;
  std::string matched_name;
  double kcal_per_100g = 0;
  food_source source = food_source::fixture;
};

struct food_lookup_result {
  food_record record;
  // Set when the remote source failed and the fixture answered instead.
  std::optional<std::string> warning;
};

namespace detail {

inline std::vector<std::string> tokens(std::string_view s) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : s) {
    auto c = static_cast<unsigned char>(ch);
    if (std::isalnum(c)) {
      cur += static_cast<char>(std::tolower(c));
    } else if (!cur.empty()) {
      out.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

inline std::string_view trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    auto pos = s.find(sep, start);
    out.push_back(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

template <typename T>
bool parse_number(std::string_view s, T& out) {
  s = trim(s);
  if (s.empty()) return false;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc{} && ptr == s.data() + s.size();
}

}  // namespace detail

struct catalog_food {
  std::string name;
  double kcal_per_100g = 0;
};

class food_catalog {
 public:
  food_catalog() = default;
  explicit food_catalog(std::vector<catalog_food> foods) : foods_(std::move(foods)) {
    for (const auto& f : foods_)
      if (f.kcal_per_100g < 0) throw validation_error("negative calories for " + f.name);
  }

  // CSV with header `name,kcal_per_100g`. Names may not contain commas.
  static food_catalog load(std::istream& in) {
    std::string line;
    std::size_t lineno = 1;
    if (!std::getline(in, line) || detail::trim(line) != "name,kcal_per_100g")
      throw parse_error(1, "food catalog header must be 'name,kcal_per_100g'");
    std::vector<catalog_food> foods;
    while (std::getline(in, line)) {
      ++lineno;
      if (detail::trim(line).empty()) continue;
      auto cols = detail::split(line, ',');
      double kcal = 0;
      if (cols.size() != 2 || !detail::parse_number(cols[1], kcal) || kcal < 0)
        throw parse_error(lineno, "expected 'name,kcal_per_100g'");
      foods.push_back({std::string(detail::trim(cols[0])), kcal});
    }
    return food_catalog{std::move(foods)};
  }

  static food_catalog load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw not_found("cannot open food catalog " + path);
    return load(in);
  }

  // Most query tokens matched wins; ties go to the name with fewer extra
  // tokens, then to catalog order.
  std::optional<catalog_food> best_match(std::string_view query) const {
    auto q = detail::tokens(query);
    const catalog_food* best = nullptr;
    std::size_t best_hits = 0, best_extra = 0;
    for (const auto& f : foods_) {
      auto name = detail::tokens(f.name);
      std::size_t hits = 0;
      for (const auto& t : q)
        if (std::find(name.begin(), name.end(), t) != name.end()) ++hits;
      if (hits == 0) continue;
      std::size_t extra = name.size() - std::min(hits, name.size());
      if (!best || hits > best_hits || (hits == best_hits && extra < best_extra)) {
        best = &f;
        best_hits = hits;
        best_extra = extra;
      }
    }
    if (!best) return std::nullopt;
    return *best;
  }

  const std::vector<catalog_food>& foods() const noexcept { return foods_; }

 private:
  std::vector<catalog_food> foods_;
};

// Queries the remote database. Returns nullopt for "no such food" and throws
// for transport failures (timeouts included).
using remote_food_source = std::function<std::optional<food_record>(std::string_view query)>;

class nutrition_lookup {
 public:
  explicit nutrition_lookup(food_catalog catalog, remote_food_source remote = nullptr)
      : catalog_(std::move(catalog)), remote_(std::move(remote)) {}

  food_lookup_result lookup_food(std::string_view query) const {
    auto q = detail::trim(query);
    if (q.empty()) throw validation_error("food query must not be empty");
    std::optional<std::string> warning;
    if (remote_) {
      try {
        if (auto rec = remote_(q)) {
          rec->query = std::string(q);
          rec->source = food_source::remote;
          return {std::move(*rec), std::nullopt};
        }
      } catch (const std::exception& e) {
        warning = std::string("remote nutrition source unavailable, using fixture: ") + e.what();
      }
    }
    auto hit = catalog_.best_match(q);
    if (!hit) throw not_found("no food matches '" + std::string(q) + "'");
    return {{std::string(q), hit->name, hit->kcal_per_100g, food_source::fixture}, warning};
  }

  const food_catalog& catalog() const noexcept { return catalog_; }

 private:
  food_catalog catalog_;
  remote_food_source remote_;
};

// --- step export -------------------------------------------------------------

struct step_export_row {
  date day{};
  std::int64_t steps = 0;

  friend bool operator==(const step_export_row&, const step_export_row&) = default;
};

struct row_error {
  std::size_t line = 0;
  std::string message;
};

struct step_import {
  std::vector<step_export_row> rows;
  std::vector<row_error> errors;
};

// CSV with header `date,steps`. Bad rows are reported and skipped; a date
// repeated with the same count is merged, with a different count it is an error.
inline step_import import_steps(std::istream& in) {
  step_import out;
  std::string line;
  if (!std::getline(in, line) || detail::trim(line) != "date,steps")
    throw parse_error(1, "step export header must be 'date,steps'");
  std::map<date, std::size_t> seen;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (detail::trim(line).empty()) continue;
    auto cols = detail::split(detail::trim(line), ',');
    if (cols.size() != 2) {
      out.errors.push_back({lineno, "expected 2 columns"});
      continue;
    }
    step_export_row row;
    try {
      row.day = parse_date(detail::trim(cols[0]));
    } catch (const validation_error& e) {
      out.errors.push_back({lineno, e.what()});
      continue;
    }
    if (!detail::parse_number(cols[1], row.steps) || row.steps < 0) {
      out.errors.push_back({lineno, "steps must be a non-negative integer"});
      continue;
    }
    if (auto it = seen.find(row.day); it != seen.end()) {
      if (out.rows[it->second].steps != row.steps)
        out.errors.push_back({lineno, "conflicting step count for " + format_date(row.day)});
      continue;
    }
    seen.emplace(row.day, out.rows.size());
    out.rows.push_back(row);
  }
  return out;
}

// --- glucometer line protocol ------------------------------------------------

struct glucometer_line {
  timestamp taken_at{};
  int value_mg_dl = 0;
  meal_context context = meal_context::fasting;
};

// `GLU <YYYY-MM-DDTHH:MM:SSZ> <mg/dL> <fasting|pre_meal|post_meal>`.
// Throws validation_error or rejected_reading.
inline glucometer_line parse_glucometer_line(std::string_view line) {
  std::istringstream in{std::string(detail::trim(line))};
  std::string verb, ts, value, ctx, extra;
  if (!(in >> verb >> ts >> value >> ctx) || (in >> extra) || verb != "GLU")
    throw validation_error("expected 'GLU <timestamp> <mg/dL> <context>'");
  glucometer_line out;
  out.taken_at = parse_timestamp(ts);
  if (!detail::parse_number(value, out.value_mg_dl)) throw validation_error("glucose value must be an integer");
  check_reading_value(out.value_mg_dl);
  out.context = enum_from_string<meal_context>(ctx);
  return out;
}

inline constexpr std::string_view ack = "ACK";
inline constexpr std::string_view nak = "NAK";

// One device connection. The device authenticates with `AUTH <token>` unless
// the session was opened for a known user; every GLU line is answered with a
// single ACK or NAK.
class glucometer_session {
 public:
  using authenticator = std::function<std::optional<user_id>(std::string_view token)>;
  using reading_sink = std::function<void(const glucose_reading&)>;

  glucometer_session(authenticator auth, reading_sink sink, std::optional<user_id> user = std::nullopt)
      : auth_(std::move(auth)), sink_(std::move(sink)), user_(user) {}

  std::string_view handle_line(std::string_view raw) {
    auto line = detail::trim(raw);
    if (line.substr(0, 5) == "AUTH ") {
      auto id = auth_ ? auth_(detail::trim(line.substr(5))) : std::nullopt;
      if (!id) return nak;
      user_ = id;
      return ack;
    }
    if (!user_) return nak;
    try {
      auto parsed = parse_glucometer_line(line);
      sink_(glucose_reading{*user_, parsed.value_mg_dl, parsed.context, parsed.taken_at});
      ++accepted_;
      return ack;
    } catch (const error&) {
      ++rejected_;
      return nak;
    }
  }

  std::optional<user_id> user() const noexcept { return user_; }
  std::size_t accepted() const noexcept { return accepted_; }
  std::size_t rejected() const noexcept { return rejected_; }

 private:
  authenticator auth_;
  reading_sink sink_;
  std::optional<user_id> user_;
  std::size_t accepted_ = 0;
  std::size_t rejected_ = 0;
};

inline void glucometer_feed(std::istream& in, std::ostream& out, glucometer_session& session) {
  std::string line;
  while (std::getline(in, line)) {
    if (detail::trim(line).empty()) continue;
    out << session.handle_line(line) << '\n';
    out.flush();
  }
}

}  // namespace dsm
