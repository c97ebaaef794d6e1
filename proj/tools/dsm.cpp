// dsm: service, replay and evaluation command line.

#include <csignal>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "dsm/bootstrap.hpp"
#include "dsm/device_listener.hpp"
#include "dsm/evaluation.hpp"
#include "dsm/http_api.hpp"
#include "dsm/json_io.hpp"
#include "dsm/replay.hpp"

namespace {

using namespace dsm;

service_config config_from(const std::string& path, const std::string& db) {
  service_config c;
  if (!path.empty()) {
    c = load_config(path);
  } else {
    apply_environment(c);
  }
  if (!db.empty()) c.db_path = db;
  return c;
}

date_range parse_range(const std::string& s) {
  auto dots = s.find("..");
  if (dots == std::string::npos) throw validation_error("range must look like YYYY-MM-DD..YYYY-MM-DD");
  date_range r{parse_date(s.substr(0, dots)), parse_date(s.substr(dots + 2))};
  if (r.last < r.first) throw validation_error("range end is before its start");
  return r;
}

http_service* g_http = nullptr;

void on_signal(int) {
  if (g_http) g_http->stop();
}

int cmd_serve(const service_config& c) {
  auto rt = make_runtime(c);
  device_listener devices(*rt.application);
  if (c.device_port > 0) {
    devices.start(c.host, c.device_port);
    std::cerr << "glucometer listener on " << c.host << ':' << c.device_port << '\n';
  }
  http_service http(*rt.application);
  g_http = &http;
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  std::cerr << "serving on http://" << c.host << ':' << c.port << '\n';
  http.run(c.host, c.port);
  g_http = nullptr;
  return 0;
}

int cmd_seed(const service_config& c, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw not_found("cannot open " + path);
  auto doc = nlohmann::json::parse(in);
  auto rt = make_runtime(c);
  int failures = 0;
  for (const auto& u : doc.at("users")) {
    try {
      auto r = json_io::registration_from_json(u);
      auto id = rt.application->register_user(r.profile, r.password);
      std::cout << id << '\t' << r.profile.email << '\n';
      if (u.contains("goals")) {
        auto v = rt.application->set_goals(id, json_io::goals_from_json(u["goals"]));
        if (v.verdict != goal_verdict::accepted) {
          std::cerr << r.profile.email << ": goals " << json_io::to_string(v.verdict) << '\n';
          ++failures;
        }
      }
    } catch (const error& e) {
      std::cerr << "seed: " << e.what() << '\n';
      ++failures;
    }
  }
  return failures ? 1 : 0;
}

int cmd_replay(const service_config& c, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw not_found("cannot open " + path);
  auto rt = make_runtime(c);
  auto rep = replay(*rt.application, in);
  for (const auto& e : rep.errors) std::cerr << path << ':' << e.line << ": " << e.message << '\n';
  std::cout << "applied " << rep.applied << " rows, " << rep.errors.size() << " errors, " << rep.users.size()
            << " users\n";
  return rep.errors.empty() ? 0 : 1;
}

int cmd_evaluate(const service_config& c, const std::string& path, const std::string& report_path) {
  auto rep = run_corpus(path, rules_for(c));
  std::cout << std::left << std::setw(14) << "scenario" << std::setw(6) << "score" << std::setw(26) << "action"
            << std::setw(18) << "band" << "note\n";
  for (const auto& s : rep.scores)
    std::cout << std::setw(14) << s.scenario_id << std::setw(6) << (s.score > 0 ? "+1" : std::to_string(s.score))
              << std::setw(26) << to_string(s.engine_action) << std::setw(18) << to_string(s.engine_band) << s.note
              << '\n';
  for (const auto& s : rep.skipped) std::cout << "skipped line " << s.line << ": " << s.note << '\n';
  std::cout << std::fixed << std::setprecision(1) << "proficiency " << rep.proficiency_pct << "%  efficiency "
            << rep.efficiency_pct << "%  (N=" << rep.scores.size() << ")\n";
  std::ofstream out(report_path);
  if (!out) throw error("cannot write " + report_path);
  out << report_to_json(rep).dump(2) << '\n';
  std::cerr << "report written to " << report_path << '\n';
  return 0;
}

int cmd_export(const service_config& c, const std::string& range_s, const std::string& grain,
               std::vector<user_id> users, const std::string& out_path) {
  auto range = parse_range(range_s);
  auto g = enum_from_string<granularity>(grain);
  auto rt = make_runtime(c);
  if (users.empty()) users = rt.store->user_ids();
  std::vector<series_bundle> bundles;
  for (auto u : users) bundles.push_back(rt.application->analytics(u, range, g));
  if (out_path.empty() || out_path == "-") {
    write_analytics_csv(std::cout, bundles);
  } else {
    std::ofstream out(out_path);
    if (!out) throw error("cannot write " + out_path);
    write_analytics_csv(out, bundles);
  }
  return 0;
}

std::string opt_num(const std::optional<double>& v) { return v ? format_number(*v) : "-"; }

int cmd_weekly(const service_config& c, const std::string& start_s, int weeks) {
  auto start = parse_date(start_s);
  auto rt = make_runtime(c);
  std::vector<user_history> histories;
  for (auto u : rt.store->user_ids()) histories.push_back(load_history(*rt.store, u));
  std::cout << "week,avg_bg_before,avg_bg_after,avg_reward_points,avg_exercise_min,n_bg_before,n_bg_after\n";
  for (const auto& w : weekly_breakdown(histories, start, weeks))
    std::cout << w.week_index << ',' << opt_num(w.avg_bg_before) << ',' << opt_num(w.avg_bg_after) << ','
              << opt_num(w.avg_reward_points) << ',' << opt_num(w.avg_exercise_min) << ',' << w.n_bg_before << ','
              << w.n_bg_after << '\n';
  return 0;
}

int cmd_glucometer(const service_config& c, user_id user) {
  auto rt = make_runtime(c);
  if (!rt.store->find_user(user)) throw not_found("unknown user " + std::to_string(user));
  glucometer_session session(nullptr, [&](const glucose_reading& r) {
    rt.application->add_reading(r.user, r.value_mg_dl, r.context, r.taken_at);
  }, user);
  glucometer_feed(std::cin, std::cout, session);
  std::cerr << session.accepted() << " accepted, " << session.rejected() << " rejected\n";
  return session.rejected() ? 1 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App cli{"Diabetes self-management service and tools"};
  cli.require_subcommand(1);
  std::string config_path, db;
  cli.add_option("-c,--config", config_path, "JSON config file")->check(CLI::ExistingFile);
  cli.add_option("--db", db, "SQLite database (overrides config)");

  auto* serve = cli.add_subcommand("serve", "Run the HTTP API (and the glucometer listener if configured)");

  std::string seed_path;
  auto* seed = cli.add_subcommand("seed", "Create users and goals from a JSON fixture");
  seed->add_option("fixtures", seed_path)->required()->check(CLI::ExistingFile);

  std::string replay_path;
  auto* rep = cli.add_subcommand("replay", "Apply a replay log through the service layer");
  rep->add_option("log", replay_path)->required()->check(CLI::ExistingFile);

  std::string corpus_path, report_path = "evaluation_report.json";
  auto* eval = cli.add_subcommand("evaluate", "Score a scenario corpus");
  eval->add_option("corpus", corpus_path)->required()->check(CLI::ExistingFile);
  eval->add_option("-o,--report", report_path, "JSON report output")->capture_default_str();

  std::string range, grain = "weekly", out_path;
  std::vector<user_id> users;
  auto* exp = cli.add_subcommand("export-analytics", "Write the analytics CSV for a date range");
  exp->add_option("range", range, "FROM..TO, e.g. 2024-03-04..2024-03-24")->required();
  exp->add_option("-g,--granularity", grain, "daily, weekly or monthly")->capture_default_str();
  exp->add_option("-u,--user", users, "Restrict to these user ids");
  exp->add_option("-o,--out", out_path, "Output file (default stdout)");

  std::string start;
  int weeks = 3;
  auto* weekly = cli.add_subcommand("weekly-report", "Pooled weekly means across all users");
  weekly->add_option("start", start, "Study start date")->required();
  weekly->add_option("-w,--weeks", weeks)->capture_default_str();

  user_id device_user = 0;
  auto* glu = cli.add_subcommand("glucometer", "Read the glucometer line protocol from stdin");
  glu->add_option("-u,--user", device_user)->required();

  auto* rules = cli.add_subcommand("rules", "Print the active recommendation rule table");

  CLI11_PARSE(cli, argc, argv);

  try {
    auto c = config_from(config_path, db);
    if (*serve) return cmd_serve(c);
    if (*seed) return cmd_seed(c, seed_path);
    if (*rep) return cmd_replay(c, replay_path);
    if (*eval) return cmd_evaluate(c, corpus_path, report_path);
    if (*exp) return cmd_export(c, range, grain, users, out_path);
    if (*weekly) return cmd_weekly(c, start, weeks);
    if (*glu) return cmd_glucometer(c, device_user);
    if (*rules) {
      std::cout << rules_to_json(rules_for(c)).dump(2) << '\n';
      return 0;
    }
  } catch (const parse_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
