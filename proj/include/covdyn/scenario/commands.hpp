#pragma once

// The four CLI subcommands. Each returns the process exit code:
// 0 ok, 1 invariant or tolerance failure (or a runtime error), 2 configuration error.

#include <cctype>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "covdyn/scenario/output.hpp"

namespace covdyn::scenario {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInvariantFailure = 1;
inline constexpr int kExitConfigError = 2;

inline constexpr const char* kOutputDirEnv = "COVDYN_OUTPUT_DIR";

inline std::filesystem::path output_dir() {
  const char* env = std::getenv(kOutputDirEnv);
  std::filesystem::path dir = env && *env ? env : ".";
  std::filesystem::create_directories(dir);
  return dir;
}

/// Scenario names become file stems; anything outside [A-Za-z0-9._-] becomes '_'.
inline std::string file_stem(const std::string& name) {
  std::string out = name.empty() ? "scenario" : name;
  for (char& c : out)
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '.' || c == '_' || c == '-')) c = '_';
  return out;
}

inline void write_json(const std::filesystem::path& path, const json& j) {
  std::ofstream os(path, std::ios::binary);
  os << j.dump(2) << "\n";
  if (!os) throw Error(ErrorKind::ConfigError, path.string() + ": cannot write");
}

namespace detail {

/// Builds the scenario, mapping every construction failure to a configuration error.
template <typename Body>
int with_scenario(const ScenarioConfig& cfg, std::ostream& err, Body&& body) {
  Scenario s;
  try {
    s = build_scenario(cfg);
  } catch (const std::exception& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfigError;
  }
  try {
    return body(s);
  } catch (const std::exception& e) {
    err << "error in scenario '" << cfg.name << "': " << e.what() << "\n";
    return kExitInvariantFailure;
  }
}

template <typename Body>
int with_config(const std::string& path, std::ostream& err, Body&& body) {
  ScenarioConfig cfg;
  try {
    cfg = load_config(path);
  } catch (const std::exception& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfigError;
  }
  return with_scenario(cfg, err, std::forward<Body>(body));
}

struct RunOutcome {
  int code;
  json summary;
};

inline RunOutcome run_outputs(const Scenario& s, const std::filesystem::path& dir) {
  const auto run = run_scenario(s);
  const std::string stem = file_stem(s.cfg.name);
  if (s.cfg.outputs.count("trajectory-csv")) {
    std::ofstream os(dir / (stem + ".trajectory.csv"), std::ios::binary);
    write_trajectory_csv(os, s, run);
  }
  json summary = summary_json(s, run);
  if (s.cfg.outputs.count("summary")) write_json(dir / (stem + ".summary.json"), summary);
  int code = run_within_tolerance(run) ? kExitOk : kExitInvariantFailure;
  if (s.cfg.outputs.count("invariant-report")) {
    const auto rep = check_scenario(s);
    write_json(dir / (stem + ".invariants.json"), report_json(s, rep));
    if (!rep.pass()) code = kExitInvariantFailure;
  }
  return {code, summary};
}

}  // namespace detail

inline int cmd_run(const std::string& path, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  return detail::with_config(path, err, [&](const Scenario& s) {
    const auto dir = output_dir();
    const auto r = detail::run_outputs(s, dir);
    out << fmt::format("{}: {} samples, eta-norm drift {:.3e}, max |h - h^dagger| {:.3e}, {} patch switch(es)\n",
                       s.cfg.name, r.summary["samples"].get<std::size_t>(), r.summary["eta_norm_drift"].get<double>(),
                       r.summary["max_hermiticity_residual_of_h"].get<double>(), r.summary["patch_switches"].size());
    out << "outputs written to " << dir.string() << "\n";
    return r.code;
  });
}

inline int cmd_check(const std::string& path, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  return detail::with_config(path, err, [&](const Scenario& s) {
    const auto rep = check_scenario(s);
    print_report(out, rep);
    write_json(output_dir() / (file_stem(s.cfg.name) + ".invariants.json"), report_json(s, rep));
    out << (rep.pass() ? "all invariants pass\n" : "invariant failure\n");
    return rep.pass() ? kExitOk : kExitInvariantFailure;
  });
}

inline int cmd_compare(const std::string& path, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  return detail::with_config(path, err, [&](const Scenario& s) {
    const auto c = compare_scenario(s);
    print_compare(out, c);
    write_json(output_dir() / (file_stem(s.cfg.name) + ".compare.json"), compare_json(s, c));
    return c.pass() ? kExitOk : kExitInvariantFailure;
  });
}

/// Sets a dotted key such as "params.epsilon", creating objects along the way.
inline void set_dotted(json& root, const std::string& key, const json& value) {
  json* node = &root;
  std::size_t start = 0;
  while (true) {
    const std::size_t dot = key.find('.', start);
    const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (part.empty()) throw Error(ErrorKind::ConfigError, key + ": empty key segment");
    if (!node->is_object()) throw Error(ErrorKind::ConfigError, key + ": '" + part + "' is not inside an object");
    if (dot == std::string::npos) {
      (*node)[part] = value;
      return;
    }
    node = &(*node)[part];
    if (node->is_null()) *node = json::object();
    start = dot + 1;
  }
}

/// Comma-separated values; each is read as JSON when possible, otherwise as a string.
/// Commas inside brackets, braces or quotes do not split.
inline std::vector<json> parse_values(const std::string& list) {
  std::vector<json> out;
  auto push = [&out](const std::string& item) {
    if (item.empty()) return;
    const json parsed = json::parse(item, nullptr, false);
    out.push_back(parsed.is_discarded() ? json(item) : parsed);
  };
  std::string item;
  int depth = 0;
  bool quoted = false;
  for (char c : list) {
    if (c == '"') quoted = !quoted;
    if (!quoted && (c == '[' || c == '{')) ++depth;
    if (!quoted && (c == ']' || c == '}')) --depth;
    if (c == ',' && depth == 0 && !quoted) {
      push(item);
      item.clear();
    } else {
      item += c;
    }
  }
  push(item);
  if (out.empty()) throw Error(ErrorKind::ConfigError, "--values: no values given");
  return out;
}

/// Runs one scenario per value concurrently; each scenario is itself single-threaded.
inline int cmd_sweep(const std::string& path, const std::string& param, const std::string& values,
                     std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  json base;
  std::vector<json> vals;
  try {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::ConfigError, path + ": cannot open file");
    base = json::parse(in);
    if (base.is_object() && base.contains("resolved_config")) base = base.at("resolved_config");
    vals = parse_values(values);
  } catch (const std::exception& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfigError;
  }
  const std::string base_name = base.value("name", std::string("scenario"));
  const auto dir = output_dir();

  struct Item {
    int code;
    json summary;
    std::string message;
  };
  std::vector<std::future<Item>> jobs;
  for (const auto& v : vals) {
    jobs.push_back(std::async(std::launch::async, [&, v]() -> Item {
      json doc = base;
      std::ostringstream msg;
      try {
        set_dotted(doc, param, v);
        doc["name"] = base_name + "-" + param + "=" + (v.is_string() ? v.get<std::string>() : v.dump());
      } catch (const std::exception& e) {
        return {kExitConfigError, {}, e.what()};
      }
      ScenarioConfig cfg;
      try {
        cfg = parse_config(doc);
      } catch (const std::exception& e) {
        return {kExitConfigError, {}, e.what()};
      }
      json summary;
      const int code = detail::with_scenario(cfg, msg, [&](const Scenario& s) {
        auto r = detail::run_outputs(s, dir);
        summary = std::move(r.summary);
        return r.code;
      });
      return {code, summary, msg.str()};
    }));
  }

  int worst = kExitOk;
  json rows = json::array();
  out << fmt::format("{:<24} {:>6} {:>14} {:>14}  {}\n", param, "exit", "eta_drift", "max_herm_res", "endpoint patch");
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    Item it = jobs[i].get();
    worst = std::max(worst, it.code);
    const std::string label = vals[i].is_string() ? vals[i].get<std::string>() : vals[i].dump();
    if (it.summary.is_null()) {
      out << fmt::format("{:<24} {:>6}  {}\n", label, it.code, it.message);
      rows.push_back({{"value", vals[i]}, {"exit", it.code}, {"error", it.message}});
      continue;
    }
    out << fmt::format("{:<24} {:>6} {:>14.3e} {:>14.3e}  {}\n", label, it.code,
                       it.summary["eta_norm_drift"].get<double>(), it.summary["max_hermiticity_residual_of_h"].get<double>(),
                       it.summary["endpoint"]["patch_id"].get<std::string>());
    rows.push_back({{"value", vals[i]}, {"exit", it.code}, {"summary", it.summary}});
  }
  write_json(dir / (file_stem(base_name + "-sweep-" + param) + ".json"), {{"param", param}, {"runs", rows}});
  return worst;
}

}  // namespace covdyn::scenario
