// config.hpp — plain-text run configuration (key = value lines) for the batch
// driver: schema-checked parsing, per-command key validation, and the
// effective-config hash stamped into artifacts.

#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "thlab/env.hpp"
#include "thlab/util.hpp"

namespace thlab {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline double parse_double(const std::string& key, const std::string& v) {
  size_t pos = 0;
  double x;
  try {
    x = std::stod(v, &pos);
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "': cannot parse '" + v + "' as a real number");
  }
  if (pos != v.size()) throw ConfigError("config key '" + key + "': trailing characters in '" + v + "'");
  return x;
}

inline long parse_long(const std::string& key, const std::string& v) {
  size_t pos = 0;
  long x;
  try {
    x = std::stol(v, &pos);
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "': cannot parse '" + v + "' as an integer");
  }
  if (pos != v.size()) throw ConfigError("config key '" + key + "': trailing characters in '" + v + "'");
  return x;
}

inline int parse_int(const std::string& key, const std::string& v) {
  const long x = parse_long(key, v);
  if (x < -2147483647L || x > 2147483647L) throw ConfigError("config key '" + key + "': value out of int range");
  return static_cast<int>(x);
}

inline uint64_t parse_u64(const std::string& key, const std::string& v) {
  size_t pos = 0;
  unsigned long long x;
  try {
    x = std::stoull(v, &pos);
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "': cannot parse '" + v + "' as an unsigned integer");
  }
  if (pos != v.size()) throw ConfigError("config key '" + key + "': trailing characters in '" + v + "'");
  return x;
}

inline bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "1" || v == "true" || v == "on") return true;
  if (v == "0" || v == "false" || v == "off") return false;
  throw ConfigError("config key '" + key + "': expected a boolean (0/1/true/false), got '" + v + "'");
}

template <typename T, typename F>
std::vector<T> parse_list(const std::string& key, const std::string& v, F item_parser) {
  std::vector<T> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) throw ConfigError("config key '" + key + "': empty list item");
    out.push_back(item_parser(key, item));
  }
  if (out.empty()) throw ConfigError("config key '" + key + "': empty list");
  return out;
}

}  // namespace detail

struct RunConfig {
  std::string command;
  EnvironmentSpec env;
  std::string output_path = "out.csv";
  uint64_t seed = 1;
  bool seed_given = false;
  int threads = 0;  // 0 = hardware concurrency

  // correlators
  int d = 2;
  std::string mode = "continuum";
  int max_cycle_sep = 1;

  // critical
  std::vector<int> mc_sizes = {8, 16};
  std::vector<double> mc_grid = {1.5, 1.55, 1.6, 1.65, 1.7, 1.75, 1.8, 1.85, 1.9, 1.95, 2.0};
  long mc_sweeps = 200000;
  bool use_wolff = false;
  std::string trace_path;
  int trace_size = 0;
  double trace_j = 0.0;

  // fidelity / sweep
  int n_cycles = 1;
  std::string method = "slice";       // slice | exact
  std::string form = "single_slice";  // single_slice | spin1_chain (exact method)
  std::vector<int> d_list = {2, 3, 4};
  std::vector<double> lambda_list;
  int enumeration_limit = 20;
  double max_std_error = 0.01;

  // Effective key/value view used for hashing and the manifest echo.
  std::map<std::string, std::string> items;

  // Hash of the effective config; output locations do not affect identity.
  uint64_t config_hash() const {
    std::string blob;
    for (const auto& [k, v] : items) {
      if (k == "output_path" || k == "trace_path") continue;
      blob += k;
      blob += '=';
      blob += v;
      blob += '\n';
    }
    return fnv1a64(blob);
  }
};

namespace detail {

inline const std::set<std::string>& keys_common() {
  static const std::set<std::string> k = {"command", "output_path", "seed", "threads",
                                          "lambda",  "v",           "omega0", "cutoff",
                                          "s",       "dimension",   "delta",  "box_l",
                                          "q0"};
  return k;
}

inline const std::map<std::string, std::set<std::string>>& keys_per_command() {
  static const std::map<std::string, std::set<std::string>> k = {
      {"correlators", {"d", "mode", "max_cycle_sep"}},
      {"critical", {"mc_sizes", "mc_grid", "mc_sweeps", "use_wolff", "trace_path", "trace_size", "trace_j"}},
      {"fidelity", {"d", "n_cycles", "method", "form", "mc_sweeps", "enumeration_limit", "max_std_error"}},
      {"threshold", {}},
      {"sweep", {"d_list", "lambda_list", "n_cycles", "mc_sweeps", "enumeration_limit", "max_std_error"}},
  };
  return k;
}

}  // namespace detail

inline std::map<std::string, std::string> parse_config_items(std::istream& in) {
  std::map<std::string, std::string> items;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(lineno) + ": expected 'key = value', got '" + line + "'");
    const std::string key = detail::trim(line.substr(0, eq));
    const std::string value = detail::trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError("config line " + std::to_string(lineno) + ": empty key");
    if (value.empty()) throw ConfigError("config key '" + key + "': empty value");
    if (!items.emplace(key, value).second) throw ConfigError("config key '" + key + "' given twice");
  }
  return items;
}

// Builds the typed config from parsed items, applying CLI overrides first so
// the hash and the manifest reflect what actually ran.
inline RunConfig make_run_config(std::map<std::string, std::string> items,
                                 const std::optional<std::string>& out_override,
                                 const std::optional<uint64_t>& seed_override,
                                 const std::optional<int>& threads_override) {
  if (out_override) items["output_path"] = *out_override;
  if (seed_override) items["seed"] = std::to_string(*seed_override);
  if (threads_override) items["threads"] = std::to_string(*threads_override);

  RunConfig cfg;
  const auto it = items.find("command");
  if (it == items.end()) throw ConfigError("config key 'command' is required");
  cfg.command = it->second;
  const auto& per_command = detail::keys_per_command();
  const auto cmd_keys = per_command.find(cfg.command);
  if (cmd_keys == per_command.end())
    throw ConfigError("unknown command '" + cfg.command +
                      "' (expected correlators|critical|fidelity|threshold|sweep)");
  for (const auto& [k, v] : items)
    if (!detail::keys_common().count(k) && !cmd_keys->second.count(k))
      throw ConfigError("config key '" + k + "' is not valid for command '" + cfg.command + "'");

  auto get = [&](const char* key) -> const std::string* {
    const auto f = items.find(key);
    return f == items.end() ? nullptr : &f->second;
  };
  using namespace detail;

  if (const auto* v = get("lambda")) cfg.env.lambda = parse_double("lambda", *v);
  if (const auto* v = get("v")) cfg.env.v = parse_double("v", *v);
  if (const auto* v = get("omega0")) cfg.env.omega0 = parse_double("omega0", *v);
  if (const auto* v = get("cutoff")) cfg.env.Lambda = parse_double("cutoff", *v);
  if (const auto* v = get("s")) cfg.env.s = parse_double("s", *v);
  if (const auto* v = get("dimension")) cfg.env.D = parse_int("dimension", *v);
  if (const auto* v = get("delta")) cfg.env.Delta = parse_double("delta", *v);
  if (const auto* v = get("box_l")) cfg.env.L = parse_double("box_l", *v);
  if (const auto* v = get("q0")) cfg.env.q0 = parse_double("q0", *v);
  try {
    cfg.env.validate();
  } catch (const std::exception& e) {
    throw ConfigError(std::string("invalid environment parameters: ") + e.what());
  }

  if (const auto* v = get("output_path")) cfg.output_path = *v;
  if (const auto* v = get("seed")) {
    cfg.seed = parse_u64("seed", *v);
    cfg.seed_given = true;
  }
  if (const auto* v = get("threads")) {
    cfg.threads = parse_int("threads", *v);
    if (cfg.threads < 0) throw ConfigError("config key 'threads': must be nonnegative");
  }

  if (const auto* v = get("d")) cfg.d = parse_int("d", *v);
  if (const auto* v = get("mode")) {
    cfg.mode = *v;
    if (cfg.mode != "continuum" && cfg.mode != "discrete")
      throw ConfigError("config key 'mode': expected continuum|discrete, got '" + cfg.mode + "'");
  }
  if (const auto* v = get("max_cycle_sep")) cfg.max_cycle_sep = parse_int("max_cycle_sep", *v);

  if (const auto* v = get("mc_sizes")) cfg.mc_sizes = parse_list<int>("mc_sizes", *v, parse_int);
  if (const auto* v = get("mc_grid")) cfg.mc_grid = parse_list<double>("mc_grid", *v, parse_double);
  if (const auto* v = get("mc_sweeps")) cfg.mc_sweeps = parse_long("mc_sweeps", *v);
  if (const auto* v = get("use_wolff")) cfg.use_wolff = parse_bool("use_wolff", *v);
  if (const auto* v = get("trace_path")) cfg.trace_path = *v;
  if (const auto* v = get("trace_size")) cfg.trace_size = parse_int("trace_size", *v);
  if (const auto* v = get("trace_j")) cfg.trace_j = parse_double("trace_j", *v);
  if (!cfg.trace_path.empty() && (cfg.trace_size <= 0 || cfg.trace_j <= 0.0))
    throw ConfigError("trace_path requires trace_size and trace_j");

  if (const auto* v = get("n_cycles")) cfg.n_cycles = parse_int("n_cycles", *v);
  if (const auto* v = get("method")) {
    cfg.method = *v;
    if (cfg.method != "slice" && cfg.method != "exact")
      throw ConfigError("config key 'method': expected slice|exact, got '" + cfg.method + "'");
  }
  if (const auto* v = get("form")) {
    cfg.form = *v;
    if (cfg.form != "single_slice" && cfg.form != "spin1_chain")
      throw ConfigError("config key 'form': expected single_slice|spin1_chain, got '" + cfg.form + "'");
  }
  if (const auto* v = get("d_list")) cfg.d_list = parse_list<int>("d_list", *v, parse_int);
  if (const auto* v = get("lambda_list")) cfg.lambda_list = parse_list<double>("lambda_list", *v, parse_double);
  if (const auto* v = get("enumeration_limit")) cfg.enumeration_limit = parse_int("enumeration_limit", *v);
  if (const auto* v = get("max_std_error")) cfg.max_std_error = parse_double("max_std_error", *v);

  if (cfg.command == "sweep" && cfg.lambda_list.empty())
    throw ConfigError("command 'sweep' requires lambda_list");
  const bool stochastic = cfg.command == "critical" || cfg.command == "sweep";
  if (stochastic && !cfg.seed_given)
    throw ConfigError("command '" + cfg.command + "' is stochastic and requires a seed");
  if (cfg.d < 2) throw ConfigError("config key 'd': code distance must be at least 2");
  if (cfg.n_cycles < 1) throw ConfigError("config key 'n_cycles': must be at least 1");
  for (int dd : cfg.d_list)
    if (dd < 2) throw ConfigError("config key 'd_list': code distances must be at least 2");
  if (cfg.mc_sweeps < 100) throw ConfigError("config key 'mc_sweeps': need at least 100");
  if (cfg.max_cycle_sep < 0) throw ConfigError("config key 'max_cycle_sep': must be nonnegative");

  cfg.items = std::move(items);
  return cfg;
}

}  // namespace thlab
