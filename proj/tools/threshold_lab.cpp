// threshold_lab — command-line front end. Reads a key=value config file,
// runs one command, writes CSV artifact(s) plus a JSON manifest. Errors go
// to stderr as a single JSON record; the exit code encodes the category.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "thlab/code.hpp"
#include "thlab/config.hpp"
#include "thlab/quadrature.hpp"
#include "thlab/run.hpp"
#include "thlab/version.hpp"

namespace {

int fail(const char* category, const std::string& message, int code) {
  nlohmann::json rec;
  rec["error"]["category"] = category;
  rec["error"]["message"] = message;
  std::cerr << rec.dump() << std::endl;
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{std::string(thlab::kToolName) + " v" + thlab::kToolVersion};
  std::string config_path;
  std::optional<std::string> out_path;
  std::optional<uint64_t> seed;
  std::optional<int> threads;
  app.add_option("--config", config_path, "path to key=value config file")->required();
  app.add_option("--out", out_path, "output path (overrides config)");
  app.add_option("--seed", seed, "RNG seed (overrides config)");
  app.add_option("--threads", threads, "worker threads, 0 = hardware (overrides config)");
  CLI11_PARSE(app, argc, argv);

  if (!threads) {
    if (const char* env = std::getenv("THRESHOLD_LAB_THREADS")) {
      try {
        threads = thlab::detail::parse_int("THRESHOLD_LAB_THREADS", env);
      } catch (const std::exception& e) {
        return fail("config", e.what(), 2);
      }
    }
  }

  try {
    std::ifstream in(config_path);
    if (!in) throw thlab::ConfigError("cannot open config file '" + config_path + "'");
    const auto items = thlab::parse_config_items(in);
    const thlab::RunConfig cfg = thlab::make_run_config(items, out_path, seed, threads);
    const thlab::RunOutcome res = thlab::run(cfg);
    nlohmann::json ok;
    ok["command"] = cfg.command;
    ok["artifacts"] = res.artifacts;
    ok["manifest"] = res.manifest_path;
    std::cout << ok.dump() << std::endl;
    return 0;
  } catch (const thlab::ConfigError& e) {
    return fail("config", e.what(), 2);
  } catch (const std::invalid_argument& e) {
    return fail("config", e.what(), 2);
  } catch (const thlab::CapacityError& e) {
    return fail("capacity", e.what(), 3);
  } catch (const thlab::QuadratureError& e) {
    return fail("numerical", e.what(), 4);
  } catch (const std::runtime_error& e) {
    return fail("numerical", e.what(), 4);
  } catch (const std::exception& e) {
    return fail("internal", e.what(), 1);
  }
}
