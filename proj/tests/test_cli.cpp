// Tests for config parsing, the batch run driver, and the command-line
// binary: validation messages, artifact and manifest layout, byte-identical
// reruns, and the exit-code mapping of the installed executable.

#include <gtest/gtest.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "thlab/config.hpp"
#include "thlab/env.hpp"
#include "thlab/fidelity.hpp"
#include "thlab/run.hpp"
#include "thlab/statmech.hpp"
#include "thlab/util.hpp"

namespace fs = std::filesystem;

namespace {

std::map<std::string, std::string> items_of(const std::string& text) {
  std::istringstream in(text);
  return thlab::parse_config_items(in);
}

thlab::RunConfig cfg_of(const std::string& text) {
  return thlab::make_run_config(items_of(text), std::nullopt, std::nullopt, std::nullopt);
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) out.push_back(line);
  return out;
}

void write_text(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  out << content;
}

struct TempDir {
  fs::path path;
  TempDir() {
    static int counter = 0;
    path = fs::temp_directory_path() /
           ("thlab_cli_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

// Runs the installed binary through the shell; returns the exit status.
int run_cli(const std::string& args, const TempDir& dir, std::string* out = nullptr,
            std::string* err = nullptr, const std::string& env_prefix = "") {
  const std::string so = dir.file("cli_stdout.log");
  const std::string se = dir.file("cli_stderr.log");
  const std::string cmd =
      env_prefix + std::string(THLAB_CLI_PATH) + " " + args + " > " + so + " 2> " + se;
  const int rc = std::system(cmd.c_str());
  if (out) *out = read_text(so);
  if (err) *err = read_text(se);
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

}  // namespace

TEST(ConfigParse, KeysCommentsAndWhitespace) {
  const auto items = items_of(
      "# full-line comment\n"
      "command = threshold   # trailing note\n"
      "\n"
      "  lambda =  2.5\n"
      "omega0=0.9\n");
  ASSERT_EQ(items.size(), 3u);
  EXPECT_EQ(items.at("command"), "threshold");
  EXPECT_EQ(items.at("lambda"), "2.5");
  EXPECT_EQ(items.at("omega0"), "0.9");
}

TEST(ConfigParse, RejectsDuplicateKey) {
  try {
    items_of("command = threshold\ncommand = sweep\n");
    FAIL() << "expected ConfigError";
  } catch (const thlab::ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("given twice"), std::string::npos);
  }
}

TEST(ConfigParse, ReportsLineNumbers) {
  try {
    items_of("command = threshold\nnot a key value pair\n");
    FAIL() << "expected ConfigError";
  } catch (const thlab::ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("config line 2"), std::string::npos);
  }
}

TEST(ConfigParse, RejectsEmptyKeyOrValue) {
  EXPECT_THROW(items_of(" = threshold\n"), thlab::ConfigError);
  try {
    items_of("command =   # value is only a comment\n");
    FAIL() << "expected ConfigError";
  } catch (const thlab::ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("empty value"), std::string::npos);
  }
}

TEST(RunConfig, DefaultsAreApplied) {
  const thlab::RunConfig cfg = cfg_of("command = threshold\n");
  EXPECT_EQ(cfg.command, "threshold");
  EXPECT_EQ(cfg.output_path, "out.csv");
  EXPECT_EQ(cfg.seed, 1u);
  EXPECT_FALSE(cfg.seed_given);
  EXPECT_EQ(cfg.threads, 0);
  EXPECT_EQ(cfg.env.lambda, 1.0);
  EXPECT_EQ(cfg.env.D, 2);

  const thlab::RunConfig fid = cfg_of("command = fidelity\n");
  EXPECT_EQ(fid.d, 2);
  EXPECT_EQ(fid.n_cycles, 1);
  EXPECT_EQ(fid.method, "slice");
  EXPECT_EQ(fid.form, "single_slice");
  EXPECT_EQ(fid.enumeration_limit, 20);
  EXPECT_EQ(fid.max_std_error, 0.01);

  const thlab::RunConfig crit = cfg_of("command = critical\nseed = 3\n");
  EXPECT_EQ(crit.mc_sizes, (std::vector<int>{8, 16}));
  EXPECT_EQ(crit.mc_grid.size(), 11u);
  EXPECT_EQ(crit.mc_grid.front(), 1.5);
  EXPECT_EQ(crit.mc_grid.back(), 2.0);
  EXPECT_EQ(crit.mc_sweeps, 200000L);
  EXPECT_FALSE(crit.use_wolff);
}

TEST(RunConfig, CommandValidation) {
  try {
    cfg_of("lambda = 1\n");
    FAIL() << "expected ConfigError";
  } catch (const thlab::ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("'command' is required"), std::string::npos);
  }
  try {
    cfg_of("command = frobnicate\n");
    FAIL() << "expected ConfigError";
  } catch (const thlab::ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("correlators|critical|fidelity|threshold|sweep"),
              std::string::npos);
  }
  try {
    cfg_of("command = threshold\nd = 3\n");
    FAIL() << "expected ConfigError";
  } catch (const thlab::ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("not valid for command 'threshold'"), std::string::npos);
  }
}

TEST(RunConfig, EnvironmentKeysMapToSpec) {
  const thlab::RunConfig cfg = cfg_of(
      "command = threshold\n"
      "lambda = 1.3\nv = 1.1\nomega0 = 0.9\ncutoff = 2.5\n"
      "s = 0.5\ndimension = 2\ndelta = 0.5\nbox_l = 50\nq0 = 2\n");
  EXPECT_EQ(cfg.env.lambda, 1.3);
  EXPECT_EQ(cfg.env.v, 1.1);
  EXPECT_EQ(cfg.env.omega0, 0.9);
  EXPECT_EQ(cfg.env.Lambda, 2.5);
  EXPECT_EQ(cfg.env.s, 0.5);
  EXPECT_EQ(cfg.env.D, 2);
  EXPECT_EQ(cfg.env.Delta, 0.5);
  EXPECT_EQ(cfg.env.L, 50.0);
  EXPECT_EQ(cfg.env.q0, 2.0);

  try {
    cfg_of("command = threshold\nv = -1\n");
    FAIL() << "expected ConfigError";
  } catch (const thlab::ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("invalid environment parameters"), std::string::npos);
  }
}

TEST(RunConfig, StochasticCommandsRequireSeed) {
  try {
    cfg_of("command = critical\n");
    FAIL() << "expected ConfigError";
  } catch (const thlab::ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("stochastic and requires a seed"), std::string::npos);
  }
  EXPECT_THROW(cfg_of("command = sweep\nlambda_list = 0,1\n"), thlab::ConfigError);
  EXPECT_NO_THROW(cfg_of("command = sweep\nlambda_list = 0,1\nseed = 4\n"));
  EXPECT_NO_THROW(cfg_of("command = threshold\n"));
  EXPECT_NO_THROW(cfg_of("command = fidelity\n"));
}

TEST(RunConfig, FieldValidation) {
  EXPECT_THROW(cfg_of("command = sweep\nseed = 1\n"), thlab::ConfigError);  // no lambda_list
  EXPECT_THROW(cfg_of("command = critical\nseed = 1\ntrace_path = t.csv\n"), thlab::ConfigError);
  EXPECT_THROW(cfg_of("command = correlators\nmode = fourier\n"), thlab::ConfigError);
  EXPECT_THROW(cfg_of("command = fidelity\nmethod = magic\n"), thlab::ConfigError);
  EXPECT_THROW(cfg_of("command = fidelity\nform = spin2\n"), thlab::ConfigError);
  EXPECT_THROW(cfg_of("command = fidelity\nd = 1\n"), thlab::ConfigError);
  EXPECT_THROW(cfg_of("command = fidelity\nn_cycles = 0\n"), thlab::ConfigError);
  EXPECT_THROW(cfg_of("command = fidelity\nmc_sweeps = 50\n"), thlab::ConfigError);
  EXPECT_THROW(cfg_of("command = correlators\nmax_cycle_sep = -1\n"), thlab::ConfigError);
  EXPECT_THROW(cfg_of("command = threshold\nthreads = -2\n"), thlab::ConfigError);
  EXPECT_THROW(cfg_of("command = threshold\nlambda = two\n"), thlab::ConfigError);
  EXPECT_THROW(cfg_of("command = sweep\nseed = 1\nlambda_list = 0,,1\n"), thlab::ConfigError);
  EXPECT_THROW(cfg_of("command = sweep\nseed = 1\nlambda_list = 0,1\nd_list = 1,2\n"),
               thlab::ConfigError);
}

TEST(RunConfig, OverridesLandInItems) {
  auto items = items_of("command = fidelity\nmethod = exact\n");
  const thlab::RunConfig cfg =
      thlab::make_run_config(items, std::string("custom/f.csv"), uint64_t{9}, 2);
  EXPECT_EQ(cfg.output_path, "custom/f.csv");
  EXPECT_EQ(cfg.seed, 9u);
  EXPECT_TRUE(cfg.seed_given);
  EXPECT_EQ(cfg.threads, 2);
  EXPECT_EQ(cfg.items.at("output_path"), "custom/f.csv");
  EXPECT_EQ(cfg.items.at("seed"), "9");
  EXPECT_EQ(cfg.items.at("threads"), "2");
}

TEST(RunConfig, HashIgnoresOutputPathsOnly) {
  const std::string base = "command = fidelity\nmethod = exact\nlambda = 0.7\n";
  const uint64_t h1 = cfg_of(base + "output_path = a.csv\n").config_hash();
  const uint64_t h2 = cfg_of(base + "output_path = b.csv\n").config_hash();
  EXPECT_EQ(h1, h2);

  const std::string crit =
      "command = critical\nseed = 5\ntrace_size = 8\ntrace_j = 1.7\nmc_sweeps = 1000\n";
  const uint64_t t1 = cfg_of(crit + "trace_path = x.csv\n").config_hash();
  const uint64_t t2 = cfg_of(crit + "trace_path = y.csv\n").config_hash();
  EXPECT_EQ(t1, t2);

  EXPECT_NE(cfg_of(base + "seed = 1\n").config_hash(), cfg_of(base + "seed = 2\n").config_hash());
  EXPECT_NE(cfg_of(base).config_hash(), cfg_of("command = fidelity\nmethod = exact\nlambda = 0.8\n").config_hash());
}

TEST(RunDriver, ThresholdArtifactAndManifest) {
  TempDir dir;
  auto items = items_of("command = threshold\nlambda = 1\n");
  const thlab::RunConfig cfg =
      thlab::make_run_config(items, dir.file("th.csv"), std::nullopt, std::nullopt);
  const thlab::RunOutcome res = thlab::run(cfg);

  ASSERT_EQ(res.artifacts.size(), 1u);
  EXPECT_EQ(res.artifacts[0], dir.file("th.csv"));
  EXPECT_EQ(res.manifest_path, dir.file("th.csv") + ".manifest.json");

  const auto lines = lines_of(read_text(dir.file("th.csv")));
  ASSERT_EQ(lines.size(), 5u);
  EXPECT_EQ(lines[0], "# threshold_lab v0.1.0");
  EXPECT_EQ(lines[1], "# command=threshold");
  EXPECT_EQ(lines[2], "# config_hash=" + thlab::hex64(cfg.config_hash()));
  EXPECT_EQ(lines[3], "lambda_c,j_c");
  const auto comma = lines[4].find(',');
  ASSERT_NE(comma, std::string::npos);
  EXPECT_EQ(std::stod(lines[4].substr(0, comma)), thlab::threshold_lambda(cfg.env));
  EXPECT_EQ(std::stod(lines[4].substr(comma + 1)), thlab::onsager_critical_coupling());

  const nlohmann::json manifest = nlohmann::json::parse(read_text(res.manifest_path));
  EXPECT_EQ(manifest.at("tool"), "threshold_lab");
  EXPECT_EQ(manifest.at("version"), "0.1.0");
  EXPECT_EQ(manifest.at("command"), "threshold");
  EXPECT_EQ(manifest.at("config_hash"), thlab::hex64(cfg.config_hash()));
  EXPECT_EQ(manifest.at("config").at("command"), "threshold");
  EXPECT_EQ(manifest.at("config").at("output_path"), dir.file("th.csv"));
  ASSERT_EQ(manifest.at("artifacts").size(), 1u);
  EXPECT_EQ(manifest.at("artifacts")[0], dir.file("th.csv"));
  EXPECT_GE(manifest.at("threads").get<int>(), 1);
  EXPECT_GE(manifest.at("wall_time_s").get<double>(), 0.0);
  const std::string ts = manifest.at("timestamp");
  EXPECT_EQ(ts.size(), 20u);
  EXPECT_EQ(ts.back(), 'Z');
  EXPECT_EQ(manifest.at("extras").at("lambda_c").get<double>(), thlab::threshold_lambda(cfg.env));
}

TEST(RunDriver, CorrelatorsCsvMatchesTable) {
  TempDir dir;
  auto items = items_of("command = correlators\nd = 2\nmax_cycle_sep = 1\n");
  const thlab::RunConfig cfg =
      thlab::make_run_config(items, dir.file("corr.csv"), std::nullopt, std::nullopt);
  const thlab::RunOutcome res = thlab::run(cfg);

  const thlab::CodeLattice lat = thlab::build_lattice(2);
  const thlab::CorrelatorTable table = thlab::CorrelatorTable::build(
      cfg.env, thlab::all_pair_displacements(lat), 1, thlab::CorrelatorMode::Continuum);
  EXPECT_EQ(res.extras.at("entries").get<size_t>(), table.size());

  const auto lines = lines_of(read_text(dir.file("corr.csv")));
  ASSERT_EQ(lines.size(), 3u + 1u + table.size());
  EXPECT_EQ(lines[0], "# threshold_lab v0.1.0");
  EXPECT_EQ(lines[3], "kind,rx,ry,n,value,mode");
  EXPECT_NE(lines[4].find("continuum"), std::string::npos);
}

TEST(RunDriver, CriticalWritesPointsEstimateAndTrace) {
  TempDir dir;
  auto items = items_of(
      "command = critical\nseed = 11\nmc_sizes = 4,8\nmc_grid = 0.9,1.8,3.0\n"
      "mc_sweeps = 2000\ntrace_path = " +
      dir.file("trace.csv") + "\ntrace_size = 4\ntrace_j = 1.8\n");
  const thlab::RunConfig cfg =
      thlab::make_run_config(items, dir.file("crit.csv"), std::nullopt, std::nullopt);
  const thlab::RunOutcome res = thlab::run(cfg);

  ASSERT_EQ(res.artifacts.size(), 2u);
  EXPECT_EQ(res.artifacts[0], dir.file("crit.csv"));
  EXPECT_EQ(res.artifacts[1], dir.file("trace.csv"));

  const auto lines = lines_of(read_text(dir.file("crit.csv")));
  // 3 comments, header, 2 sizes x 3 grid points, one estimate row.
  ASSERT_EQ(lines.size(), 3u + 1u + 6u + 1u);
  EXPECT_EQ(lines[3], "record,size,J,binder,binder_err,m_abs,drift_flag,j_c,j_c_err");
  for (int i = 4; i < 10; ++i) EXPECT_EQ(lines[i].substr(0, 12), "binder_point");
  EXPECT_EQ(lines[10].substr(0, 8), "estimate");

  const double j_c = res.extras.at("j_c").get<double>();
  EXPECT_GT(j_c, 0.9);
  EXPECT_LT(j_c, 3.0);

  const auto trace = lines_of(read_text(dir.file("trace.csv")));
  ASSERT_EQ(trace.size(), 3u + 2000u);
  EXPECT_EQ(trace[0], "# threshold_lab v0.1.0");
  EXPECT_EQ(trace[1], "# config_hash=" + thlab::hex64(cfg.config_hash()));
  EXPECT_EQ(trace[2], "sweep,m,m2,m4");
  EXPECT_EQ(trace[3].substr(0, 2), "0,");
}

TEST(RunDriver, FidelityExactMatchesLibrary) {
  TempDir dir;
  auto items = items_of("command = fidelity\nd = 2\nmethod = exact\nlambda = 0.7\n");
  const thlab::RunConfig cfg =
      thlab::make_run_config(items, dir.file("fid.csv"), std::nullopt, std::nullopt);
  const thlab::RunOutcome res = thlab::run(cfg);

  const thlab::CodeLattice lat = thlab::build_lattice(2);
  const thlab::EffectiveHamiltonian h =
      thlab::make_reduced_hamiltonian(lat, cfg.env, 1, thlab::HamiltonianForm::SingleSlice);
  const thlab::FidelityEstimate expect = thlab::fidelity_exact(lat, h, 1);
  EXPECT_EQ(res.extras.at("fidelity").get<double>(), expect.value);

  const auto lines = lines_of(read_text(dir.file("fid.csv")));
  ASSERT_EQ(lines.size(), 5u);
  EXPECT_EQ(lines[3], "d,N,lambda,J,fidelity,std_error,method,seed");
  const auto cells = [&] {
    std::vector<std::string> out;
    std::istringstream in(lines[4]);
    std::string cell;
    while (std::getline(in, cell, ',')) out.push_back(cell);
    return out;
  }();
  ASSERT_EQ(cells.size(), 8u);
  EXPECT_EQ(cells[0], "2");
  EXPECT_EQ(cells[1], "1");
  EXPECT_EQ(std::stod(cells[2]), 0.7);
  EXPECT_EQ(std::stod(cells[3]), expect.J);
  EXPECT_EQ(std::stod(cells[4]), expect.value);
  EXPECT_EQ(cells[6], "exact_enumeration");
}

TEST(RunDriver, FidelityMonteCarloFallbackNeedsSeed) {
  TempDir dir;
  // d = 3 has 6 plaquette slots; an enumeration limit of 1 forces sampling.
  // lambda near the threshold keeps the true value well below one, so the
  // sampled estimate sits away from the range boundary.
  const std::string base =
      "command = fidelity\nd = 3\nmethod = slice\nenumeration_limit = 1\n"
      "mc_sweeps = 5000\nmax_std_error = 0.5\nlambda = 1.6\n";
  {
    auto items = items_of(base);
    const thlab::RunConfig cfg =
        thlab::make_run_config(items, dir.file("f0.csv"), std::nullopt, std::nullopt);
    try {
      thlab::run(cfg);
      FAIL() << "expected ConfigError";
    } catch (const thlab::ConfigError& e) {
      EXPECT_NE(std::string(e.what()).find("requires a seed"), std::string::npos);
    }
    EXPECT_FALSE(fs::exists(dir.file("f0.csv")));
  }
  {
    auto items = items_of(base + "seed = 314\n");
    const thlab::RunConfig cfg =
        thlab::make_run_config(items, dir.file("f1.csv"), std::nullopt, std::nullopt);
    const thlab::RunOutcome res = thlab::run(cfg);
    EXPECT_EQ(res.extras.at("method"), "monte_carlo");
    const double value = res.extras.at("fidelity").get<double>();
    EXPECT_GT(value, 0.5);
    EXPECT_LT(value, 0.99);
    EXPECT_TRUE(fs::exists(dir.file("f1.csv")));
  }
}

TEST(RunDriver, SweepRerunIsByteIdentical) {
  TempDir dir;
  const std::string base =
      "command = sweep\nseed = 5\nd_list = 2,3\nlambda_list = 0,0.9\nn_cycles = 1\n";
  auto run_once = [&](const std::string& name) {
    auto items = items_of(base);
    const thlab::RunConfig cfg =
        thlab::make_run_config(items, dir.file(name), std::nullopt, std::nullopt);
    thlab::run(cfg);
    return read_text(dir.file(name));
  };
  const std::string first = run_once("s1.csv");
  const std::string second = run_once("s2.csv");
  EXPECT_EQ(first, second);

  const auto lines = lines_of(first);
  ASSERT_EQ(lines.size(), 4u + 1u + 4u);  // 4 comments, header, 2 x 2 cells
  EXPECT_EQ(lines[3], "# monotone_within_errors=1");
  EXPECT_EQ(lines[4], "d,N,lambda,J,fidelity,std_error,method,seed");
  // lambda = 0 decouples the bath, so the first cell of each distance is 1.
  EXPECT_EQ(lines[5].substr(0, 6), "2,1,0,");
  EXPECT_NE(lines[5].find(",1,"), std::string::npos);
}

TEST(CliBinary, ThresholdRunSucceeds) {
  TempDir dir;
  write_text(dir.file("run.cfg"), "command = threshold\nlambda = 2\n");
  std::string out, err;
  const int rc =
      run_cli("--config " + dir.file("run.cfg") + " --out " + dir.file("th.csv"), dir, &out, &err);
  EXPECT_EQ(rc, 0);
  EXPECT_TRUE(err.empty()) << err;

  const nlohmann::json rep = nlohmann::json::parse(out);
  EXPECT_EQ(rep.at("command"), "threshold");
  ASSERT_EQ(rep.at("artifacts").size(), 1u);
  EXPECT_EQ(rep.at("artifacts")[0], dir.file("th.csv"));
  EXPECT_EQ(rep.at("manifest"), dir.file("th.csv") + ".manifest.json");
  EXPECT_TRUE(fs::exists(dir.file("th.csv")));

  // The hash comment in the CSV matches the manifest and pins the override.
  const nlohmann::json manifest =
      nlohmann::json::parse(read_text(dir.file("th.csv") + ".manifest.json"));
  const auto lines = lines_of(read_text(dir.file("th.csv")));
  EXPECT_EQ(lines[2], "# config_hash=" + manifest.at("config_hash").get<std::string>());
  EXPECT_EQ(manifest.at("config").at("output_path"), dir.file("th.csv"));
}

TEST(CliBinary, ConfigErrorsExitTwo) {
  TempDir dir;
  std::string out, err;

  write_text(dir.file("bad.cfg"), "command threshold\n");
  EXPECT_EQ(run_cli("--config " + dir.file("bad.cfg") + " --out " + dir.file("x.csv"), dir, &out,
                    &err),
            2);
  nlohmann::json rec = nlohmann::json::parse(err);
  EXPECT_EQ(rec.at("error").at("category"), "config");
  EXPECT_NE(rec.at("error").at("message").get<std::string>().find("config line 1"),
            std::string::npos);
  EXPECT_FALSE(fs::exists(dir.file("x.csv")));

  write_text(dir.file("key.cfg"), "command = threshold\nwidget = 3\n");
  EXPECT_EQ(run_cli("--config " + dir.file("key.cfg"), dir, &out, &err), 2);
  EXPECT_EQ(nlohmann::json::parse(err).at("error").at("category"), "config");

  EXPECT_EQ(run_cli("--config " + dir.file("absent.cfg"), dir, &out, &err), 2);
  EXPECT_NE(nlohmann::json::parse(err).at("error").at("message").get<std::string>().find(
                "cannot open config file"),
            std::string::npos);

  write_text(dir.file("ok.cfg"), "command = threshold\n");
  EXPECT_EQ(run_cli("--config " + dir.file("ok.cfg"), dir, &out, &err,
                    "THRESHOLD_LAB_THREADS=abc "),
            2);
  EXPECT_EQ(nlohmann::json::parse(err).at("error").at("category"), "config");

  EXPECT_NE(run_cli("", dir, &out, &err), 0);  // --config is required
}

TEST(CliBinary, CapacityErrorsExitThree) {
  TempDir dir;
  write_text(dir.file("big.cfg"), "command = fidelity\nd = 4\nmethod = exact\n");
  std::string out, err;
  EXPECT_EQ(run_cli("--config " + dir.file("big.cfg") + " --out " + dir.file("big.csv"), dir, &out,
                    &err),
            3);
  const nlohmann::json rec = nlohmann::json::parse(err);
  EXPECT_EQ(rec.at("error").at("category"), "capacity");
  EXPECT_FALSE(fs::exists(dir.file("big.csv")));
}

TEST(CliBinary, NumericalErrorsExitFour) {
  TempDir dir;
  // Both grid points sit in the ordered phase, so no crossing is bracketed.
  write_text(dir.file("nb.cfg"),
             "command = critical\nseed = 3\nmc_sizes = 4,8\nmc_grid = 3.5,4.0\nmc_sweeps = 500\n");
  std::string out, err;
  EXPECT_EQ(run_cli("--config " + dir.file("nb.cfg") + " --out " + dir.file("nb.csv"), dir, &out,
                    &err),
            4);
  const nlohmann::json rec = nlohmann::json::parse(err);
  EXPECT_EQ(rec.at("error").at("category"), "numerical");
  EXPECT_NE(rec.at("error").at("message").get<std::string>().find("bracket"), std::string::npos);
}

TEST(CliBinary, HelpExitsZero) {
  TempDir dir;
  std::string out;
  EXPECT_EQ(run_cli("--help", dir, &out), 0);
  EXPECT_NE(out.find("threshold_lab"), std::string::npos);
}
