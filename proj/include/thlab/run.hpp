// run.hpp — batch driver behind the CLI: executes one RunConfig, writes the
// command's CSV artifact(s) atomically, and emits a JSON run manifest.

#pragma once

#include <chrono>
#include <cstdint>
#include <ctime>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"
#include "thlab/code.hpp"
#include "thlab/config.hpp"
#include "thlab/env.hpp"
#include "thlab/fidelity.hpp"
#include "thlab/io.hpp"
#include "thlab/ising_mc.hpp"
#include "thlab/statmech.hpp"
#include "thlab/util.hpp"
#include "thlab/version.hpp"

namespace thlab {

struct RunOutcome {
  std::vector<std::string> artifacts;  // CSV paths, in write order
  std::string manifest_path;
  nlohmann::json extras;  // command-specific summary values
};

namespace detail {

inline int effective_threads(const RunConfig& cfg) {
  if (cfg.threads > 0) return cfg.threads;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

inline std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

inline std::vector<std::string> fidelity_columns() {
  return {"d", "N", "lambda", "J", "fidelity", "std_error", "method", "seed"};
}

inline std::vector<std::string> fidelity_row(const FidelityEstimate& e) {
  return {std::to_string(e.d),           std::to_string(e.n_cycles),  format_double(e.lambda),
          format_double(e.J),            format_double(e.value),      format_double(e.std_error),
          to_string(e.method),           std::to_string(e.seed)};
}

}  // namespace detail

inline RunOutcome run(const RunConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  const uint64_t hash = cfg.config_hash();
  const int threads = detail::effective_threads(cfg);

  RunOutcome out;
  CsvDocument doc;
  doc.comments = standard_csv_comments(cfg.command, hash);

  if (cfg.command == "threshold") {
    const double lambda_c = threshold_lambda(cfg.env);
    const double j_c = onsager_critical_coupling();
    doc.columns = {"lambda_c", "j_c"};
    doc.rows.push_back({format_double(lambda_c), format_double(j_c)});
    out.extras["lambda_c"] = lambda_c;
    out.extras["j_c"] = j_c;
  } else if (cfg.command == "correlators") {
    const CodeLattice lat = build_lattice(cfg.d);
    const CorrelatorMode mode =
        cfg.mode == "discrete" ? CorrelatorMode::Discrete : CorrelatorMode::Continuum;
    const CorrelatorTable table =
        CorrelatorTable::build(cfg.env, all_pair_displacements(lat), cfg.max_cycle_sep, mode, {}, threads);
    std::ostringstream body;
    table.write_csv(body);
    std::ostringstream head;
    for (const auto& c : doc.comments) head << "# " << c << '\n';
    write_file_atomic(cfg.output_path, head.str() + body.str());
    out.artifacts.push_back(cfg.output_path);
    out.extras["entries"] = table.size();
  } else if (cfg.command == "critical") {
    IsingMCOptions opts;
    opts.use_wolff = cfg.use_wolff;
    opts.threads = threads;
    const CriticalEstimate est = mc_locate_critical(cfg.mc_sizes, cfg.mc_grid, cfg.mc_sweeps, cfg.seed, opts);
    doc.columns = {"record", "size", "J", "binder", "binder_err", "m_abs", "drift_flag", "j_c", "j_c_err"};
    for (const auto& p : est.points)
      doc.rows.push_back({"binder_point", std::to_string(p.size), format_double(p.J), format_double(p.binder),
                          format_double(p.binder_err), format_double(p.m_abs), p.drift_flag ? "1" : "0", "",
                          ""});
    doc.rows.push_back({"estimate", "", "", "", "", "", est.any_drift ? "1" : "0", format_double(est.j_c),
                        format_double(est.std_error)});
    out.extras["j_c"] = est.j_c;
    out.extras["j_c_err"] = est.std_error;
    out.extras["any_drift"] = est.any_drift;
    if (!cfg.trace_path.empty()) {
      std::ostringstream trace;
      trace << "# " << kToolName << " v" << kToolVersion << "\n# config_hash=" << hex64(hash)
            << "\nsweep,m,m2,m4\n";
      IsingMCOptions topts = opts;
      topts.n_sweeps = cfg.mc_sweeps;
      topts.trace = &trace;
      mc_binder_point(cfg.trace_size, cfg.trace_j, derive_seed(cfg.seed, 0x7472616365), topts);
      write_file_atomic(cfg.trace_path, trace.str());
      out.artifacts.push_back(cfg.trace_path);
    }
  } else if (cfg.command == "fidelity") {
    const CodeLattice lat = build_lattice(cfg.d);
    FidelityEstimate est;
    if (cfg.method == "slice") {
      SliceProductOptions opts;
      opts.mc_sweeps = cfg.mc_sweeps;
      opts.enumeration_limit = cfg.enumeration_limit;
      opts.max_std_error = cfg.max_std_error;
      opts.seed = cfg.seed;
      if (static_cast<int>(lat.plaquette_sites.size()) > cfg.enumeration_limit && !cfg.seed_given)
        throw ConfigError("fidelity falls back to Monte Carlo at this size and requires a seed");
      est = fidelity_slice_product(lat, cfg.env, cfg.n_cycles, opts);
    } else {
      const HamiltonianForm form =
          cfg.form == "spin1_chain" ? HamiltonianForm::Spin1Chain : HamiltonianForm::SingleSlice;
      const EffectiveHamiltonian h = make_reduced_hamiltonian(lat, cfg.env, cfg.n_cycles, form);
      est = fidelity_exact(lat, h, cfg.n_cycles);
      est.lambda = cfg.env.lambda;
    }
    doc.columns = detail::fidelity_columns();
    doc.rows.push_back(detail::fidelity_row(est));
    out.extras["fidelity"] = est.value;
    out.extras["std_error"] = est.std_error;
    out.extras["method"] = to_string(est.method);
    out.extras["converged"] = est.converged;
  } else if (cfg.command == "sweep") {
    SliceProductOptions opts;
    opts.mc_sweeps = cfg.mc_sweeps;
    opts.enumeration_limit = cfg.enumeration_limit;
    opts.max_std_error = cfg.max_std_error;
    const SweepResult res =
        fidelity_sweep(cfg.d_list, cfg.lambda_list, cfg.env, cfg.n_cycles, cfg.seed, opts, threads);
    doc.comments.push_back(std::string("monotone_within_errors=") + (res.monotone_ok ? "1" : "0"));
    doc.columns = detail::fidelity_columns();
    for (const auto& e : res.cells) doc.rows.push_back(detail::fidelity_row(e));
    out.extras["monotone_within_errors"] = res.monotone_ok;
    out.extras["monotone_violations"] = res.monotone_violations;
  } else {
    throw ConfigError("unknown command '" + cfg.command + "'");
  }

  if (cfg.command != "correlators") {
    write_file_atomic(cfg.output_path, doc.to_string());
    out.artifacts.insert(out.artifacts.begin(), cfg.output_path);
  }

  const double wall =
      std::chrono::duration_cast<std::chrono::duration<double>>(std::chrono::steady_clock::now() - t0).count();
  nlohmann::json manifest;
  manifest["tool"] = kToolName;
  manifest["version"] = kToolVersion;
  manifest["command"] = cfg.command;
  manifest["config"] = cfg.items;
  manifest["config_hash"] = hex64(hash);
  manifest["artifacts"] = out.artifacts;
  manifest["threads"] = threads;
  manifest["wall_time_s"] = wall;
  manifest["timestamp"] = detail::utc_timestamp();
  manifest["extras"] = out.extras;
  out.manifest_path = cfg.output_path + ".manifest.json";
  write_file_atomic(out.manifest_path, manifest.dump(2) + "\n");
  return out;
}

}  // namespace thlab
