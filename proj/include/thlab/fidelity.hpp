// fidelity.hpp — logical-qubit fidelity after N nonerror QEC cycles: the
// doubled-history enumeration oracle, the per-slice boundary-field Ising
// evaluation with its Monte Carlo fallback, the coupling threshold, and the
// (d, lambda) sweep driver.

#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "thlab/code.hpp"
#include "thlab/env.hpp"
#include "thlab/ising_mc.hpp"
#include "thlab/statmech.hpp"
#include "thlab/util.hpp"

namespace thlab {

enum class FidelityMethod { ExactEnumeration, SliceProduct, MonteCarlo };

inline const char* to_string(FidelityMethod m) {
  switch (m) {
    case FidelityMethod::ExactEnumeration: return "exact_enumeration";
    case FidelityMethod::SliceProduct: return "slice_product";
    case FidelityMethod::MonteCarlo: return "monte_carlo";
  }
  return "?";
}

struct FidelityEstimate {
  double value = 0.0;
  double std_error = 0.0;  // 0 for exact methods
  FidelityMethod method = FidelityMethod::ExactEnumeration;
  int d = 0;
  int n_cycles = 0;
  double lambda = std::numeric_limits<double>::quiet_NaN();  // NaN when J was given directly
  double J = 0.0;
  uint64_t seed = 0;
  double norm_denominator = std::numeric_limits<double>::quiet_NaN();
  bool converged = true;
};

// Which per-slice configuration basis the exact oracle enumerates: the
// star-constrained sigma set directly, or the full mass-field preimage with
// the 2-to-1 gauge multiplicity divided out. Both must give the same ratio.
enum class ExactBasis { Constrained, MassField };

namespace detail {

inline std::vector<std::vector<Sign>> mass_field_image_configs(const CodeLattice& lat) {
  const int n_dual = static_cast<int>(lat.plaquette_sites.size());
  const int bits = n_dual + 2;
  if (bits > 24) throw CapacityError("mass-field image enumeration: 2^" + std::to_string(bits) + " configs");
  MassFieldConfig mf;
  mf.n_slices = 1;
  mf.n_dual = n_dual;
  mf.mu.assign(n_dual, 1);
  mf.alpha_bottom.assign(1, 1);
  mf.alpha_top.assign(1, 1);
  std::vector<std::vector<Sign>> out;
  out.reserve(size_t{1} << bits);
  for (uint64_t mask = 0; mask < (uint64_t{1} << bits); ++mask) {
    for (int p = 0; p < n_dual; ++p) mf.mu[p] = (mask >> p) & 1 ? -1 : 1;
    mf.alpha_bottom[0] = (mask >> n_dual) & 1 ? -1 : 1;
    mf.alpha_top[0] = (mask >> (n_dual + 1)) & 1 ? -1 : 1;
    out.push_back(mass_field_to_sigma(lat, mf, 0));
  }
  return out;
}

inline double logical_x_parity(const CodeLattice& lat, const std::vector<Sign>& sigma) {
  int par = 1;
  for (int q : lat.logical_x_path) par *= sigma[q];
  return par;
}

}  // namespace detail

// Exhaustive doubled-history oracle. Sums exp(-H) over every (sigma-bar,
// tau-bar) history built from per-slice star-constrained configurations, with
// the logical insertions summed per slice: identity only at the first and
// last cycle in the numerator, identity and logical-X in the denominator.
// Complex weights are carried through and must cancel to floating-point
// noise. The ratio is the fidelity.
inline FidelityEstimate fidelity_exact(const CodeLattice& lat, const EffectiveHamiltonian& h, int n_cycles,
                                       ExactBasis basis = ExactBasis::Constrained) {
  if (h.form == HamiltonianForm::IsingSlice)
    throw std::invalid_argument("fidelity_exact: IsingSlice form is not a history Hamiltonian");
  if (!h.lattice || h.lattice->M != lat.M)
    throw std::invalid_argument("fidelity_exact: Hamiltonian lattice does not match");
  if (n_cycles < 1) throw std::invalid_argument("fidelity_exact: n_cycles must be at least 1");
  if (n_cycles != h.n_cycles) throw std::invalid_argument("fidelity_exact: n_cycles mismatch with Hamiltonian");
  if (lat.M > 16)
    throw CapacityError("fidelity_exact: " + std::to_string(lat.M) + " qubits exceed the enumeration cap of 16");
  if (n_cycles > 2)
    throw CapacityError("fidelity_exact: n_cycles = " + std::to_string(n_cycles) +
                        " exceeds the doubled-history cap of 2");

  std::vector<std::vector<Sign>> configs;
  double gauge_divisor = 1.0;
  if (basis == ExactBasis::Constrained) {
    configs = enumerate_constrained_sigma(lat);
  } else {
    configs = detail::mass_field_image_configs(lat);
    gauge_divisor = 2.0;  // global mu flip, per slice side
  }
  const size_t C = configs.size();
  const int N = n_cycles;
  double hist_count = 1.0;
  for (int k = 0; k < 2 * N; ++k) hist_count *= static_cast<double>(C);
  if (hist_count > 268435456.0)
    throw CapacityError("fidelity_exact: " + format_double(hist_count) + " doubled histories exceed 2^28");
  const uint64_t total = static_cast<uint64_t>(hist_count);

  std::vector<double> xpar(C);
  for (size_t i = 0; i < C; ++i) xpar[i] = detail::logical_x_parity(lat, configs[i]);

  SpinHistory hist = SpinHistory::filled(lat.M, N);
  std::vector<size_t> digit(2 * N, 0);  // digits 0..N-1: sigma slices, N..2N-1: tau slices
  auto load_digit = [&](int k, size_t v) {
    const std::vector<Sign>& c = configs[v];
    Sign* dst = (k < N ? hist.sigma.data() + size_t(k) * lat.M : hist.tau.data() + size_t(k - N) * lat.M);
    std::copy(c.begin(), c.end(), dst);
  };
  auto reset_odometer = [&]() {
    std::fill(digit.begin(), digit.end(), 0);
    for (int k = 0; k < 2 * N; ++k) load_digit(k, 0);
  };
  auto advance_odometer = [&]() {
    for (int k = 0; k < 2 * N; ++k) {
      if (++digit[k] < C) {
        load_digit(k, digit[k]);
        return true;
      }
      digit[k] = 0;
      load_digit(k, 0);
    }
    return false;
  };
  auto hist_energy = [&]() -> std::complex<double> {
    switch (h.form) {
      case HamiltonianForm::General: return energy_general_raw(h, hist);
      case HamiltonianForm::Spin1Chain: return {energy_superohmic(h, hist), 0.0};
      default: return {energy_single_slice(h, hist), 0.0};
    }
  };

  // Shift energies so the largest weight is O(1). The reduced forms at J >= 0
  // are bounded below by zero; otherwise scan for the minimum first.
  double e_ref = 0.0;
  if (h.form == HamiltonianForm::General || h.J < 0.0) {
    reset_odometer();
    for (uint64_t it = 0; it < total; ++it) {
      e_ref = std::min(e_ref, hist_energy().real());
      if (it + 1 < total) advance_odometer();
    }
  }

  std::complex<double> num = 0.0, den = 0.0;
  reset_odometer();
  for (uint64_t it = 0; it < total; ++it) {
    const std::complex<double> w = std::exp(-(hist_energy() - e_ref));
    double f_num = 1.0, f_den = 1.0;
    for (int l = 0; l < N; ++l) {
      const double fx = (1.0 + xpar[digit[l]]) * (1.0 + xpar[digit[N + l]]);
      f_den *= fx;
      if (l != 0 && l != N - 1) f_num *= fx;
    }
    num += f_num * w;
    den += f_den * w;
    if (it + 1 < total) advance_odometer();
  }

  if (std::abs(num.imag()) > 1e-9 * std::max(1.0, std::abs(num.real())) ||
      std::abs(den.imag()) > 1e-9 * std::max(1.0, std::abs(den.real())))
    throw std::runtime_error("fidelity_exact: complex weights failed to cancel pairwise");
  if (den.real() <= 0.0) throw std::runtime_error("fidelity_exact: degenerate denominator (nonpositive)");

  // True denominator including the per-matrix-element star normalization
  // N_diamond = 2^{#stars} and the gauge division, kept in log space for the
  // degeneracy check.
  const double log2v = std::log(2.0);
  const double log_den = std::log(den.real()) - e_ref + 2.0 * N * static_cast<double>(lat.stars.size()) * log2v -
                         2.0 * N * std::log(gauge_divisor);
  if (log_den < -690.0) throw std::runtime_error("fidelity_exact: denominator below 1e-300 (degenerate weights)");

  FidelityEstimate est;
  est.value = num.real() / den.real();
  est.std_error = 0.0;
  est.method = FidelityMethod::ExactEnumeration;
  est.d = lat.distance;
  est.n_cycles = N;
  est.J = h.J;
  if (h.form == HamiltonianForm::General && h.table) est.lambda = h.table->env().lambda;
  est.seed = 0;
  est.norm_denominator = std::exp(log_den);
  est.converged = true;
  return est;
}

struct SliceProductOptions {
  int enumeration_limit = 20;  // dual-site count handled by exact per-slice sums
  long mc_sweeps = 200000;
  double burn_in_fraction = 0.2;
  int n_blocks = 100;
  int n_bootstrap = 100;
  double max_std_error = 0.01;  // convergence flag threshold on the final value
  uint64_t seed = 1;
};

namespace detail {

struct SliceRatio {
  double ratio = 1.0;       // (1 + R)/2 with R = Z(+-)/Z(++)
  double ratio_err = 0.0;
  double z_aligned = std::numeric_limits<double>::quiet_NaN();  // Z(++), enumeration only
  bool mc = false;
  bool converged = true;
};

inline double logsumexp(const std::vector<double>& v) {
  double mx = -std::numeric_limits<double>::infinity();
  for (double x : v) mx = std::max(mx, x);
  double s = 0.0;
  for (double x : v) s += std::exp(x - mx);
  return mx + std::log(s);
}

// R = Z(+-)/Z(++) by exhaustive mass-field enumeration with a log-sum-exp
// shift; feasible up to ~20 dual sites.
inline SliceRatio slice_ratio_enumerated(const CodeLattice& lat, double J) {
  const int n = static_cast<int>(lat.plaquette_sites.size());
  std::vector<Sign> s(n, 1);
  std::vector<double> l_pp, l_pm;
  l_pp.reserve(size_t{1} << n);
  l_pm.reserve(size_t{1} << n);
  for (uint64_t mask = 0; mask < (uint64_t{1} << n); ++mask) {
    for (int p = 0; p < n; ++p) s[p] = (mask >> p) & 1 ? -1 : 1;
    l_pp.push_back(-ising_slice_energy_split(lat, s, 1, 1, J));
    l_pm.push_back(-ising_slice_energy_split(lat, s, 1, -1, J));
  }
  const double log_zpp = logsumexp(l_pp);
  const double log_zpm = logsumexp(l_pm);
  SliceRatio r;
  r.ratio = 0.5 * (1.0 + std::exp(log_zpm - log_zpp));
  r.z_aligned = std::exp(log_zpp);
  return r;
}

// R via Metropolis sampling of the aligned-field ensemble and the overlap
// observable exp(-(J/2) * sum_top s): the exact reweighting factor between
// the anti-aligned and aligned top boundary field.
inline SliceRatio slice_ratio_mc(const CodeLattice& lat, double J, const SliceProductOptions& opts) {
  const int n = static_cast<int>(lat.plaquette_sites.size());
  std::vector<std::vector<int>> adj(n);
  for (const auto& [a, b] : lat.dual_bonds) {
    adj[a].push_back(b);
    adj[b].push_back(a);
  }
  std::vector<int> field(n, 0);  // aligned-ensemble field coefficient per site
  for (int p : lat.bottom_sites) field[p] += 1;
  for (int p : lat.top_sites) field[p] += 1;

  std::vector<Sign> s(n, 1);
  std::mt19937_64 rng(opts.seed);
  const long burn = static_cast<long>(opts.mc_sweeps * opts.burn_in_fraction);
  const long kept = opts.mc_sweeps - burn;
  const int n_blocks = static_cast<int>(std::min<long>(opts.n_blocks, kept));
  const long block_len = kept / n_blocks;
  std::vector<double> block_o(n_blocks, 0.0);

  for (long sweep = 0; sweep < opts.mc_sweeps; ++sweep) {
    for (int p = 0; p < n; ++p) {
      int hloc = field[p];
      for (int q : adj[p]) hloc += s[q];
      const double de = 0.5 * J * s[p] * hloc;
      if (de <= 0.0 || unit_double(rng) < std::exp(-de)) s[p] = -s[p];
    }
    const long k = sweep - burn;
    if (k < 0) continue;
    const long b = k / block_len;
    if (b >= n_blocks) continue;
    int top_sum = 0;
    for (int p : lat.top_sites) top_sum += s[p];
    block_o[b] += std::exp(-0.5 * J * top_sum) / block_len;
  }

  const double r_hat = mean_of(block_o, 0, block_o.size());
  std::mt19937_64 boot(derive_seed(opts.seed, 0x736c696365));
  std::vector<double> resampled(opts.n_bootstrap);
  for (int b = 0; b < opts.n_bootstrap; ++b) {
    double acc = 0.0;
    for (int k = 0; k < n_blocks; ++k) acc += block_o[boot() % n_blocks];
    resampled[b] = acc / n_blocks;
  }

  SliceRatio r;
  r.mc = true;
  // The reweighting observable is unbounded above, but the target ratio
  // Z(+-)/Z(++) never exceeds one; truncating statistical overshoot keeps
  // every estimate inside the declared [0, 1] range at reduced variance.
  r.ratio = std::min(0.5 * (1.0 + r_hat), 1.0);
  r.ratio_err = 0.5 * stddev_of(resampled, 0, resampled.size());
  const size_t half = block_o.size() / 2;
  if (half >= 2) {
    const double m1 = mean_of(block_o, 0, half);
    const double m2 = mean_of(block_o, half, block_o.size());
    const double se1 = stderr_of(block_o, 0, half);
    const double se2 = stderr_of(block_o, half, block_o.size());
    if (std::abs(m1 - m2) > 5.0 * std::sqrt(se1 * se1 + se2 * se2) + 1e-12) r.converged = false;
  }
  return r;
}

}  // namespace detail

// Slice-decoupled fidelity: F = rho^{min(N,2)} where rho is the restricted
// per-slice ratio (1 + Z(+-)/Z(++))/2 of the boundary-field Ising model.
// Unrestricted slices cancel between numerator and denominator; the first and
// last cycle each contribute one factor of rho (they coincide at N = 1).
inline FidelityEstimate fidelity_slice_product_at_J(const CodeLattice& lat, double J, int n_cycles,
                                                    const SliceProductOptions& opts = {}) {
  if (n_cycles < 1) throw std::invalid_argument("fidelity_slice_product: n_cycles must be at least 1");
  if (!(J >= 0.0) || !std::isfinite(J))
    throw std::invalid_argument("fidelity_slice_product: J must be finite and nonnegative");

  const int n_dual = static_cast<int>(lat.plaquette_sites.size());
  const detail::SliceRatio r = (n_dual <= opts.enumeration_limit)
                                   ? detail::slice_ratio_enumerated(lat, J)
                                   : detail::slice_ratio_mc(lat, J, opts);

  const int expo = std::min(n_cycles, 2);
  FidelityEstimate est;
  est.value = (expo == 1) ? r.ratio : r.ratio * r.ratio;
  est.std_error = expo * std::pow(r.ratio, expo - 1) * r.ratio_err;
  est.method = r.mc ? FidelityMethod::MonteCarlo : FidelityMethod::SliceProduct;
  est.d = lat.distance;
  est.n_cycles = n_cycles;
  est.J = J;
  est.seed = r.mc ? opts.seed : 0;
  est.norm_denominator = r.z_aligned;
  est.converged = r.converged && est.std_error <= opts.max_std_error;
  return est;
}

inline FidelityEstimate fidelity_slice_product(const CodeLattice& lat, const EnvironmentSpec& env, int n_cycles,
                                               const SliceProductOptions& opts = {}) {
  FidelityEstimate est = fidelity_slice_product_at_J(lat, coupling_J(env), n_cycles, opts);
  est.lambda = env.lambda;
  return est;
}

// The coupling solving coupling_J(lambda) = onsager_critical_coupling():
// lambda_c = sqrt(pi omega0^3 ln(1+sqrt 2) / (v Lambda)). See README
// "Conventions" for the factor-of-2 note on the printed closed form.
inline double threshold_lambda(const EnvironmentSpec& env) {
  env.validate();
  if (env.D != 2 || env.s != 0.5)
    throw std::invalid_argument("threshold_lambda: closed form requires D = 2 and s = 1/2");
  return std::sqrt(kPi * env.omega0 * env.omega0 * env.omega0 * std::log(1.0 + std::sqrt(2.0)) /
                   (env.v * env.Lambda));
}

struct SweepResult {
  std::vector<FidelityEstimate> cells;  // d-major, lambda-minor, caller's order
  std::vector<int> d_list;
  std::vector<double> lambda_list;
  bool monotone_ok = true;  // fidelity non-increasing in lambda within 2 combined se
  int monotone_violations = 0;
};

inline SweepResult fidelity_sweep(const std::vector<int>& d_list, const std::vector<double>& lambda_list,
                                  const EnvironmentSpec& env_template, int n_cycles, uint64_t seed,
                                  const SliceProductOptions& base_opts = {}, int threads = 1) {
  if (d_list.empty() || lambda_list.empty())
    throw std::invalid_argument("fidelity_sweep: d and lambda grids must be non-empty");
  for (double l : lambda_list)
    if (!(l >= 0.0)) throw std::invalid_argument("fidelity_sweep: lambda must be nonnegative");

  SweepResult res;
  res.d_list = d_list;
  res.lambda_list = lambda_list;
  res.cells.resize(d_list.size() * lambda_list.size());

  std::vector<CodeLattice> lats;
  lats.reserve(d_list.size());
  for (int d : d_list) lats.push_back(build_lattice(d));

  auto run_cell = [&](size_t flat) {
    const size_t di = flat / lambda_list.size(), li = flat % lambda_list.size();
    EnvironmentSpec env = env_template;
    env.lambda = lambda_list[li];
    SliceProductOptions opts = base_opts;
    opts.seed = derive_seed(seed, flat);
    res.cells[flat] = fidelity_slice_product(lats[di], env, n_cycles, opts);
  };
  const size_t total = res.cells.size();
  if (threads <= 1) {
    for (size_t f = 0; f < total; ++f) run_cell(f);
  } else {
    std::vector<std::thread> pool;
    std::atomic<size_t> next{0};
    for (int t = 0; t < threads; ++t)
      pool.emplace_back([&]() {
        for (size_t f = next.fetch_add(1); f < total; f = next.fetch_add(1)) run_cell(f);
      });
    for (auto& th : pool) th.join();
  }

  // Monotone-trend diagnostic: within each d, fidelity must not increase with
  // lambda beyond 2 combined standard errors.
  std::vector<size_t> order(lambda_list.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](size_t a, size_t b) { return lambda_list[a] < lambda_list[b]; });
  for (size_t di = 0; di < d_list.size(); ++di)
    for (size_t k = 0; k + 1 < order.size(); ++k) {
      const auto& lo = res.cells[di * lambda_list.size() + order[k]];
      const auto& hi = res.cells[di * lambda_list.size() + order[k + 1]];
      const double slack = 2.0 * std::sqrt(lo.std_error * lo.std_error + hi.std_error * hi.std_error) + 1e-12;
      if (hi.value > lo.value + slack) ++res.monotone_violations;
    }
  res.monotone_ok = res.monotone_violations == 0;
  return res;
}

}  // namespace thlab
