// ising_mc.hpp — Metropolis Monte Carlo for the bulk square-lattice Ising
// model at bond coupling J/4, Binder cumulants, and the two-size crossing
// estimate of the critical coupling.

#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <ostream>
#include <random>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "thlab/util.hpp"

namespace thlab {

struct IsingMCOptions {
  long n_sweeps = 200000;          // total per point, burn-in included
  double burn_in_fraction = 0.2;
  int n_blocks = 100;              // block granularity for bootstrap errors
  int n_bootstrap = 100;
  bool use_wolff = false;          // optional cluster step after each sweep
  int threads = 1;                 // chains at different (size, J) in parallel
  std::ostream* trace = nullptr;   // per-sweep rows: sweep,m,m2,m4
};

struct BinderPoint {
  int size = 0;
  double J = 0.0;
  uint64_t seed = 0;
  double binder = 0.0;
  double binder_err = 0.0;
  double m_abs = 0.0;
  bool drift_flag = false;  // first/second-half <|m|> disagreement
  std::vector<double> block_m2;
  std::vector<double> block_m4;
  std::vector<double> block_mabs;
};

namespace detail {

inline double unit_double(std::mt19937_64& rng) { return (rng() >> 11) * 0x1.0p-53; }

class IsingChain {
 public:
  IsingChain(int size, double J, uint64_t seed) : L_(size), n_(size * size), J_(J), rng_(seed) {
    spins_.assign(n_, 1);
    sum_ = n_;
    nbr_.resize(static_cast<size_t>(n_) * 4);
    for (int y = 0; y < L_; ++y)
      for (int x = 0; x < L_; ++x) {
        const int i = y * L_ + x;
        nbr_[4 * i + 0] = y * L_ + (x + 1 == L_ ? 0 : x + 1);
        nbr_[4 * i + 1] = y * L_ + (x == 0 ? L_ - 1 : x - 1);
        nbr_[4 * i + 2] = (y + 1 == L_ ? 0 : y + 1) * L_ + x;
        nbr_[4 * i + 3] = (y == 0 ? L_ - 1 : y - 1) * L_ + x;
      }
    // Flip of s with neighbor sum h costs dE = 2*(J/4)*s*h; index by (s*h+4)/2.
    for (int k = 0; k < 5; ++k) {
      const int sh = 2 * k - 4;
      acc_[k] = std::min(1.0, std::exp(-0.5 * J_ * sh));
    }
  }

  void metropolis_sweep() {
    for (int i = 0; i < n_; ++i) {
      const int s = spins_[i];
      const int h = spins_[nbr_[4 * i]] + spins_[nbr_[4 * i + 1]] + spins_[nbr_[4 * i + 2]] +
                    spins_[nbr_[4 * i + 3]];
      const int k = (s * h + 4) / 2;
      if (acc_[k] >= 1.0 || unit_double(rng_) < acc_[k]) {
        spins_[i] = -s;
        sum_ -= 2 * s;
      }
    }
  }

  void wolff_step() {
    const double p_add = 1.0 - std::exp(-0.5 * J_);
    stack_.clear();
    const int start = static_cast<int>(rng_() % n_);
    const int cluster_spin = spins_[start];
    spins_[start] = -cluster_spin;
    sum_ -= 2 * cluster_spin;
    stack_.push_back(start);
    while (!stack_.empty()) {
      const int i = stack_.back();
      stack_.pop_back();
      for (int k = 0; k < 4; ++k) {
        const int j = nbr_[4 * i + k];
        if (spins_[j] == cluster_spin && unit_double(rng_) < p_add) {
          spins_[j] = -cluster_spin;
          sum_ -= 2 * cluster_spin;
          stack_.push_back(j);
        }
      }
    }
  }

  double magnetization() const { return static_cast<double>(sum_) / n_; }

 private:
  int L_, n_;
  double J_;
  std::mt19937_64 rng_;
  std::vector<int8_t> spins_;
  std::vector<int> nbr_;
  std::vector<int> stack_;
  long sum_ = 0;
  double acc_[5] = {};
};

inline double binder_from(double m2, double m4) { return 1.0 - m4 / (3.0 * m2 * m2); }

inline double mean_of(const std::vector<double>& v, size_t lo, size_t hi) {
  double s = 0.0;
  for (size_t i = lo; i < hi; ++i) s += v[i];
  return s / static_cast<double>(hi - lo);
}

inline double stddev_of(const std::vector<double>& v, size_t lo, size_t hi) {
  const double mu = mean_of(v, lo, hi);
  double s2 = 0.0;
  for (size_t i = lo; i < hi; ++i) s2 += (v[i] - mu) * (v[i] - mu);
  return std::sqrt(s2 / (static_cast<double>(hi - lo) - 1.0));
}

inline double stderr_of(const std::vector<double>& v, size_t lo, size_t hi) {
  return stddev_of(v, lo, hi) / std::sqrt(static_cast<double>(hi - lo));
}

}  // namespace detail

inline BinderPoint mc_binder_point(int size, double J, uint64_t seed, const IsingMCOptions& opts = {}) {
  if (size < 2) throw std::invalid_argument("mc_binder_point: size must be at least 2");
  if (opts.n_sweeps < 100) throw std::invalid_argument("mc_binder_point: need at least 100 sweeps");
  if (opts.burn_in_fraction < 0.0 || opts.burn_in_fraction >= 1.0)
    throw std::invalid_argument("mc_binder_point: burn_in_fraction must be in [0, 1)");

  detail::IsingChain chain(size, J, seed);
  const long burn = static_cast<long>(opts.n_sweeps * opts.burn_in_fraction);
  const long kept = opts.n_sweeps - burn;
  const int n_blocks = static_cast<int>(std::min<long>(opts.n_blocks, kept));
  const long block_len = kept / n_blocks;

  BinderPoint pt;
  pt.size = size;
  pt.J = J;
  pt.seed = seed;
  pt.block_m2.assign(n_blocks, 0.0);
  pt.block_m4.assign(n_blocks, 0.0);
  pt.block_mabs.assign(n_blocks, 0.0);

  for (long sweep = 0; sweep < opts.n_sweeps; ++sweep) {
    chain.metropolis_sweep();
    if (opts.use_wolff) chain.wolff_step();
    const double m = chain.magnetization();
    const double m2 = m * m;
    if (opts.trace)
      *opts.trace << sweep << ',' << format_double(m) << ',' << format_double(m2) << ','
                  << format_double(m2 * m2) << '\n';
    const long k = sweep - burn;
    if (k < 0) continue;
    const long b = k / block_len;
    if (b >= n_blocks) continue;  // remainder sweeps beyond the last full block
    pt.block_m2[b] += m2 / block_len;
    pt.block_m4[b] += m2 * m2 / block_len;
    pt.block_mabs[b] += std::abs(m) / block_len;
  }

  const double m2 = detail::mean_of(pt.block_m2, 0, pt.block_m2.size());
  const double m4 = detail::mean_of(pt.block_m4, 0, pt.block_m4.size());
  pt.binder = detail::binder_from(m2, m4);
  pt.m_abs = detail::mean_of(pt.block_mabs, 0, pt.block_mabs.size());

  std::mt19937_64 boot(derive_seed(seed, 0x626f6f74));
  std::vector<double> resampled(opts.n_bootstrap);
  for (int b = 0; b < opts.n_bootstrap; ++b) {
    double r2 = 0.0, r4 = 0.0;
    for (int k = 0; k < n_blocks; ++k) {
      const size_t j = boot() % n_blocks;
      r2 += pt.block_m2[j];
      r4 += pt.block_m4[j];
    }
    resampled[b] = detail::binder_from(r2 / n_blocks, r4 / n_blocks);
  }
  pt.binder_err = detail::stddev_of(resampled, 0, resampled.size());

  const size_t half = pt.block_mabs.size() / 2;
  if (half >= 2) {
    const double m1 = detail::mean_of(pt.block_mabs, 0, half);
    const double m2h = detail::mean_of(pt.block_mabs, half, pt.block_mabs.size());
    const double se1 = detail::stderr_of(pt.block_mabs, 0, half);
    const double se2 = detail::stderr_of(pt.block_mabs, half, pt.block_mabs.size());
    pt.drift_flag = std::abs(m1 - m2h) > 5.0 * std::sqrt(se1 * se1 + se2 * se2) + 1e-12;
  }
  return pt;
}

struct CriticalEstimate {
  double j_c = 0.0;
  double std_error = 0.0;
  int bracket_lo = -1;  // grid index of the sign change
  bool any_drift = false;
  std::vector<int> sizes;
  std::vector<double> grid;
  std::vector<BinderPoint> points;  // sizes-major, grid-minor

  const BinderPoint& at(size_t size_idx, size_t grid_idx) const {
    return points[size_idx * grid.size() + grid_idx];
  }
};

// Binder-crossing estimate of the bulk critical coupling. The crossing is
// taken between the smallest and largest sizes; the uncertainty comes from a
// block bootstrap re-done through the same interpolation.
inline CriticalEstimate mc_locate_critical(std::vector<int> sizes, std::vector<double> j_grid, long sweeps,
                                           uint64_t seed, IsingMCOptions opts = {}) {
  std::sort(sizes.begin(), sizes.end());
  sizes.erase(std::unique(sizes.begin(), sizes.end()), sizes.end());
  std::sort(j_grid.begin(), j_grid.end());
  j_grid.erase(std::unique(j_grid.begin(), j_grid.end()), j_grid.end());
  if (sizes.size() < 2) throw std::invalid_argument("mc_locate_critical: need at least two lattice sizes");
  if (j_grid.size() < 2) throw std::invalid_argument("mc_locate_critical: need at least two J grid points");
  opts.n_sweeps = sweeps;
  if (opts.trace && (sizes.size() * j_grid.size() > 1))
    throw std::invalid_argument("mc_locate_critical: trace output supports a single (size, J) point");

  CriticalEstimate est;
  est.sizes = sizes;
  est.grid = j_grid;
  est.points.resize(sizes.size() * j_grid.size());

  auto run_point = [&](size_t flat) {
    const size_t si = flat / j_grid.size(), ji = flat % j_grid.size();
    est.points[flat] = mc_binder_point(sizes[si], j_grid[ji], derive_seed(seed, flat), opts);
  };
  const size_t total = est.points.size();
  const int threads = std::max(1, opts.threads);
  if (threads == 1) {
    for (size_t f = 0; f < total; ++f) run_point(f);
  } else {
    std::vector<std::thread> pool;
    std::atomic<size_t> next{0};
    for (int t = 0; t < threads; ++t)
      pool.emplace_back([&]() {
        for (size_t f = next.fetch_add(1); f < total; f = next.fetch_add(1)) run_point(f);
      });
    for (auto& th : pool) th.join();
  }

  for (const auto& p : est.points) est.any_drift = est.any_drift || p.drift_flag;

  // Delta(J) = U_largest - U_smallest: negative in the disordered phase,
  // positive in the ordered phase.
  const size_t lo_size = 0, hi_size = sizes.size() - 1;
  std::vector<double> delta(j_grid.size());
  for (size_t j = 0; j < j_grid.size(); ++j)
    delta[j] = est.at(hi_size, j).binder - est.at(lo_size, j).binder;

  int bracket = -1;
  for (size_t j = 0; j + 1 < j_grid.size(); ++j)
    if (delta[j] < 0.0 && delta[j + 1] >= 0.0) {
      bracket = static_cast<int>(j);
      break;
    }
  if (bracket < 0)
    throw std::runtime_error("mc_locate_critical: J grid does not bracket a Binder crossing (delta endpoints " +
                             format_double(delta.front()) + ", " + format_double(delta.back()) + ")");
  est.bracket_lo = bracket;

  auto interpolate = [&](double da, double db) {
    const double x = da / (da - db);
    return j_grid[bracket] + x * (j_grid[bracket + 1] - j_grid[bracket]);
  };
  est.j_c = interpolate(delta[bracket], delta[bracket + 1]);

  // Bootstrap the four points feeding the interpolation.
  const BinderPoint* quad[4] = {&est.at(lo_size, bracket), &est.at(lo_size, bracket + 1),
                                &est.at(hi_size, bracket), &est.at(hi_size, bracket + 1)};
  std::mt19937_64 boot(derive_seed(seed, 0x63726f7373));
  std::vector<double> crossings;
  crossings.reserve(opts.n_bootstrap);
  for (int b = 0; b < opts.n_bootstrap; ++b) {
    double u[4];
    for (int q = 0; q < 4; ++q) {
      const auto& blocks2 = quad[q]->block_m2;
      const auto& blocks4 = quad[q]->block_m4;
      const size_t nb = blocks2.size();
      double r2 = 0.0, r4 = 0.0;
      for (size_t k = 0; k < nb; ++k) {
        const size_t idx = boot() % nb;
        r2 += blocks2[idx];
        r4 += blocks4[idx];
      }
      u[q] = detail::binder_from(r2 / nb, r4 / nb);
    }
    const double da = u[2] - u[0], db = u[3] - u[1];
    if (da == db) continue;
    crossings.push_back(interpolate(da, db));
  }
  if (crossings.size() >= 2) est.std_error = detail::stddev_of(crossings, 0, crossings.size());
  return est;
}

}  // namespace thlab
