// env.hpp — bath spectral density and the five space-time correlators.
//
// Conventions: hbar = 1, linear dispersion omega = v|k|, quadratic bath
// coupling, sharp momentum cutoff |k| <= Lambda. Discrete mode sums the
// L^D box grid k = (2pi/L) * n (n integer, k != 0); continuum mode is the
// D = 2 isotropic limit (2pi)^2/L^2 * sum_k -> int rho drho dtheta.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <iomanip>
#include <map>
#include <ostream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "thlab/quadrature.hpp"

namespace thlab {

struct EnvironmentSpec {
  double lambda = 1.0;  // qubit-bath coupling strength
  double v = 1.0;       // bath excitation velocity
  double omega0 = 1.0;  // characteristic bath frequency
  double Lambda = 1.0;  // ultraviolet momentum cutoff
  double s = 0.5;       // spectral exponent (s = 1/2: superohmic J ~ w^2 in D = 2)
  int D = 2;            // bath spatial dimension
  double Delta = 1.0;   // QEC cycle duration
  double L = 100.0;     // linear box size for discrete sums
  double q0 = 1.0;      // coordinate-coupling length scale

  void validate() const {
    auto positive = [](double x, const char* name) {
      if (!(x > 0.0) || !std::isfinite(x))
        throw std::invalid_argument(std::string("EnvironmentSpec: ") + name + " must be positive and finite");
    };
    positive(v, "v");
    positive(omega0, "omega0");
    positive(Lambda, "Lambda");
    positive(Delta, "Delta");
    positive(L, "L");
    positive(q0, "q0");
    if (!std::isfinite(lambda) || lambda < 0.0)
      throw std::invalid_argument("EnvironmentSpec: lambda must be finite and nonnegative");
    if (!std::isfinite(s)) throw std::invalid_argument("EnvironmentSpec: s must be finite");
    if (D < 1 || D > 3) throw std::invalid_argument("EnvironmentSpec: D must be 1, 2 or 3");
  }
};

// J(omega) = 2 lambda^2 / (q0^2 omega0^(2+2s)) * omega^(2s+1), D = 2 only.
inline double spectral_density(const EnvironmentSpec& env, double omega) {
  env.validate();
  if (env.D != 2) throw std::invalid_argument("spectral_density: closed form requires D = 2");
  if (omega < 0.0) throw std::invalid_argument("spectral_density: omega must be nonnegative");
  if (omega == 0.0 && env.s > -0.5) return 0.0;
  const double pref = 2.0 * env.lambda * env.lambda / (env.q0 * env.q0 * std::pow(env.omega0, 2.0 + 2.0 * env.s));
  return pref * std::pow(omega, 2.0 * env.s + 1.0);
}

enum class CorrelatorKind { F1, F2, Phi1, Phi2, Phi3 };
enum class CorrelatorMode { Discrete, Continuum };

inline const char* to_string(CorrelatorKind k) {
  switch (k) {
    case CorrelatorKind::F1: return "F1";
    case CorrelatorKind::F2: return "F2";
    case CorrelatorKind::Phi1: return "Phi1";
    case CorrelatorKind::Phi2: return "Phi2";
    case CorrelatorKind::Phi3: return "Phi3";
  }
  return "?";
}

inline const char* to_string(CorrelatorMode m) {
  return m == CorrelatorMode::Discrete ? "discrete" : "continuum";
}

// Lattice displacement in grid units (the code lattice constant is one grid step).
struct Displacement {
  int x = 0;
  int y = 0;
  friend auto operator<=>(const Displacement&, const Displacement&) = default;
};

namespace detail {

// (1 - cos(w Delta)) / w^2, the closed-contour part of the influence kernel.
inline double pulse_kernel(double w, double Delta) {
  if (w == 0.0) return 0.5 * Delta * Delta;
  const double h = std::sin(0.5 * w * Delta);
  return 2.0 * h * h / (w * w);
}

// (w Delta - sin(w Delta)) / w^2, the drift part (no cycle index).
inline double drift_kernel(double w, double Delta) {
  const double x = w * Delta;
  if (std::abs(x) < 0.02) {
    const double x2 = x * x;
    return Delta * Delta * (x / 6.0) * (1.0 - x2 / 20.0 * (1.0 - x2 / 42.0));
  }
  return Delta * Delta * (x - std::sin(x)) / (x * x);
}

struct KindTraits {
  bool drift;     // drift_kernel instead of pulse_kernel
  bool sine_ang;  // sin(k.r) angular factor instead of cos(k.r)
  int cyc;        // 0: none, 1: cos(n w Delta), 2: sin(n w Delta)
};

inline KindTraits traits(CorrelatorKind k) {
  switch (k) {
    case CorrelatorKind::F1: return {false, false, 1};
    case CorrelatorKind::F2: return {false, false, 2};
    case CorrelatorKind::Phi1: return {true, false, 0};
    case CorrelatorKind::Phi2: return {false, true, 1};
    case CorrelatorKind::Phi3: return {false, true, 2};
  }
  throw std::invalid_argument("correlator: unknown kind");
}

}  // namespace detail

// Single correlator entry. The lambda^2 prefactor multiplies a reduced sum or
// integral last, so rescaling lambda rescales entries exactly.
inline double correlator_value(const EnvironmentSpec& env, CorrelatorKind kind, Displacement r, int n,
                               CorrelatorMode mode, const QuadratureOptions& opts = {}) {
  env.validate();
  if (n < 0) throw std::invalid_argument("correlator: cycle separation n must be nonnegative");
  const auto t = detail::traits(kind);
  if (t.cyc == 2 && n == 0) return 0.0;  // sin(0)

  const double rx = r.x, ry = r.y;
  const double rnorm = std::hypot(rx, ry);

  if (mode == CorrelatorMode::Continuum) {
    if (env.D != 2) throw std::invalid_argument("correlator: continuum mode requires D = 2");
    if (t.sine_ang) return 0.0;  // odd angular integral vanishes identically
    const double v = env.v, Delta = env.Delta, s = env.s;
    auto integrand = [&](double rho) {
      const double w = v * rho;
      const double radial = t.drift ? detail::drift_kernel(w, Delta) : detail::pulse_kernel(w, Delta);
      double cyc = 1.0;
      if (t.cyc == 1) cyc = std::cos(n * w * Delta);
      else if (t.cyc == 2) cyc = std::sin(n * w * Delta);
      return std::pow(rho, 2.0 * s + 1.0) * radial * cyc * angular_cos_mean(rho * rnorm);
    };
    const double rate = v * Delta * (1.0 + n) + rnorm;
    const int panels = std::clamp(static_cast<int>(std::ceil(env.Lambda * rate / kPi)) + 1, 1, 8192);
    const double reduced = integrate_adaptive(integrand, 0.0, env.Lambda, opts, panels);
    const double pref = env.lambda * env.lambda * std::pow(v / env.omega0, 2.0 + 2.0 * s) / (2.0 * kPi);
    return pref * reduced;
  }

  // Discrete box sum over k = (2pi/L) * n, 0 < |k| <= Lambda.
  const double step = 2.0 * kPi / env.L;
  const long nmax = static_cast<long>(std::floor(env.Lambda / step));
  const long span = 2 * nmax + 1;
  double count = 1.0;
  for (int d = 0; d < env.D; ++d) count *= static_cast<double>(span);
  if (count > 5e7) throw std::runtime_error("correlator: discrete k-grid exceeds 5e7 points; reduce L*Lambda");

  const double v = env.v, Delta = env.Delta, s = env.s;
  const double lim2 = env.Lambda * env.Lambda;
  double sum = 0.0;
  const long zmax = (env.D == 3) ? nmax : 0;
  const long ymax = (env.D >= 2) ? nmax : 0;
  for (long iz = -zmax; iz <= zmax; ++iz) {
    for (long iy = -ymax; iy <= ymax; ++iy) {
      for (long ix = -nmax; ix <= nmax; ++ix) {
        if (ix == 0 && iy == 0 && iz == 0) continue;
        const double kx = step * ix, ky = step * iy, kz = step * iz;
        const double k2 = kx * kx + ky * ky + kz * kz;
        if (k2 > lim2) continue;
        const double kn = std::sqrt(k2);
        const double w = v * kn;
        const double radial = t.drift ? detail::drift_kernel(w, Delta) : detail::pulse_kernel(w, Delta);
        double cyc = 1.0;
        if (t.cyc == 1) cyc = std::cos(n * w * Delta);
        else if (t.cyc == 2) cyc = std::sin(n * w * Delta);
        const double phase = kx * rx + ky * ry;  // lattice sites have no z extent
        const double ang = t.sine_ang ? std::sin(phase) : std::cos(phase);
        sum += std::pow(kn, 2.0 * s) * radial * cyc * ang;
      }
    }
  }
  const double pref =
      env.lambda * env.lambda * std::pow(v / env.omega0, env.D + 2.0 * s) / std::pow(env.L, env.D);
  return pref * sum;
}

enum class DivergenceTerm { F1_00, F1_01 };

// Leading UV-divergent parts of the equal-site correlators, s = 1/2 and D = 2:
// F1(0,0) -> lambda^2 v Lambda / (2 pi omega0^3), F1(0,1) -> -(1/2) of that.
inline double leading_divergence(const EnvironmentSpec& env, DivergenceTerm term) {
  env.validate();
  if (env.D != 2 || env.s != 0.5)
    throw std::invalid_argument("leading_divergence: closed form requires D = 2 and s = 1/2");
  const double base = env.lambda * env.lambda * env.v * env.Lambda /
                      (2.0 * kPi * env.omega0 * env.omega0 * env.omega0);
  switch (term) {
    case DivergenceTerm::F1_00: return base;
    case DivergenceTerm::F1_01: return -0.5 * base;
  }
  throw std::invalid_argument("leading_divergence: unknown term");
}

// Memoized correlator values over a displacement set and cycle separations
// 0..max_cycle_sep. Phi1 carries no cycle index and is stored once per
// displacement. Read-only after build; build may run data-parallel.
class CorrelatorTable {
 public:
  CorrelatorTable() = default;

  static CorrelatorTable build(const EnvironmentSpec& env, std::vector<Displacement> displacements,
                               int max_cycle_sep, CorrelatorMode mode, const QuadratureOptions& opts = {},
                               unsigned threads = 1) {
    env.validate();
    if (max_cycle_sep < 0) throw std::invalid_argument("CorrelatorTable: max_cycle_sep must be nonnegative");
    std::sort(displacements.begin(), displacements.end());
    displacements.erase(std::unique(displacements.begin(), displacements.end()), displacements.end());

    CorrelatorTable tab;
    tab.env_ = env;
    tab.mode_ = mode;
    tab.max_sep_ = max_cycle_sep;
    tab.displacements_ = std::move(displacements);

    struct Job {
      CorrelatorKind kind;
      Displacement r;
      int n;
    };
    std::vector<Job> jobs;
    constexpr CorrelatorKind kinds[] = {CorrelatorKind::F1, CorrelatorKind::F2, CorrelatorKind::Phi1,
                                        CorrelatorKind::Phi2, CorrelatorKind::Phi3};
    for (auto kind : kinds)
      for (const auto& r : tab.displacements_)
        for (int n = 0; n <= (kind == CorrelatorKind::Phi1 ? 0 : max_cycle_sep); ++n)
          jobs.push_back({kind, r, n});

    std::vector<double> results(jobs.size());
    auto worker = [&](size_t begin, size_t end) {
      for (size_t i = begin; i < end; ++i)
        results[i] = correlator_value(env, jobs[i].kind, jobs[i].r, jobs[i].n, mode, opts);
    };
    if (threads <= 1 || jobs.size() < 2) {
      worker(0, jobs.size());
    } else {
      const unsigned nt = std::min<unsigned>(threads, static_cast<unsigned>(jobs.size()));
      std::vector<std::thread> pool;
      const size_t chunk = (jobs.size() + nt - 1) / nt;
      for (unsigned t = 0; t < nt; ++t) {
        const size_t b = t * chunk, e = std::min(jobs.size(), b + chunk);
        if (b < e) pool.emplace_back(worker, b, e);
      }
      for (auto& th : pool) th.join();
    }
    for (size_t i = 0; i < jobs.size(); ++i)
      tab.values_[Key{static_cast<int>(jobs[i].kind), jobs[i].r.x, jobs[i].r.y, jobs[i].n}] = results[i];
    return tab;
  }

  // Table holding only the leading UV divergences: F1(0,0) and F1(0,1) at
  // their closed-form values, every other entry zero. This is the superohmic
  // reduction's input (s = 1/2, D = 2).
  static CorrelatorTable leading_order(const EnvironmentSpec& env, std::vector<Displacement> displacements,
                                       int max_cycle_sep) {
    env.validate();
    if (max_cycle_sep < 0) throw std::invalid_argument("CorrelatorTable: max_cycle_sep must be nonnegative");
    std::sort(displacements.begin(), displacements.end());
    displacements.erase(std::unique(displacements.begin(), displacements.end()), displacements.end());

    CorrelatorTable tab;
    tab.env_ = env;
    tab.mode_ = CorrelatorMode::Continuum;
    tab.max_sep_ = max_cycle_sep;
    tab.displacements_ = std::move(displacements);
    constexpr CorrelatorKind kinds[] = {CorrelatorKind::F1, CorrelatorKind::F2, CorrelatorKind::Phi1,
                                        CorrelatorKind::Phi2, CorrelatorKind::Phi3};
    for (auto kind : kinds)
      for (const auto& r : tab.displacements_)
        for (int n = 0; n <= (kind == CorrelatorKind::Phi1 ? 0 : max_cycle_sep); ++n)
          tab.values_[Key{static_cast<int>(kind), r.x, r.y, n}] = 0.0;
    tab.values_[Key{static_cast<int>(CorrelatorKind::F1), 0, 0, 0}] = leading_divergence(env, DivergenceTerm::F1_00);
    if (max_cycle_sep >= 1)
      tab.values_[Key{static_cast<int>(CorrelatorKind::F1), 0, 0, 1}] =
          leading_divergence(env, DivergenceTerm::F1_01);
    return tab;
  }

  double value(CorrelatorKind kind, Displacement r, int n) const {
    if (n < 0) throw std::invalid_argument("CorrelatorTable: cycle separation must be nonnegative");
    const int nn = (kind == CorrelatorKind::Phi1) ? 0 : n;
    const auto it = values_.find(Key{static_cast<int>(kind), r.x, r.y, nn});
    if (it == values_.end())
      throw std::out_of_range(std::string("CorrelatorTable: missing entry kind=") + to_string(kind) + " r=(" +
                              std::to_string(r.x) + "," + std::to_string(r.y) + ") n=" + std::to_string(nn));
    return it->second;
  }

  CorrelatorMode mode() const { return mode_; }
  int max_cycle_sep() const { return max_sep_; }
  const std::vector<Displacement>& displacements() const { return displacements_; }
  const EnvironmentSpec& env() const { return env_; }
  size_t size() const { return values_.size(); }

  void write_csv(std::ostream& os) const {
    os << "kind,rx,ry,n,value,mode\n";
    os << std::setprecision(17);
    for (const auto& [key, val] : values_) {
      os << to_string(static_cast<CorrelatorKind>(key.kind)) << ',' << key.x << ',' << key.y << ',' << key.n
         << ',' << val << ',' << to_string(mode_) << '\n';
    }
  }

 private:
  struct Key {
    int kind, x, y, n;
    friend auto operator<=>(const Key&, const Key&) = default;
  };

  EnvironmentSpec env_;
  CorrelatorMode mode_ = CorrelatorMode::Continuum;
  int max_sep_ = 0;
  std::vector<Displacement> displacements_;
  std::map<Key, double> values_;
};

}  // namespace thlab
