// statmech.hpp — effective Hamiltonians for doubled spin histories, the
// superohmic spin-1 reduction, its transfer matrix, and the per-slice
// boundary-field Ising energy in mass-field variables.

#pragma once

#include <cmath>
#include <complex>
#include <random>
#include <stdexcept>
#include <vector>

#include "thlab/code.hpp"
#include "thlab/env.hpp"

namespace thlab {

// Doubled configuration (ket sigma, bra tau) over n_cycles time slices.
struct SpinHistory {
  int n_sites = 0;
  int n_cycles = 0;
  std::vector<Sign> sigma;  // [n * n_sites + r]
  std::vector<Sign> tau;

  static SpinHistory filled(int n_sites, int n_cycles, Sign value = 1) {
    SpinHistory h;
    h.n_sites = n_sites;
    h.n_cycles = n_cycles;
    h.sigma.assign(static_cast<size_t>(n_sites) * n_cycles, value);
    h.tau.assign(static_cast<size_t>(n_sites) * n_cycles, value);
    return h;
  }

  static SpinHistory random(int n_sites, int n_cycles, std::mt19937_64& rng) {
    SpinHistory h = filled(n_sites, n_cycles);
    auto coin = [&rng]() { return static_cast<Sign>((rng() & 1) ? 1 : -1); };
    for (auto& v : h.sigma) v = coin();
    for (auto& v : h.tau) v = coin();
    return h;
  }

  Sign s(int r, int n) const { return sigma[static_cast<size_t>(n) * n_sites + r]; }
  Sign t(int r, int n) const { return tau[static_cast<size_t>(n) * n_sites + r]; }
  Sign& s(int r, int n) { return sigma[static_cast<size_t>(n) * n_sites + r]; }
  Sign& t(int r, int n) { return tau[static_cast<size_t>(n) * n_sites + r]; }

  // Spin-1 variable S = (tau - sigma) / 2 in {-1, 0, +1}.
  int spin1(int r, int n) const { return (t(r, n) - s(r, n)) / 2; }

  SpinHistory exchanged() const {
    SpinHistory h = *this;
    std::swap(h.sigma, h.tau);
    return h;
  }
};

enum class HamiltonianForm { General, Spin1Chain, SingleSlice, IsingSlice };

// The general form reads a correlator table; the reduced forms carry the
// superohmic coupling J. SingleSlice is the time-decoupled normalization that
// matches the per-slice boundary-field Ising model, (J/2) * sum S^2; see
// README "Conventions" for how it relates to the Spin1Chain normalization.
struct EffectiveHamiltonian {
  HamiltonianForm form = HamiltonianForm::General;
  const CorrelatorTable* table = nullptr;
  const CodeLattice* lattice = nullptr;
  int n_cycles = 1;
  double J = 0.0;
};

inline EffectiveHamiltonian make_general_hamiltonian(const CorrelatorTable& table, const CodeLattice& lat,
                                                     int n_cycles) {
  if (n_cycles < 1) throw std::invalid_argument("EffectiveHamiltonian: n_cycles must be at least 1");
  return {HamiltonianForm::General, &table, &lat, n_cycles, 0.0};
}

// J = 2 lambda^2 v Lambda / (pi omega0^3); superohmic point s = 1/2, D = 2.
inline double coupling_J(const EnvironmentSpec& env) {
  env.validate();
  if (env.D != 2 || env.s != 0.5)
    throw std::invalid_argument("coupling_J: superohmic closed form requires D = 2 and s = 1/2");
  return 2.0 * env.lambda * env.lambda * env.v * env.Lambda /
         (kPi * env.omega0 * env.omega0 * env.omega0);
}

inline EffectiveHamiltonian make_reduced_hamiltonian(const CodeLattice& lat, double J, int n_cycles,
                                                     HamiltonianForm form) {
  if (form != HamiltonianForm::Spin1Chain && form != HamiltonianForm::SingleSlice)
    throw std::invalid_argument("make_reduced_hamiltonian: form must be Spin1Chain or SingleSlice");
  if (n_cycles < 1) throw std::invalid_argument("EffectiveHamiltonian: n_cycles must be at least 1");
  if (!std::isfinite(J)) throw std::invalid_argument("EffectiveHamiltonian: J must be finite");
  return {form, nullptr, &lat, n_cycles, J};
}

inline EffectiveHamiltonian make_reduced_hamiltonian(const CodeLattice& lat, const EnvironmentSpec& env,
                                                     int n_cycles, HamiltonianForm form) {
  return make_reduced_hamiltonian(lat, coupling_J(env), n_cycles, form);
}

namespace detail {

inline void check_history(const EffectiveHamiltonian& h, const SpinHistory& hist) {
  if (!h.lattice) throw std::invalid_argument("EffectiveHamiltonian: lattice not set");
  if (hist.n_sites != h.lattice->M || hist.n_cycles != h.n_cycles)
    throw std::invalid_argument("energy: history shape does not match Hamiltonian");
  for (auto v : hist.sigma)
    if (v != 1 && v != -1) throw std::invalid_argument("energy: sigma entries must be +1 or -1");
  for (auto v : hist.tau)
    if (v != 1 && v != -1) throw std::invalid_argument("energy: tau entries must be +1 or -1");
}

}  // namespace detail

// Raw doubled-history energy: equal-time F1/Phi1/Phi2 block plus the n > m
// cross-cycle block. Complex in general; the imaginary blocks are odd under
// sigma <-> tau so the exchange partner carries the conjugate value.
inline std::complex<double> energy_general_raw(const EffectiveHamiltonian& h, const SpinHistory& hist) {
  if (h.form != HamiltonianForm::General)
    throw std::invalid_argument("energy_general: Hamiltonian form is not General");
  if (!h.table) throw std::invalid_argument("energy_general: correlator table not set");
  detail::check_history(h, hist);

  const CodeLattice& lat = *h.lattice;
  const CorrelatorTable& tab = *h.table;
  const int M = lat.M, N = h.n_cycles;
  std::complex<double> acc = 0.0;

  for (int r = 0; r < M; ++r) {
    for (int sdx = 0; sdx < M; ++sdx) {
      const Displacement dr{lat.qubit_sites[r].x - lat.qubit_sites[sdx].x,
                            lat.qubit_sites[r].y - lat.qubit_sites[sdx].y};
      const double f1_0 = tab.value(CorrelatorKind::F1, dr, 0);
      const double phi1 = tab.value(CorrelatorKind::Phi1, dr, 0);
      const double phi2_0 = tab.value(CorrelatorKind::Phi2, dr, 0);
      for (int n = 0; n < N; ++n) {
        const double dtr = hist.t(r, n) - hist.s(r, n);
        const double dts = hist.t(sdx, n) - hist.s(sdx, n);
        acc += f1_0 * dtr * dts;
        acc += std::complex<double>(0.0, phi1) * dts * static_cast<double>(hist.t(r, n) + hist.s(r, n));
        acc += std::complex<double>(0.0, phi2_0) *
               (static_cast<double>(hist.t(sdx, n)) * hist.s(r, n) -
                static_cast<double>(hist.t(r, n)) * hist.s(sdx, n));
      }
      for (int n = 1; n < N; ++n) {
        const double dtr = hist.t(r, n) - hist.s(r, n);
        if (dtr == 0.0) continue;
        for (int m = 0; m < n; ++m) {
          const int sep = n - m;
          const double f1 = tab.value(CorrelatorKind::F1, dr, sep);
          const double f2 = tab.value(CorrelatorKind::F2, dr, sep);
          const double phi3 = tab.value(CorrelatorKind::Phi3, dr, sep);
          const double dts_m = hist.t(sdx, m) - hist.s(sdx, m);
          const double sts_m = hist.t(sdx, m) + hist.s(sdx, m);
          acc += -(f1 - phi3) * dtr * dts_m;
          acc += std::complex<double>(0.0, f2 + phi3) * dtr * sts_m;
        }
      }
    }
  }
  return acc;
}

struct GeneralEnergy {
  double value = 0.0;
  double imag_residue = 0.0;  // FP remainder of the pairwise cancellation
};

// Exchange-symmetrized energy: mean of the raw value and its sigma <-> tau
// partner. The imaginary parts cancel exactly in real arithmetic; what is left
// measures floating-point noise only.
inline GeneralEnergy energy_general_residual(const EffectiveHamiltonian& h, const SpinHistory& hist) {
  const std::complex<double> e = energy_general_raw(h, hist);
  const std::complex<double> ex = energy_general_raw(h, hist.exchanged());
  const std::complex<double> sym = 0.5 * (e + ex);
  return {sym.real(), std::abs(sym.imag())};
}

inline double energy_general(const EffectiveHamiltonian& h, const SpinHistory& hist) {
  return energy_general_residual(h, hist).value;
}

// Superohmic spin-1 chain: J * sum_{r,n} [S^2 + (1/2) S_n S_{n+1}] with an
// open time boundary (no exchange bond out of the last cycle).
inline double energy_superohmic(const EffectiveHamiltonian& h, const SpinHistory& hist) {
  if (h.form != HamiltonianForm::Spin1Chain)
    throw std::invalid_argument("energy_superohmic: Hamiltonian form is not Spin1Chain");
  detail::check_history(h, hist);
  const int M = hist.n_sites, N = hist.n_cycles;
  double onsite = 0.0, exchange = 0.0;
  for (int n = 0; n < N; ++n)
    for (int r = 0; r < M; ++r) {
      const int S = hist.spin1(r, n);
      onsite += S * S;
      if (n + 1 < N) exchange += S * hist.spin1(r, n + 1);
    }
  return h.J * (onsite + 0.5 * exchange);
}

// Time-decoupled slice normalization: (J/2) * sum S^2 = (J/4) * sum (1 - sigma tau).
inline double energy_single_slice(const EffectiveHamiltonian& h, const SpinHistory& hist) {
  if (h.form != HamiltonianForm::SingleSlice)
    throw std::invalid_argument("energy_single_slice: Hamiltonian form is not SingleSlice");
  detail::check_history(h, hist);
  double onsite = 0.0;
  for (int n = 0; n < hist.n_cycles; ++n)
    for (int r = 0; r < hist.n_sites; ++r) {
      const int S = hist.spin1(r, n);
      onsite += S * S;
    }
  return 0.5 * h.J * onsite;
}

inline double energy(const EffectiveHamiltonian& h, const SpinHistory& hist) {
  switch (h.form) {
    case HamiltonianForm::General: return energy_general(h, hist);
    case HamiltonianForm::Spin1Chain: return energy_superohmic(h, hist);
    case HamiltonianForm::SingleSlice: return energy_single_slice(h, hist);
    case HamiltonianForm::IsingSlice:
      throw std::invalid_argument("energy: IsingSlice acts on mass fields, not spin histories");
  }
  throw std::invalid_argument("energy: unknown form");
}

struct TransferSpectrum {
  double leading = 0.0;    // largest eigenvalue
  double gap_ratio = 0.0;  // |second largest| / largest
};

// 3x3 transfer matrix of the spin-1 chain with symmetrized on-site weights,
// T(S,S') = exp[-J (S^2 + S'^2) / 2 - (J/2) S S']. The S -> -S symmetry splits
// the spectrum into a 2x2 symmetric block and one antisymmetric eigenvalue, so
// the characteristic polynomial factors by hand.
inline TransferSpectrum transfer_matrix_gap(double J) {
  if (!std::isfinite(J)) throw std::invalid_argument("transfer_matrix_gap: J must be finite");
  const double u = std::exp(-J / 2.0);        // T(0, +-1)
  const double w = std::exp(-1.5 * J);        // T(+1, +1) = T(-1, -1)
  const double anti = w - u;                  // T(-1,-1) - T(-1,+1), antisymmetric sector
  const double tr = 1.0 + w + u;              // symmetric 2x2 block: [[1, sqrt(2) u], [sqrt(2) u, w + u]]
  const double det = (w + u) - 2.0 * u * u;
  const double disc = std::sqrt(std::max(0.0, tr * tr - 4.0 * det));
  const double lead = 0.5 * (tr + disc);
  const double sub = 0.5 * (tr - disc);
  const double second = std::max(std::abs(sub), std::abs(anti));
  return {lead, second / lead};
}

// Critical coupling of the square-lattice Ising slice model in the bond
// convention J/4: J_c = 2 ln(1 + sqrt 2), i.e. sinh(2 * J_c/4) = 1.
inline double onsager_critical_coupling() { return 2.0 * std::log(1.0 + std::sqrt(2.0)); }

// Boundary-field Ising energy of one slice in dual (mass-field) variables,
// with independent bottom/top field signs:
//   E = -(J/4) [ sum_<p,p'> s_p s_p' + eta_b * sum_bottom s_p + eta_t * sum_top s_p ].
// Bottom and top sums run over attached boundary qubits, so at d = 2 (where
// both rough boundaries touch the same dual row) each site is counted twice.
inline double ising_slice_energy_split(const CodeLattice& lat, const std::vector<Sign>& s_field, int eta_bottom,
                                       int eta_top, double J) {
  if (s_field.size() != lat.plaquette_sites.size())
    throw std::invalid_argument("ising_slice_energy: field size does not match dual-site count");
  if ((eta_bottom != 1 && eta_bottom != -1) || (eta_top != 1 && eta_top != -1))
    throw std::invalid_argument("ising_slice_energy: eta must be +1 or -1");
  for (auto v : s_field)
    if (v != 1 && v != -1) throw std::invalid_argument("ising_slice_energy: field entries must be +1 or -1");
  double bonds = 0.0;
  for (const auto& [a, b] : lat.dual_bonds) bonds += s_field[a] * s_field[b];
  double field = 0.0;
  for (int p : lat.bottom_sites) field += eta_bottom * s_field[p];
  for (int p : lat.top_sites) field += eta_top * s_field[p];
  return -0.25 * J * (bonds + field);
}

inline double ising_slice_energy(const CodeLattice& lat, const std::vector<Sign>& s_field, int eta, double J) {
  return ising_slice_energy_split(lat, s_field, eta, eta, J);
}

}  // namespace thlab
