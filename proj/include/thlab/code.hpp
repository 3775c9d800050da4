// code.hpp — planar surface-code geometry, star constraints, mass fields.
//
// Layout on a (2d-1) x (2d-1) cell grid: data qubits at x+y even, stars
// (X-type checks) at odd x / even y, plaquettes (Z-type checks) at even x /
// odd y. Rough boundaries run along the top and bottom rows, so the stars
// there have three qubits. The logical X string crosses top to bottom along
// the x = 0 column; the logical Z string runs left to right along y = 0.

#pragma once

#include <algorithm>
#include <cstdint>
#include <ostream>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "thlab/env.hpp"  // Displacement

namespace thlab {

struct CapacityError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

using Sign = int8_t;  // +1 / -1

struct GridPoint {
  int x = 0;
  int y = 0;
  friend auto operator<=>(const GridPoint&, const GridPoint&) = default;
};

enum class QubitRole { Bulk, Bottom, Top };

struct CodeLattice {
  int distance = 0;
  int M = 0;  // qubit count, d^2 + (d-1)^2

  std::vector<GridPoint> qubit_sites;
  std::vector<GridPoint> star_sites;
  std::vector<GridPoint> plaquette_sites;  // double as the dual Ising sites
  std::vector<std::vector<int>> stars;      // qubit indices per star
  std::vector<std::vector<int>> plaquettes; // qubit indices per plaquette
  std::vector<int> logical_x_path;          // qubit indices, top-to-bottom string
  std::vector<int> logical_z_path;          // qubit indices, left-to-right string

  // Dual-lattice bookkeeping for the mass-field construction. Bulk qubits sit
  // between two plaquettes; boundary qubits touch one and carry the slice
  // boundary variable of their side.
  struct DualLink {
    QubitRole role = QubitRole::Bulk;
    int a = -1;  // plaquette index (bulk: first of the pair, boundary: the only one)
    int b = -1;  // bulk only
  };
  std::vector<DualLink> dual_links;              // per qubit
  std::vector<std::pair<int, int>> dual_bonds;   // one per bulk qubit
  std::vector<int> boundary_mult;                // per dual site: attached boundary qubits
  std::vector<int> bottom_sites, top_sites;      // dual sites carrying a bottom / top field

  int qubit_at(int x, int y) const {
    const int w = 2 * distance - 1;
    if (x < 0 || y < 0 || x >= w || y >= w) return -1;
    return qubit_index_[static_cast<size_t>(y) * w + x];
  }

  std::vector<int> qubit_index_;  // grid cell -> qubit index or -1
};

inline CodeLattice build_lattice(int d) {
  if (d < 2) throw std::invalid_argument("build_lattice: distance must be at least 2");
  const int w = 2 * d - 1;
  CodeLattice lat;
  lat.distance = d;
  lat.qubit_index_.assign(static_cast<size_t>(w) * w, -1);

  for (int y = 0; y < w; ++y)
    for (int x = 0; x < w; ++x)
      if ((x + y) % 2 == 0) {
        lat.qubit_index_[static_cast<size_t>(y) * w + x] = static_cast<int>(lat.qubit_sites.size());
        lat.qubit_sites.push_back({x, y});
      }
  lat.M = static_cast<int>(lat.qubit_sites.size());

  auto neighbors = [&](int x, int y) {
    std::vector<int> q;
    for (auto [dx, dy] : {std::pair{-1, 0}, {1, 0}, {0, -1}, {0, 1}}) {
      const int idx = lat.qubit_at(x + dx, y + dy);
      if (idx >= 0) q.push_back(idx);
    }
    return q;
  };

  for (int y = 0; y < w; y += 2)
    for (int x = 1; x < w; x += 2) {
      lat.star_sites.push_back({x, y});
      lat.stars.push_back(neighbors(x, y));
    }
  for (int y = 1; y < w; y += 2)
    for (int x = 0; x < w; x += 2) {
      lat.plaquette_sites.push_back({x, y});
      lat.plaquettes.push_back(neighbors(x, y));
    }

  for (int y = 0; y < w; y += 2) lat.logical_x_path.push_back(lat.qubit_at(0, y));
  for (int x = 0; x < w; x += 2) lat.logical_z_path.push_back(lat.qubit_at(x, 0));

  // Dual structure. Plaquette index from its grid cell:
  auto plaq_at = [&](int x, int y) {
    return (y / 2) * d + (x / 2);  // rows y = 1,3,.. each hold d plaquettes
  };
  lat.boundary_mult.assign(lat.plaquette_sites.size(), 0);
  lat.dual_links.resize(lat.M);
  for (int q = 0; q < lat.M; ++q) {
    const auto [x, y] = lat.qubit_sites[q];
    CodeLattice::DualLink link;
    if (x % 2 == 1) {  // odd-odd cell: horizontal bond
      link.role = QubitRole::Bulk;
      link.a = plaq_at(x - 1, y);
      link.b = plaq_at(x + 1, y);
    } else if (y == 0) {
      link.role = QubitRole::Bottom;
      link.a = plaq_at(x, 1);
    } else if (y == w - 1) {
      link.role = QubitRole::Top;
      link.a = plaq_at(x, w - 2);
    } else {  // even-even interior: vertical bond
      link.role = QubitRole::Bulk;
      link.a = plaq_at(x, y - 1);
      link.b = plaq_at(x, y + 1);
    }
    lat.dual_links[q] = link;
    if (link.role == QubitRole::Bulk) {
      lat.dual_bonds.emplace_back(link.a, link.b);
    } else {
      lat.boundary_mult[link.a] += 1;
      (link.role == QubitRole::Bottom ? lat.bottom_sites : lat.top_sites).push_back(link.a);
    }
  }
  return lat;
}

// Product of sigma over each star's support; +1 everywhere iff sigma is in the
// constrained (positive-star) set.
inline std::vector<Sign> star_syndrome(const CodeLattice& lat, const std::vector<Sign>& sigma) {
  if (static_cast<int>(sigma.size()) != lat.M)
    throw std::invalid_argument("star_syndrome: sigma size does not match qubit count");
  std::vector<Sign> syn(lat.stars.size(), 1);
  for (size_t s = 0; s < lat.stars.size(); ++s) {
    int p = 1;
    for (int q : lat.stars[s]) p *= sigma[q];
    syn[s] = static_cast<Sign>(p);
  }
  return syn;
}

// Ising mass fields: one mu per plaquette-dual site per slice, plus independent
// bottom/top boundary variables per slice. The induced sigma satisfies every
// star constraint by construction; the map is 2-to-1 (global flip of mu and
// both boundary variables fixes sigma).
struct MassFieldConfig {
  int n_slices = 0;
  int n_dual = 0;
  std::vector<Sign> mu;            // [slice * n_dual + p]
  std::vector<Sign> alpha_bottom;  // per slice
  std::vector<Sign> alpha_top;     // per slice

  static MassFieldConfig random(const CodeLattice& lat, int n_slices, std::mt19937_64& rng) {
    MassFieldConfig mf;
    mf.n_slices = n_slices;
    mf.n_dual = static_cast<int>(lat.plaquette_sites.size());
    mf.mu.resize(static_cast<size_t>(n_slices) * mf.n_dual);
    mf.alpha_bottom.resize(n_slices);
    mf.alpha_top.resize(n_slices);
    auto coin = [&rng]() { return static_cast<Sign>((rng() & 1) ? 1 : -1); };
    for (auto& m : mf.mu) m = coin();
    for (auto& a : mf.alpha_bottom) a = coin();
    for (auto& a : mf.alpha_top) a = coin();
    return mf;
  }

  void validate(const CodeLattice& lat) const {
    if (n_dual != static_cast<int>(lat.plaquette_sites.size()))
      throw std::invalid_argument("MassFieldConfig: dual-site count mismatch");
    if (mu.size() != static_cast<size_t>(n_slices) * n_dual ||
        alpha_bottom.size() != static_cast<size_t>(n_slices) || alpha_top.size() != static_cast<size_t>(n_slices))
      throw std::invalid_argument("MassFieldConfig: field array sizes inconsistent with n_slices");
    auto sign_ok = [](Sign v) { return v == 1 || v == -1; };
    for (auto m : mu)
      if (!sign_ok(m)) throw std::invalid_argument("MassFieldConfig: mu entries must be +1 or -1");
    for (int l = 0; l < n_slices; ++l)
      if (!sign_ok(alpha_bottom[l]) || !sign_ok(alpha_top[l]))
        throw std::invalid_argument("MassFieldConfig: boundary variables must be +1 or -1");
  }
};

inline std::vector<Sign> mass_field_to_sigma(const CodeLattice& lat, const MassFieldConfig& mf, int slice) {
  mf.validate(lat);
  if (slice < 0 || slice >= mf.n_slices) throw std::invalid_argument("mass_field_to_sigma: slice out of range");
  const Sign* mu = mf.mu.data() + static_cast<size_t>(slice) * mf.n_dual;
  std::vector<Sign> sigma(lat.M);
  for (int q = 0; q < lat.M; ++q) {
    const auto& link = lat.dual_links[q];
    switch (link.role) {
      case QubitRole::Bulk: sigma[q] = static_cast<Sign>(mu[link.a] * mu[link.b]); break;
      case QubitRole::Bottom: sigma[q] = static_cast<Sign>(mf.alpha_bottom[slice] * mu[link.a]); break;
      case QubitRole::Top: sigma[q] = static_cast<Sign>(mf.alpha_top[slice] * mu[link.a]); break;
    }
  }
  return sigma;
}

// Every sigma with all stars +1, found by filtering the full 2^M cube. This is
// deliberately independent of the mass-field route so the two can be compared.
inline std::vector<std::vector<Sign>> enumerate_constrained_sigma(const CodeLattice& lat, int cap = 16) {
  if (lat.M > cap)
    throw CapacityError("enumerate_constrained_sigma: " + std::to_string(lat.M) + " qubits exceeds cap " +
                        std::to_string(cap));
  std::vector<std::vector<Sign>> out;
  const uint32_t end = 1u << lat.M;
  std::vector<Sign> sigma(lat.M);
  for (uint32_t bits = 0; bits < end; ++bits) {
    for (int q = 0; q < lat.M; ++q) sigma[q] = (bits >> q) & 1u ? -1 : 1;
    const auto syn = star_syndrome(lat, sigma);
    if (std::all_of(syn.begin(), syn.end(), [](Sign v) { return v == 1; })) out.push_back(sigma);
  }
  return out;
}

// All pairwise displacements r_i - r_j between qubit sites, in grid units.
inline std::vector<Displacement> all_pair_displacements(const CodeLattice& lat) {
  std::vector<Displacement> out;
  for (const auto& a : lat.qubit_sites)
    for (const auto& b : lat.qubit_sites) out.push_back({a.x - b.x, a.y - b.y});
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

inline void write_lattice_csv(const CodeLattice& lat, std::ostream& os) {
  os << "entity,index,x,y,members\n";
  auto join = [](const std::vector<int>& v) {
    std::string s;
    for (size_t i = 0; i < v.size(); ++i) {
      if (i) s += ';';
      s += std::to_string(v[i]);
    }
    return s;
  };
  for (int q = 0; q < lat.M; ++q)
    os << "qubit," << q << ',' << lat.qubit_sites[q].x << ',' << lat.qubit_sites[q].y << ",\n";
  for (size_t i = 0; i < lat.stars.size(); ++i)
    os << "star," << i << ',' << lat.star_sites[i].x << ',' << lat.star_sites[i].y << ',' << join(lat.stars[i])
       << '\n';
  for (size_t i = 0; i < lat.plaquettes.size(); ++i)
    os << "plaquette," << i << ',' << lat.plaquette_sites[i].x << ',' << lat.plaquette_sites[i].y << ','
       << join(lat.plaquettes[i]) << '\n';
  os << "logical_x,0,,," << join(lat.logical_x_path) << '\n';
  os << "logical_z,0,,," << join(lat.logical_z_path) << '\n';
}

}  // namespace thlab
