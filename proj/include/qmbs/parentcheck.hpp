#pragma once

// Zero-mode census of the parent Hamiltonian over the whole Fock space.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <vector>

#include "qmbs/error.hpp"
#include "qmbs/lattice.hpp"
#include "qmbs/operators.hpp"
#include "qmbs/scars.hpp"
#include "qmbs/spectra.hpp"

namespace qmbs {

struct SectorCensus {
  int n_particles = 0;
  std::size_t dim = 0;
  int zero_count = 0;
  double min_eigenvalue = 0.0;
  double norm = 0.0;       // largest |eigenvalue|
  double threshold = 0.0;  // |E| < threshold counts as zero
  Eigen::MatrixXcd zero_space;  // orthonormal columns
};

struct Census {
  std::vector<SectorCensus> sectors;  // N = 0 .. n_sites
  int total = 0;
  int expected = 0;  // n_sites / 2 + 1
  std::optional<HypothesisReport> hypotheses;
  double global_norm = 0.0;
};

struct CensusOptions {
  int max_sites = 16;
  double relative_threshold = 1e-10;
  double absolute_floor = 1e-12;
  DenseOptions dense;
};

/// Zero eigenvalues of H_par per N sector. Threshold: max(1e-10 * ||H_par||, 1e-12)
/// with ||H_par|| the largest eigenvalue across all sectors.
inline Census zero_mode_census(const CouplingSet& cs, const LatticeSpec& lattice, const CensusOptions& opts = {}) {
  const int n = cs.n_sites();
  if (n != lattice.n_sites) throw InvalidParameter("couplings and lattice disagree on the site count");
  if (n > opts.max_sites)
    throw CapacityExceeded("parent census over " + std::to_string(n) + " sites exceeds the limit of " +
                               std::to_string(opts.max_sites),
                           std::pow(2.0, n) * 16.0);
  Census census;
  census.expected = n / 2 + 1;
  if (lattice.labels) census.hypotheses = check_theorem_hypotheses(cs.Q, *lattice.labels);

  std::vector<SpectrumResult> spectra;
  for (int m = 0; m <= n; ++m) {
    spectra.push_back(diagonalize(build_parent(cs, make_basis(n, m)), true, opts.dense));
    const auto& e = spectra.back().eigenvalues;
    if (e.size() > 0) census.global_norm = std::max(census.global_norm, e.cwiseAbs().maxCoeff());
  }
  const double threshold = std::max(opts.relative_threshold * census.global_norm, opts.absolute_floor);
  for (int m = 0; m <= n; ++m) {
    const auto& spec = spectra[static_cast<std::size_t>(m)];
    SectorCensus sc;
    sc.n_particles = m;
    sc.dim = spec.basis->size();
    sc.threshold = threshold;
    sc.min_eigenvalue = spec.eigenvalues.size() ? spec.eigenvalues.minCoeff() : 0.0;
    sc.norm = spec.eigenvalues.size() ? spec.eigenvalues.cwiseAbs().maxCoeff() : 0.0;
    std::vector<Eigen::Index> zeros;
    for (Eigen::Index i = 0; i < spec.eigenvalues.size(); ++i)
      if (std::abs(spec.eigenvalues[i]) < threshold) zeros.push_back(i);
    sc.zero_count = static_cast<int>(zeros.size());
    sc.zero_space.resize(static_cast<Eigen::Index>(sc.dim), static_cast<Eigen::Index>(zeros.size()));
    for (std::size_t j = 0; j < zeros.size(); ++j) sc.zero_space.col(static_cast<Eigen::Index>(j)) = spec.eigenvectors->col(zeros[j]);
    census.total += sc.zero_count;
    census.sectors.push_back(std::move(sc));
  }
  return census;
}

struct GroundSpaceMatch {
  struct Entry {
    int k = 0;
    int n_particles = 0;
    int zero_dim = 0;
    double projection_norm = 0.0;  // || P_zero |Psi_k> ||
  };
  std::vector<Entry> entries;
  bool all_projected = true;      // every tower state lies in its zero space (1e-8)
  bool all_one_dimensional = true; // every nonempty zero space has dimension 1
  int extra_zero_modes = 0;        // census.total minus tower size
};

inline GroundSpaceMatch ground_space_match(const Census& census, const ScarTower& tower) {
  GroundSpaceMatch out;
  for (int k = 0; k <= tower.k_max; ++k) {
    const StateVector& psi = tower.at(k);
    const auto& sc = census.sectors.at(static_cast<std::size_t>(psi.n_particles()));
    GroundSpaceMatch::Entry e;
    e.k = k;
    e.n_particles = psi.n_particles();
    e.zero_dim = sc.zero_count;
    e.projection_norm = sc.zero_count > 0 ? (sc.zero_space.adjoint() * psi.amplitudes).norm() : 0.0;
    if (std::abs(e.projection_norm - 1.0) > 1e-8) out.all_projected = false;
    out.entries.push_back(e);
  }
  for (const auto& sc : census.sectors)
    if (sc.zero_count > 1) out.all_one_dimensional = false;
  out.extra_zero_modes = census.total - (tower.k_max + 1);
  return out;
}

namespace fixtures {

/// Two decoupled open chains of `half` sites each (bonds never join them).
/// Sublattices stay balanced, so only connectivity fails.
inline LatticeSpec disconnected_chains(int half) {
  std::vector<Bond> bonds;
  for (int j = 0; j + 1 < half; ++j) {
    bonds.emplace_back(j, j + 1);
    bonds.emplace_back(half + j, half + j + 1);
  }
  LatticeSpec spec = build_custom(2 * half, bonds, "two-chains-" + std::to_string(half) + "+" + std::to_string(half));
  return spec;
}

/// Open chain with an odd number of sites: sublattice sizes differ by one.
inline LatticeSpec unequal_sublattices(int length = 5) {
  if (length % 2 == 0) throw InvalidParameter("unequal_sublattices fixture needs an odd length");
  return build_chain(length, Boundary::open);
}

}  // namespace fixtures

}  // namespace qmbs
