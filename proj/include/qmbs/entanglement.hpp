#pragma once

// Mode bipartitions of fermionic states, reduced density matrices and
// von Neumann entropy.
//
// Before tracing out B the occupied modes are reordered so that every A mode
// precedes every B mode; each amplitude picks up the sign of that permutation.

#include <Eigen/Dense>

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "qmbs/error.hpp"
#include "qmbs/fockspace.hpp"

namespace qmbs {

struct Bipartition {
  std::vector<int> sites_a;  // 0-based, in the order used for the A-local encoding
  std::vector<int> sites_b;
};

inline Bipartition make_bipartition(int n_sites, std::vector<int> sites_a) {
  std::vector<bool> in_a(static_cast<std::size_t>(n_sites), false);
  for (int x : sites_a) {
    if (x < 0 || x >= n_sites) throw InvalidParameter("bipartition site out of range");
    if (in_a[static_cast<std::size_t>(x)]) throw InvalidParameter("bipartition lists a site twice");
    in_a[static_cast<std::size_t>(x)] = true;
  }
  Bipartition p;
  p.sites_a = std::move(sites_a);
  for (int x = 0; x < n_sites; ++x)
    if (!in_a[static_cast<std::size_t>(x)]) p.sites_b.push_back(x);
  if (p.sites_a.empty() || p.sites_b.empty()) throw InvalidParameter("both subsystems of a bipartition must be nonempty");
  return p;
}

inline Bipartition make_bipartition(int n_sites, std::vector<int> sites_a, std::vector<int> sites_b_order) {
  Bipartition p = make_bipartition(n_sites, std::move(sites_a));
  std::vector<int> sorted_given = sites_b_order;
  std::sort(sorted_given.begin(), sorted_given.end());
  if (sorted_given != p.sites_b) throw InvalidParameter("B ordering is not the complement of A");
  p.sites_b = std::move(sites_b_order);
  return p;
}

/// A = labels 1 .. ceil(n/2).
inline Bipartition half_system(int n_sites) {
  std::vector<int> a;
  for (int x = 0; x < (n_sites + 1) / 2; ++x) a.push_back(x);
  return make_bipartition(n_sites, a);
}

/// Per-configuration split into (A-local index, B-local index, sign), reusable
/// across every state in one sector.
class PartitionMap {
 public:
  PartitionMap(const FockBasis& basis, const Bipartition& part) : part_(part) {
    const int n = basis.n_sites();
    if (static_cast<int>(part.sites_a.size() + part.sites_b.size()) != n)
      throw SectorMismatch("bipartition does not cover the basis sites");
    if (part.sites_a.size() > 30 || part.sites_b.size() > 30) throw CapacityExceeded("subsystem too large", 0.0);
    // Position of every site in the target order (A list then B list).
    std::vector<int> target_pos(static_cast<std::size_t>(n));
    for (std::size_t i = 0; i < part.sites_a.size(); ++i) target_pos[static_cast<std::size_t>(part.sites_a[i])] = static_cast<int>(i);
    for (std::size_t i = 0; i < part.sites_b.size(); ++i)
      target_pos[static_cast<std::size_t>(part.sites_b[i])] = static_cast<int>(part.sites_a.size() + i);
    entries_.reserve(basis.size());
    std::vector<int> occ;
    for (Config c : basis.configs()) {
      Entry e{};
      for (std::size_t i = 0; i < part.sites_a.size(); ++i)
        if ((c >> part.sites_a[i]) & 1U) e.a |= 1U << i;
      for (std::size_t i = 0; i < part.sites_b.size(); ++i)
        if ((c >> part.sites_b[i]) & 1U) e.b |= 1U << i;
      // Occupied modes listed in ascending site order; count inversions against the target order.
      occ.clear();
      for (int x = 0; x < n; ++x)
        if ((c >> x) & 1U) occ.push_back(target_pos[static_cast<std::size_t>(x)]);
      int inversions = 0;
      for (std::size_t i = 0; i < occ.size(); ++i)
        for (std::size_t j = i + 1; j < occ.size(); ++j)
          if (occ[i] > occ[j]) ++inversions;
      e.sign = parity_sign(inversions);
      entries_.push_back(e);
    }
  }

  struct Entry {
    std::uint32_t a = 0;
    std::uint32_t b = 0;
    int sign = 1;
  };

  [[nodiscard]] const std::vector<Entry>& entries() const { return entries_; }
  [[nodiscard]] const Bipartition& partition() const { return part_; }
  [[nodiscard]] std::size_t dim_a() const { return std::size_t{1} << part_.sites_a.size(); }
  [[nodiscard]] std::size_t dim_b() const { return std::size_t{1} << part_.sites_b.size(); }

  /// psi(a, b) with the reordering sign applied.
  [[nodiscard]] Eigen::MatrixXcd coefficient_matrix(const StateVector& psi) const {
    if (psi.amplitudes.size() != static_cast<Eigen::Index>(entries_.size()))
      throw SectorMismatch("partition map built for a different sector");
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(dim_a()), static_cast<Eigen::Index>(dim_b()));
    for (std::size_t i = 0; i < entries_.size(); ++i)
      m(entries_[i].a, entries_[i].b) = static_cast<double>(entries_[i].sign) * psi.amplitudes[static_cast<Eigen::Index>(i)];
    return m;
  }

 private:
  Bipartition part_;
  std::vector<Entry> entries_;
};

/// rho_A over A-local configurations (bit i = sites_a[i]).
inline Eigen::MatrixXcd reduced_density_matrix(const StateVector& psi, const PartitionMap& map) {
  const Eigen::MatrixXcd m = map.coefficient_matrix(psi);
  return m * m.adjoint();
}

inline Eigen::MatrixXcd reduced_density_matrix(const StateVector& psi, const Bipartition& part) {
  return reduced_density_matrix(psi, PartitionMap(*psi.basis, part));
}

inline constexpr double kEigenvalueClamp = 1e-14;

inline double entropy_from_probabilities(const Eigen::VectorXd& p) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < p.size(); ++i)
    if (p[i] > kEigenvalueClamp) s -= p[i] * std::log(p[i]);
  return s;
}

/// -Tr rho ln rho in nats; rejects trace deviations beyond 1e-8.
inline double von_neumann_entropy(const Eigen::MatrixXcd& rho) {
  const double tr = rho.trace().real();
  if (std::abs(tr - 1.0) > 1e-8) throw InvalidParameter("density matrix trace " + std::to_string(tr) + " is not 1");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(rho, Eigen::EigenvaluesOnly);
  return entropy_from_probabilities(es.eigenvalues());
}

/// Same value as von_neumann_entropy(reduced_density_matrix(...)), computed from
/// Schmidt values block by block in the A particle number.
inline double entanglement_entropy(const StateVector& psi, const PartitionMap& map) {
  const double nrm2 = psi.amplitudes.squaredNorm();
  if (std::abs(nrm2 - 1.0) > 1e-8) throw InvalidParameter("entanglement entropy needs a normalized state");
  const int n_a = static_cast<int>(map.partition().sites_a.size());
  const int n_b = static_cast<int>(map.partition().sites_b.size());
  const int total = psi.n_particles();
  // Row/col compaction per A particle number.
  double s = 0.0;
  const auto& ent = map.entries();
  for (int na = std::max(0, total - n_b); na <= std::min(n_a, total); ++na) {
    std::vector<std::uint32_t> rows, cols;
    for (const auto& e : ent)
      if (std::popcount(e.a) == na) {
        rows.push_back(e.a);
        cols.push_back(e.b);
      }
    std::vector<std::uint32_t> ur = rows, uc = cols;
    std::sort(ur.begin(), ur.end());
    ur.erase(std::unique(ur.begin(), ur.end()), ur.end());
    std::sort(uc.begin(), uc.end());
    uc.erase(std::unique(uc.begin(), uc.end()), uc.end());
    Eigen::MatrixXcd block = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(ur.size()), static_cast<Eigen::Index>(uc.size()));
    for (std::size_t i = 0; i < ent.size(); ++i) {
      if (std::popcount(ent[i].a) != na) continue;
      const auto r = std::lower_bound(ur.begin(), ur.end(), ent[i].a) - ur.begin();
      const auto c = std::lower_bound(uc.begin(), uc.end(), ent[i].b) - uc.begin();
      block(r, c) = static_cast<double>(ent[i].sign) * psi.amplitudes[static_cast<Eigen::Index>(i)];
    }
    if (block.size() == 0) continue;
    Eigen::BDCSVD<Eigen::MatrixXcd> svd(block);
    const Eigen::VectorXd p = svd.singularValues().array().square();
    s += entropy_from_probabilities(p);
  }
  return s;
}

inline double entanglement_entropy(const StateVector& psi, const Bipartition& part) {
  return entanglement_entropy(psi, PartitionMap(*psi.basis, part));
}

/// Mean entanglement entropy of random fixed-N states for a half-system cut,
/// with filling n = N / n_sites.
inline double average_random_entropy(int n_sites, int n_particles) {
  if (n_particles <= 0 || n_particles >= n_sites)
    throw InvalidParameter("average random entropy needs 0 < N < n_sites");
  const double n = static_cast<double>(n_particles) / n_sites;
  const double L = n_sites;
  const double volume = 0.5 * ((n - 1.0) * std::log(1.0 - n) - n * std::log(n)) * L;
  const double correction = std::sqrt(n * (1.0 - n) / (2.0 * std::numbers::pi)) * std::abs(std::log((1.0 - n) / n)) * std::sqrt(L);
  return volume - correction + (1.0 - 2.0 * std::numbers::ln2) / 4.0;
}

}  // namespace qmbs
