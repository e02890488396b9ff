#pragma once

// Quench dynamics by spectral decomposition.

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <string>
#include <vector>

#include "qmbs/entanglement.hpp"
#include "qmbs/error.hpp"
#include "qmbs/fockspace.hpp"
#include "qmbs/lattice.hpp"
#include "qmbs/operators.hpp"
#include "qmbs/spectra.hpp"

namespace qmbs {

enum class InitialState { product, uniform_pair };

inline const char* to_string(InitialState s) { return s == InitialState::product ? "product" : "uniform_pair"; }

/// c†_N ... c†_1 |vac>: sites 1..N occupied. Reordering to the canonical
/// ascending product gives the sign (-1)^(N(N-1)/2).
inline StateVector product_state(int n_sites, int n_particles) {
  if (n_particles < 1 || n_particles > n_sites) throw InvalidParameter("product state needs 1 <= N <= n_sites");
  const Config c = (Config{1} << n_particles) - 1;
  const int sign = parity_sign(n_particles * (n_particles - 1) / 2);
  return basis_state(make_basis(n_sites, n_particles), c, static_cast<double>(sign));
}

inline StateVector product_state(const LatticeSpec& lattice, int n_particles) {
  return product_state(lattice.n_sites, n_particles);
}

/// Unit-weight bond pair matrix: g_xy = 1 for every bond, oriented from
/// sublattice 1 to 2 on bipartite lattices and lower label first otherwise.
inline Eigen::MatrixXd uniform_pair_matrix(const LatticeSpec& lattice) {
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(lattice.n_sites, lattice.n_sites);
  for (auto [x, y] : lattice.bonds) {
    if (lattice.labels && (*lattice.labels)[x] == 2) g(y, x) = 1.0;
    else g(x, y) = 1.0;
  }
  return g;
}

/// (sum_bonds c_x c_y)^k |filled>, normalized.
inline StateVector uniform_pair_state(const LatticeSpec& lattice, int k) {
  if (k < 1) throw InvalidParameter("uniform pair state needs k >= 1");
  if (2 * k > lattice.n_sites) throw InvalidParameter("uniform pair state: 2k exceeds the site count");
  const Eigen::MatrixXd g = uniform_pair_matrix(lattice);
  StateVector psi = filled_state(lattice.n_sites);
  for (int j = 0; j < k; ++j) {
    psi = build_pair_annihilation(g, psi.basis).apply(psi);
    const double nrm = psi.norm();
    if (nrm < 1e-12) throw DegenerateInput("uniform pair state vanishes at power " + std::to_string(j + 1));
    psi.amplitudes /= nrm;
  }
  return psi;
}

/// n log-spaced points on [t_min, t_max].
inline std::vector<double> log_time_grid(double t_min = 0.1, double t_max = 100.0, int n = 200) {
  if (!(t_min > 0.0) || !(t_max > t_min) || n < 2) throw InvalidParameter("log grid needs 0 < t_min < t_max, n >= 2");
  std::vector<double> t(static_cast<std::size_t>(n));
  const double lmin = std::log10(t_min), lmax = std::log10(t_max);
  for (int i = 0; i < n; ++i) t[static_cast<std::size_t>(i)] = std::pow(10.0, lmin + (lmax - lmin) * i / (n - 1));
  return t;
}

struct QuenchTrace {
  std::vector<double> times;
  std::vector<double> fidelity;
  std::vector<double> entropy;
  std::vector<double> norm;
  InitialState initial_state = InitialState::product;
  double baseline = 0.0;
};

/// |psi(t)> = V exp(-iEt) V† |psi0>.
class SpectralPropagator {
 public:
  SpectralPropagator(const SpectrumResult& spec, const StateVector& psi0) : spec_(spec), psi0_(psi0) {
    if (!spec.eigenvectors) throw InvalidParameter("evolution needs eigenvectors");
    if (!(*spec.basis == *psi0.basis)) throw SectorMismatch("initial state and spectrum sectors differ");
    coeffs_ = spec.eigenvectors->adjoint() * psi0.amplitudes;
  }

  [[nodiscard]] StateVector at(double t) const {
    Eigen::VectorXcd phased(coeffs_.size());
    for (Eigen::Index i = 0; i < coeffs_.size(); ++i) phased[i] = std::polar(1.0, -spec_.eigenvalues[i] * t) * coeffs_[i];
    return StateVector(spec_.basis, (*spec_.eigenvectors) * phased);
  }

  /// |<psi(t)|psi(0)>| from eigen-weights alone.
  [[nodiscard]] double fidelity(double t) const {
    Complex sum = 0.0;
    for (Eigen::Index i = 0; i < coeffs_.size(); ++i) sum += std::norm(coeffs_[i]) * std::polar(1.0, spec_.eigenvalues[i] * t);
    return std::abs(sum);
  }

  [[nodiscard]] const Eigen::VectorXcd& eigen_coefficients() const { return coeffs_; }

 private:
  const SpectrumResult& spec_;
  StateVector psi0_;
  Eigen::VectorXcd coeffs_;
};

inline QuenchTrace evolve(const SpectrumResult& spec, const StateVector& psi0, const std::vector<double>& times,
                          const Bipartition& part, InitialState tag = InitialState::product) {
  if (std::abs(psi0.norm() - 1.0) > 1e-10) throw InvalidParameter("initial state must be normalized");
  const SpectralPropagator prop(spec, psi0);
  const PartitionMap map(*psi0.basis, part);
  QuenchTrace tr;
  tr.times = times;
  tr.initial_state = tag;
  const int n_sites = psi0.n_sites(), n_particles = psi0.n_particles();
  tr.baseline = (n_particles > 0 && n_particles < n_sites) ? average_random_entropy(n_sites, n_particles) : 0.0;
  for (double t : times) {
    const StateVector psi_t = prop.at(t);
    tr.fidelity.push_back(std::abs(psi_t.amplitudes.dot(psi0.amplitudes)));
    tr.entropy.push_back(entanglement_entropy(psi_t, map));
    tr.norm.push_back(psi_t.norm());
  }
  return tr;
}

}  // namespace qmbs
