#pragma once

// Sparse operators between fixed-N sectors: hopping, the correlated
// (density-assisted) term, the parent Hamiltonian, the pair operator Q, and
// the particle-hole twin of all of these.

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <ostream>
#include <utility>
#include <vector>

#include "qmbs/error.hpp"
#include "qmbs/fockspace.hpp"
#include "qmbs/lattice.hpp"

namespace qmbs {

using SparseMatrix = Eigen::SparseMatrix<Complex, Eigen::ColMajor, std::int64_t>;

/// Maps states in `domain` to states in `codomain`; rows index the codomain.
struct SectorOperator {
  BasisPtr domain;
  BasisPtr codomain;
  SparseMatrix matrix;

  [[nodiscard]] bool square() const { return *domain == *codomain; }
  [[nodiscard]] int delta_particles() const { return codomain->n_particles() - domain->n_particles(); }

  [[nodiscard]] StateVector apply(const StateVector& psi) const {
    if (!(*psi.basis == *domain)) throw SectorMismatch("operator domain does not match state sector");
    return StateVector(codomain, matrix * psi.amplitudes);
  }

  [[nodiscard]] bool is_real() const {
    for (Eigen::Index k = 0; k < matrix.outerSize(); ++k)
      for (SparseMatrix::InnerIterator it(matrix, k); it; ++it)
        if (it.value().imag() != 0.0) return false;
    return true;
  }
};

inline SectorOperator operator*(const SectorOperator& a, const SectorOperator& b) {
  if (!(*a.domain == *b.codomain)) throw SectorMismatch("operator product: sectors do not compose");
  return {b.domain, a.codomain, SparseMatrix(a.matrix * b.matrix)};
}

inline SectorOperator operator+(const SectorOperator& a, const SectorOperator& b) {
  if (!(*a.domain == *b.domain) || !(*a.codomain == *b.codomain))
    throw SectorMismatch("operator sum: sectors differ");
  return {a.domain, a.codomain, SparseMatrix(a.matrix + b.matrix)};
}

inline SectorOperator operator-(const SectorOperator& a, const SectorOperator& b) {
  if (!(*a.domain == *b.domain) || !(*a.codomain == *b.codomain))
    throw SectorMismatch("operator difference: sectors differ");
  return {a.domain, a.codomain, SparseMatrix(a.matrix - b.matrix)};
}

inline SectorOperator scaled(const SectorOperator& a, Complex s) { return {a.domain, a.codomain, SparseMatrix(s * a.matrix)}; }

inline SectorOperator adjoint(const SectorOperator& a) {
  return {a.codomain, a.domain, SparseMatrix(a.matrix.adjoint())};
}

inline SectorOperator identity_operator(BasisPtr basis) {
  SparseMatrix id(static_cast<Eigen::Index>(basis->size()), static_cast<Eigen::Index>(basis->size()));
  id.setIdentity();
  return {basis, basis, id};
}

inline double frobenius_norm(const SectorOperator& a) { return a.matrix.norm(); }

/// Relative Frobenius distance between A and A†.
inline double hermiticity_error(const SectorOperator& a) {
  const double nrm = a.matrix.norm();
  if (nrm == 0.0) return 0.0;
  return SparseMatrix(a.matrix - SparseMatrix(a.matrix.adjoint())).norm() / nrm;
}

/// Largest singular value estimated by power iteration on A†A from a fixed
/// start vector. Slight underestimate at worst; used only as a tolerance scale.
inline double spectral_norm_estimate(const SectorOperator& a, int iterations = 60) {
  const auto n = a.matrix.cols();
  if (n == 0 || a.matrix.nonZeros() == 0) return 0.0;
  Eigen::VectorXcd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = Complex(1.0 + 0.37 * std::sin(1.0 + 0.71 * static_cast<double>(i)), 0.0);
  v.normalize();
  double sigma = 0.0;
  for (int it = 0; it < iterations; ++it) {
    Eigen::VectorXcd w = a.matrix.adjoint() * (a.matrix * v);
    const double nrm = w.norm();
    if (nrm == 0.0) return 0.0;
    const double next = std::sqrt(nrm);
    v = w / nrm;
    if (it > 5 && std::abs(next - sigma) <= 1e-6 * next) return next;
    sigma = next;
  }
  return sigma;
}

// ---------------------------------------------------------------------------
// Assembly

struct AssemblyOptions {
  std::size_t max_nonzeros = 400'000'000;
};

/// Column-by-column assembly: `generate(config, emit)` calls emit(target, amp)
/// for every term of O|config>. Duplicate targets are summed, exact zeros dropped.
template <class Generator>
SectorOperator assemble(BasisPtr domain, BasisPtr codomain, Generator&& generate, std::size_t terms_per_column,
                        const AssemblyOptions& opts = {}) {
  const double estimate = static_cast<double>(domain->size()) * static_cast<double>(terms_per_column);
  if (estimate > static_cast<double>(opts.max_nonzeros))
    throw CapacityExceeded("operator assembly would generate ~" + std::to_string(static_cast<long long>(estimate)) +
                               " nonzeros, above the cap " + std::to_string(opts.max_nonzeros),
                           estimate * 24.0);
  const auto cols = static_cast<Eigen::Index>(domain->size());
  const auto rows = static_cast<Eigen::Index>(codomain->size());
  std::vector<std::int64_t> outer(static_cast<std::size_t>(cols) + 1, 0);
  std::vector<std::int64_t> inner;
  std::vector<Complex> values;
  std::vector<std::pair<std::int64_t, Complex>> column;
  const FockBasis& target = *codomain;
  for (Eigen::Index j = 0; j < cols; ++j) {
    column.clear();
    generate(domain->config(static_cast<std::size_t>(j)), [&](Config c, Complex amp) {
      column.emplace_back(static_cast<std::int64_t>(target.index(c)), amp);
    });
    std::stable_sort(column.begin(), column.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    for (std::size_t k = 0; k < column.size();) {
      const auto row = column[k].first;
      Complex sum = 0.0;
      for (; k < column.size() && column[k].first == row; ++k) sum += column[k].second;
      if (sum != Complex{}) {
        inner.push_back(row);
        values.push_back(sum);
      }
    }
    outer[static_cast<std::size_t>(j) + 1] = static_cast<std::int64_t>(inner.size());
  }
  const Eigen::Map<const SparseMatrix> view(rows, cols, static_cast<std::int64_t>(inner.size()), outer.data(),
                                            inner.data(), values.data());
  return {std::move(domain), std::move(codomain), SparseMatrix(view)};
}

namespace detail {

/// emits  sum_{x,y} h_xy c†_x c_y |c>
template <class Emit>
void one_body_terms(Config c, const Eigen::MatrixXcd& h, Emit& emit) {
  const int n = static_cast<int>(h.rows());
  for (int y = 0; y < n; ++y) {
    if (((c >> y) & 1U) == 0) continue;
    const Config c1 = c ^ (Config{1} << y);
    const int s1 = parity_sign(occupied_below(c, y));
    for (int x = 0; x < n; ++x) {
      const Complex hxy = h(x, y);
      if (hxy == Complex{} || ((c1 >> x) & 1U) != 0) continue;
      const int s2 = parity_sign(occupied_below(c1, x));
      emit(c1 | (Config{1} << x), static_cast<double>(s1 * s2) * hxy);
    }
  }
}

/// emits sum_{x,y} g_xy c_x c_y |c>   (create = false)
///    or sum_{x,y} g_xy c†_x c†_y |c> (create = true)
template <class Emit>
void pair_terms(Config c, const Eigen::MatrixXd& g, bool create, Emit& emit) {
  const int n = static_cast<int>(g.rows());
  for (int y = 0; y < n; ++y) {
    const bool occ_y = ((c >> y) & 1U) != 0;
    if (occ_y == create) continue;
    const Config c1 = c ^ (Config{1} << y);
    const int s1 = parity_sign(occupied_below(c, y));
    for (int x = 0; x < n; ++x) {
      const double gxy = g(x, y);
      const bool occ_x = ((c1 >> x) & 1U) != 0;
      if (gxy == 0.0 || occ_x == create) continue;
      const int s2 = parity_sign(occupied_below(c1, x));
      emit(c1 ^ (Config{1} << x), static_cast<double>(s1 * s2) * gxy);
    }
  }
}

/// Factored correlated term at site x:
///   coeff * (sum_y w_y c†_y) M_x (sum_y' w_y' c_y') |c>
/// with M_x = c_x c†_x (empty_middle) or n_x (otherwise). Built by composing the
/// three factors right to left; no normal-ordered expansion is used.
template <class Emit>
void correlated_terms(Config c, int x, const Eigen::RowVectorXd& w, double coeff, bool empty_middle, Emit& emit) {
  if (coeff == 0.0) return;
  const int n = static_cast<int>(w.size());
  for (int yp = 0; yp < n; ++yp) {
    if (w[yp] == 0.0 || ((c >> yp) & 1U) == 0) continue;
    const Config c1 = c ^ (Config{1} << yp);
    const int s1 = parity_sign(occupied_below(c, yp));
    // c_x c†_x and n_x are diagonal with eigenvalue 1 on the kept configurations.
    const bool x_occupied = ((c1 >> x) & 1U) != 0;
    if (empty_middle == x_occupied) continue;
    for (int y = 0; y < n; ++y) {
      if (w[y] == 0.0 || ((c1 >> y) & 1U) != 0) continue;
      const int s2 = parity_sign(occupied_below(c1, y));
      emit(c1 | (Config{1} << y), coeff * w[y] * w[yp] * static_cast<double>(s1 * s2));
    }
  }
}

inline int count_nonzero_offdiag(const Eigen::MatrixXcd& h) {
  int k = 0;
  for (Eigen::Index i = 0; i < h.size(); ++i)
    if (h.data()[i] != Complex{}) ++k;
  return k;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Model description shared by the original and particle-hole-transformed forms.

enum class CorrelatedForm {
  particle,  // (sum q c†) c_x c†_x (sum q c)  -- the original model
  hole,      // (sum q c†) n_x (sum q c)       -- after particle-hole transform
};

enum class PairDirection { annihilate, create };

/// H = sum h_xy c†_x c_y + sum_x coeff_x (q_x . c)† M_x (q_x . c) + sum V_x n_x + offset
/// with M_x fixed by `form`.  The pair operator is sum q_xy c_x c_y (annihilate)
/// or sum q_xy c†_x c†_y (create).
struct ModelTerms {
  Eigen::MatrixXcd hopping;
  Eigen::MatrixXd pair_matrix;
  Eigen::VectorXd correlated_coeff;
  CorrelatedForm form = CorrelatedForm::particle;
  Eigen::VectorXd onsite;
  double offset = 0.0;
  PairDirection pair = PairDirection::annihilate;

  [[nodiscard]] int n_sites() const { return static_cast<int>(hopping.rows()); }
};

inline ModelTerms model_terms(const CouplingSet& cs) {
  ModelTerms m;
  m.hopping = cs.T;
  m.pair_matrix = cs.Q;
  m.correlated_coeff = cs.A;
  m.onsite = Eigen::VectorXd::Zero(cs.n_sites());
  return m;
}

/// Conjugation by U = prod_x (c_x - c†_x).
///
///   c†_x c_y          -> delta_xy - c†_y c_x
///   a† c_x c†_x a     -> -a† n_x a + |q_x|^2 n_x
///   a† n_x a          -> -a† c_x c†_x a + |q_x|^2 (1 - n_x)
///   n_x               -> 1 - n_x
///   sum q c c         -> sum q c† c†
/// where a = sum_y q_xy c_y and |q_x|^2 = sum_y q_xy^2 = -(Q^2)_xx.
/// Applying it twice returns the original terms.
inline ModelTerms particle_hole_transform(const ModelTerms& m) {
  ModelTerms out;
  const int n = m.n_sites();
  out.hopping = -m.hopping.transpose();
  out.pair_matrix = m.pair_matrix;
  out.correlated_coeff = -m.correlated_coeff;
  out.form = m.form == CorrelatedForm::particle ? CorrelatedForm::hole : CorrelatedForm::particle;
  out.pair = m.pair == PairDirection::annihilate ? PairDirection::create : PairDirection::annihilate;
  out.onsite = -m.onsite;
  out.offset = m.offset + m.hopping.trace().real() + m.onsite.sum();
  for (int x = 0; x < n; ++x) {
    const double q2 = m.pair_matrix.row(x).squaredNorm();
    const double a = m.correlated_coeff[x];
    if (m.form == CorrelatedForm::particle) {
      out.onsite[x] += a * q2;
    } else {
      out.onsite[x] -= a * q2;
      out.offset += a * q2;
    }
  }
  return out;
}

inline ModelTerms particle_hole_transform(const CouplingSet& cs) { return particle_hole_transform(model_terms(cs)); }

inline SectorOperator build_model_hamiltonian(const ModelTerms& m, BasisPtr basis, const AssemblyOptions& opts = {}) {
  const int n = m.n_sites();
  if (basis->n_sites() != n) throw SectorMismatch("basis and model have different site counts");
  const bool empty_middle = m.form == CorrelatedForm::particle;
  std::size_t per_col = static_cast<std::size_t>(detail::count_nonzero_offdiag(m.hopping)) + 1;
  for (int x = 0; x < n; ++x) {
    const auto deg = static_cast<std::size_t>((m.pair_matrix.row(x).array() != 0.0).count());
    per_col += deg * deg;
  }
  return assemble(
      basis, basis,
      [&](Config c, auto&& emit) {
        detail::one_body_terms(c, m.hopping, emit);
        for (int x = 0; x < n; ++x)
          detail::correlated_terms(c, x, m.pair_matrix.row(x), m.correlated_coeff[x], empty_middle, emit);
        double diag = m.offset;
        for (int x = 0; x < n; ++x)
          if ((c >> x) & 1U) diag += m.onsite[x];
        if (diag != 0.0) emit(c, diag);
      },
      per_col, opts);
}

inline SectorOperator build_one_body(const Eigen::MatrixXcd& h, BasisPtr basis, const AssemblyOptions& opts = {}) {
  if (basis->n_sites() != h.rows()) throw SectorMismatch("basis and matrix have different site counts");
  const auto per_col = static_cast<std::size_t>(detail::count_nonzero_offdiag(h));
  return assemble(basis, basis, [&](Config c, auto&& emit) { detail::one_body_terms(c, h, emit); }, per_col, opts);
}

/// H_hop = sum t_xy c†_x c_y.
inline SectorOperator build_hop(const CouplingSet& cs, BasisPtr basis, const AssemblyOptions& opts = {}) {
  return build_one_body(cs.T, std::move(basis), opts);
}

inline SectorOperator build_correlated(const Eigen::MatrixXd& Q, const Eigen::VectorXd& coeff, BasisPtr basis,
                                       const AssemblyOptions& opts = {}) {
  const int n = static_cast<int>(Q.rows());
  if (basis->n_sites() != n) throw SectorMismatch("basis and matrix have different site counts");
  std::size_t per_col = 1;
  for (int x = 0; x < n; ++x) {
    const auto deg = static_cast<std::size_t>((Q.row(x).array() != 0.0).count());
    per_col += deg * deg;
  }
  return assemble(
      basis, basis,
      [&](Config c, auto&& emit) {
        for (int x = 0; x < n; ++x) detail::correlated_terms(c, x, Q.row(x), coeff[x], true, emit);
      },
      per_col, opts);
}

/// H_cor = sum_x A_x (sum_y q_xy c†_y) c_x c†_x (sum_y' q_xy' c_y').
inline SectorOperator build_cor(const CouplingSet& cs, BasisPtr basis, const AssemblyOptions& opts = {}) {
  return build_correlated(cs.Q, cs.A, std::move(basis), opts);
}

/// H_par = sum_x B_x h_x; same operator form as H_cor with strictly positive weights.
inline SectorOperator build_parent(const CouplingSet& cs, BasisPtr basis, const AssemblyOptions& opts = {}) {
  if (!cs.B) throw InvalidParameter("parent Hamiltonian needs B weights (sample with a b_range)");
  for (Eigen::Index x = 0; x < cs.B->size(); ++x)
    if (!((*cs.B)[x] > 0.0)) throw InvalidParameter("parent weight B_" + std::to_string(x + 1) + " is not positive");
  return build_correlated(cs.Q, *cs.B, std::move(basis), opts);
}

/// H = H_hop + H_cor in one pass.
inline SectorOperator build_hamiltonian(const CouplingSet& cs, BasisPtr basis, const AssemblyOptions& opts = {}) {
  return build_model_hamiltonian(model_terms(cs), std::move(basis), opts);
}

/// sum g_xy c_x c_y, N -> N-2 (general coefficient matrix, not antisymmetrized).
inline SectorOperator build_pair_annihilation(const Eigen::MatrixXd& g, BasisPtr basis_n, const AssemblyOptions& opts = {}) {
  if (basis_n->n_particles() < 2)
    throw InvalidParameter("pair annihilation needs N >= 2; the target sector would be empty");
  const auto per_col = static_cast<std::size_t>((g.array() != 0.0).count());
  auto target = make_basis(basis_n->n_sites(), basis_n->n_particles() - 2);
  return assemble(basis_n, target, [&](Config c, auto&& emit) { detail::pair_terms(c, g, false, emit); }, per_col, opts);
}

/// sum g_xy c†_x c†_y, N -> N+2.
inline SectorOperator build_pair_creation(const Eigen::MatrixXd& g, BasisPtr basis_n, const AssemblyOptions& opts = {}) {
  if (basis_n->n_particles() + 2 > basis_n->n_sites())
    throw InvalidParameter("pair creation needs N + 2 <= n_sites");
  const auto per_col = static_cast<std::size_t>((g.array() != 0.0).count());
  auto target = make_basis(basis_n->n_sites(), basis_n->n_particles() + 2);
  return assemble(basis_n, target, [&](Config c, auto&& emit) { detail::pair_terms(c, g, true, emit); }, per_col, opts);
}

/// Q = sum q_xy c_x c_y on the N sector, mapping into N-2.
inline SectorOperator build_q_operator(const CouplingSet& cs, BasisPtr basis_n, const AssemblyOptions& opts = {}) {
  return build_pair_annihilation(cs.Q, std::move(basis_n), opts);
}

inline SectorOperator build_model_pair_operator(const ModelTerms& m, BasisPtr basis, const AssemblyOptions& opts = {}) {
  return m.pair == PairDirection::annihilate ? build_pair_annihilation(m.pair_matrix, std::move(basis), opts)
                                             : build_pair_creation(m.pair_matrix, std::move(basis), opts);
}

/// sum_x w_x c_x (N -> N-1) or sum_x w_x c†_x (N -> N+1).
inline SectorOperator build_mode_operator(const Eigen::VectorXd& w, Action action, BasisPtr basis_n) {
  const int n = basis_n->n_sites();
  const int target_n = basis_n->n_particles() + (action == Action::create ? 1 : -1);
  if (target_n < 0 || target_n > n) throw InvalidParameter("mode operator leaves the Fock space");
  auto target = make_basis(n, target_n);
  return assemble(
      basis_n, target,
      [&](Config c, auto&& emit) {
        for (int x = 0; x < n; ++x) {
          if (w[x] == 0.0) continue;
          if (const auto r = apply_op(c, {x, action})) emit(r->first, w[x] * r->second);
        }
      },
      static_cast<std::size_t>(n));
}

// ---------------------------------------------------------------------------
// Operators on several sectors at once, keyed by the domain particle number.

using OperatorFamily = std::map<int, SectorOperator>;

template <class Builder>
OperatorFamily build_family(int n_sites, const std::vector<int>& sectors, Builder&& builder) {
  OperatorFamily fam;
  for (int n : sectors) fam.emplace(n, builder(make_basis(n_sites, n)));
  return fam;
}

inline std::vector<int> all_sectors(int n_sites, int min_n = 0) {
  std::vector<int> out;
  for (int n = min_n; n <= n_sites; ++n) out.push_back(n);
  return out;
}

inline const SectorOperator& family_at(const OperatorFamily& fam, int n) {
  const auto it = fam.find(n);
  if (it == fam.end()) throw SectorMismatch("operator family has no sector N = " + std::to_string(n));
  return it->second;
}

inline StateVector apply_family(const OperatorFamily& fam, const StateVector& psi) { return family_at(fam, psi.n_particles()).apply(psi); }

/// (AB - BA)|psi>, each factor picked from its family by the sector it acts on.
inline StateVector commutator_apply(const OperatorFamily& a, const OperatorFamily& b, const StateVector& psi) {
  const StateVector ab = apply_family(a, apply_family(b, psi));
  const StateVector ba = apply_family(b, apply_family(a, psi));
  if (!same_sector(ab, ba)) throw SectorMismatch("commutator terms land in different sectors");
  return StateVector(ab.basis, ab.amplitudes - ba.amplitudes);
}

/// [A, B] restricted to domain sector n as a (possibly rectangular) sparse matrix.
inline SectorOperator commutator_on_sector(const OperatorFamily& a, const OperatorFamily& b, int n) {
  const auto& bn = family_at(b, n);
  const auto& an = family_at(a, n);
  return family_at(a, bn.codomain->n_particles()) * bn - family_at(b, an.codomain->n_particles()) * an;
}

// ---------------------------------------------------------------------------
// Observables

/// (1/|B|) sum_bonds <psi| n_x n_y |psi>, with |psi> assumed normalized.
inline double bond_density_expectation(const StateVector& psi, const std::vector<Bond>& bonds) {
  if (bonds.empty()) throw InvalidParameter("bond-averaged correlator over an empty bond set");
  double total = 0.0;
  const auto& configs = psi.basis->configs();
  for (std::size_t i = 0; i < configs.size(); ++i) {
    const double p = std::norm(psi.amplitudes[static_cast<Eigen::Index>(i)]);
    if (p == 0.0) continue;
    int pairs = 0;
    for (auto [x, y] : bonds) pairs += static_cast<int>(((configs[i] >> x) & (configs[i] >> y)) & 1U);
    total += p * pairs;
  }
  return total / static_cast<double>(bonds.size());
}

/// U = prod_x (c_x - c†_x) with factor 1 leftmost, acting on a state. Maps N to n_sites - N.
inline StateVector apply_particle_hole(const StateVector& psi) {
  const int n = psi.n_sites();
  StateVector out(make_basis(n, n - psi.n_particles()));
  const auto& configs = psi.basis->configs();
  for (std::size_t i = 0; i < configs.size(); ++i) {
    Config c = configs[i];
    int sign = 1;
    for (int x = n - 1; x >= 0; --x) {
      const bool occ = ((c >> x) & 1U) != 0;
      const auto r = apply_op(c, {x, occ ? Action::annihilate : Action::create});
      c = r->first;
      sign *= occ ? r->second : -r->second;
    }
    out.amplitudes[static_cast<Eigen::Index>(out.basis->index(c))] += static_cast<double>(sign) * psi.amplitudes[static_cast<Eigen::Index>(i)];
  }
  return out;
}

/// U† = U†_n ... U†_1 with U†_x = c†_x - c_x.
inline StateVector apply_particle_hole_adjoint(const StateVector& psi) {
  const int n = psi.n_sites();
  StateVector out(make_basis(n, n - psi.n_particles()));
  const auto& configs = psi.basis->configs();
  for (std::size_t i = 0; i < configs.size(); ++i) {
    Config c = configs[i];
    int sign = 1;
    for (int x = 0; x < n; ++x) {  // U† = U†_n ... U†_1, so U†_1 acts first
      const bool occ = ((c >> x) & 1U) != 0;
      const auto r = apply_op(c, {x, occ ? Action::annihilate : Action::create});
      c = r->first;
      sign *= occ ? -r->second : r->second;
    }
    out.amplitudes[static_cast<Eigen::Index>(out.basis->index(c))] += static_cast<double>(sign) * psi.amplitudes[static_cast<Eigen::Index>(i)];
  }
  return out;
}

/// Coordinate list: one "row col re im" line per stored entry, 0-based, column-major order.
inline void write_coo(std::ostream& os, const SectorOperator& op) {
  char buf[128];
  std::snprintf(buf, sizeof buf, "# rows %lld cols %lld nnz %lld\n", static_cast<long long>(op.matrix.rows()),
                static_cast<long long>(op.matrix.cols()), static_cast<long long>(op.matrix.nonZeros()));
  os << buf;
  for (Eigen::Index k = 0; k < op.matrix.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(op.matrix, k); it; ++it) {
      std::snprintf(buf, sizeof buf, "%lld %lld %.17g %.17g\n", static_cast<long long>(it.row()),
                    static_cast<long long>(it.col()), it.value().real(), it.value().imag());
      os << buf;
    }
}

}  // namespace qmbs
