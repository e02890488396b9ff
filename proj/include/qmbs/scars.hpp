#pragma once

// Exact zero-energy tower Q^k |filled>, its verification, and the
// singular-value pairing of the hopping matrix into +/- energy modes.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <vector>

#include "qmbs/error.hpp"
#include "qmbs/fockspace.hpp"
#include "qmbs/lattice.hpp"
#include "qmbs/operators.hpp"

namespace qmbs {

inline constexpr double kScarTolerance = 1e-10;
inline constexpr double kTowerZeroThreshold = 1e-12;

struct ScarTower {
  std::vector<StateVector> states;  // normalized, index k
  std::vector<double> raw_norms;    // || Q^k |seed> ||
  int k_max = 0;
  bool terminated_early = false;    // vanished before floor(n/2)

  [[nodiscard]] const StateVector& at(int k) const { return states.at(static_cast<std::size_t>(k)); }
  /// Tower member living in the N-particle sector, if any.
  [[nodiscard]] const StateVector* in_sector(int n_particles) const {
    for (const auto& s : states)
      if (s.n_particles() == n_particles) return &s;
    return nullptr;
  }
};

/// Repeatedly applies the family's pair operator to `seed`. Stops when the next
/// vector has norm below 1e-12 relative to the (unit) previous one or when the
/// family has no operator for the current sector.
inline ScarTower build_scar_tower(const OperatorFamily& q_ops, const StateVector& seed) {
  ScarTower tower;
  tower.states.push_back(seed.normalized());
  tower.raw_norms.push_back(seed.norm());
  const int n_sites = seed.n_sites();
  const int k_limit = n_sites / 2;
  for (int k = 1; k <= k_limit; ++k) {
    const StateVector& prev = tower.states.back();
    const auto it = q_ops.find(prev.n_particles());
    if (it == q_ops.end()) break;
    StateVector next = it->second.apply(prev);
    const double growth = next.norm();
    if (growth < kTowerZeroThreshold) {
      tower.terminated_early = true;
      break;
    }
    next.amplitudes /= growth;
    tower.raw_norms.push_back(tower.raw_norms.back() * growth);
    tower.states.push_back(std::move(next));
  }
  tower.k_max = static_cast<int>(tower.states.size()) - 1;
  return tower;
}

/// Pair operators Q on every sector N >= 2 (the top-down chain used by the tower).
inline OperatorFamily build_q_family(const CouplingSet& cs) {
  const int n = cs.n_sites();
  std::vector<int> sectors;
  for (int m = n; m >= 2; m -= 2) sectors.push_back(m);
  return build_family(n, sectors, [&](BasisPtr b) { return build_q_operator(cs, std::move(b)); });
}

inline ScarTower build_scar_tower(const CouplingSet& cs) { return build_scar_tower(build_q_family(cs), filled_state(cs.n_sites())); }

/// ||H psi|| / ||H|| for normalized psi.
inline double verify_scar(const SectorOperator& h, const StateVector& psi, double h_norm = -1.0) {
  if (!h.square() || !(*h.domain == *psi.basis)) throw SectorMismatch("scar check: state and Hamiltonian sectors differ");
  if (h_norm < 0.0) h_norm = spectral_norm_estimate(h);
  const double res = h.apply(psi).norm();
  if (h_norm == 0.0) return res;
  return res / h_norm;
}

struct Rsga1Report {
  double cond_i = 0.0;    // ||H |seed>|| / ||H||
  double cond_ii = 0.0;   // ||[H,Q] |seed>|| / (||H|| ||Q||)
  double cond_iii = 0.0;  // max_N ||[[H,Q],Q]||_F / (||H|| ||Q||^2)

  [[nodiscard]] bool pass(double tol = kScarTolerance) const { return cond_i < tol && cond_ii < tol && cond_iii < tol; }
};

/// Restricted spectrum generating algebra of order one with eta† = Q and
/// psi_0 = the filled state. Needs H on every sector and Q on every N >= 2.
inline Rsga1Report verify_rsga1(const OperatorFamily& h_ops, const OperatorFamily& q_ops, const StateVector& seed) {
  double h_norm = 0.0, q_norm = 0.0;
  for (const auto& [n, op] : h_ops) h_norm = std::max(h_norm, spectral_norm_estimate(op));
  for (const auto& [n, op] : q_ops) q_norm = std::max(q_norm, spectral_norm_estimate(op));
  const double hs = h_norm > 0.0 ? h_norm : 1.0;
  const double qs = q_norm > 0.0 ? q_norm : 1.0;

  Rsga1Report rep;
  rep.cond_i = apply_family(h_ops, seed).norm() / hs;
  rep.cond_ii = commutator_apply(h_ops, q_ops, seed).norm() / (hs * qs);

  // [[H,Q],Q] = H Q Q - 2 Q H Q + Q Q H on each sector with N >= 4.
  for (const auto& [n, qn] : q_ops) {
    if (n < 4) continue;
    const auto& q2 = family_at(q_ops, n - 2);
    const SectorOperator hqq = family_at(h_ops, n - 4) * q2 * qn;
    const SectorOperator qhq = q2 * family_at(h_ops, n - 2) * qn;
    const SectorOperator qqh = q2 * qn * family_at(h_ops, n);
    const SectorOperator dbl = hqq - scaled(qhq, 2.0) + qqh;
    rep.cond_iii = std::max(rep.cond_iii, frobenius_norm(dbl) / (hs * qs * qs));
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Pairing decomposition of a bipartite hopping matrix

struct PairingDecomposition {
  Eigen::VectorXd epsilons;  // descending, > 0
  int rank = 0;
  Eigen::MatrixXd mode_matrix;  // R: a_i = sum_x c_x R_xi; columns (u_1, v_1, u_2, v_2, ..., zero modes)
  Eigen::MatrixXd b_modes;      // column i-1 holds w with b_i = sum_x w_x c_x, i = 1..2r
  std::vector<int> sublattice1, sublattice2;
};

inline constexpr double kPairingRankTolerance = 1e-10;

/// T = [[0, M], [M^T, 0]] in (sublattice 1, sublattice 2) blocks, M = U S V^T.
/// Column 2k-1 of R embeds u_k, column 2k embeds v_k, so R^T T R is block
/// diagonal with [[0, eps_k], [eps_k, 0]] blocks. Sign fix: the largest entry of
/// each u_k is positive (first one on ties), v_k = M^T u_k / eps_k.
inline PairingDecomposition pairing_decomposition(const CouplingSet& cs, const std::vector<int>& labels) {
  if (cs.mode != CouplingMode::bipartite) throw InvalidParameter("pairing decomposition needs bipartite couplings");
  const int n = cs.n_sites();
  PairingDecomposition pd;
  for (int x = 0; x < n; ++x) (labels[x] == 1 ? pd.sublattice1 : pd.sublattice2).push_back(x);
  const auto n1 = static_cast<Eigen::Index>(pd.sublattice1.size());
  const auto n2 = static_cast<Eigen::Index>(pd.sublattice2.size());
  Eigen::MatrixXd M(n1, n2);
  for (Eigen::Index i = 0; i < n1; ++i)
    for (Eigen::Index j = 0; j < n2; ++j) M(i, j) = cs.T(pd.sublattice1[i], pd.sublattice2[j]).real();

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(M, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Eigen::VectorXd& sv = svd.singularValues();
  const double smax = sv.size() > 0 ? sv(0) : 0.0;
  int r = 0;
  while (r < sv.size() && sv(r) > kPairingRankTolerance * smax && sv(r) > 0.0) ++r;
  pd.rank = r;
  pd.epsilons = sv.head(r);

  Eigen::MatrixXd U = svd.matrixU();
  Eigen::MatrixXd V = svd.matrixV();
  for (int k = 0; k < r; ++k) {
    Eigen::Index arg = 0;
    for (Eigen::Index i = 1; i < n1; ++i)
      if (std::abs(U(i, k)) > std::abs(U(arg, k)) + 1e-12) arg = i;
    if (U(arg, k) < 0.0) U.col(k) *= -1.0;
    V.col(k) = M.transpose() * U.col(k) / sv(k);
  }

  pd.mode_matrix = Eigen::MatrixXd::Zero(n, n);
  int col = 0;
  auto embed = [&](const Eigen::VectorXd& local, const std::vector<int>& sites) {
    for (std::size_t i = 0; i < sites.size(); ++i) pd.mode_matrix(sites[i], col) = local[static_cast<Eigen::Index>(i)];
    ++col;
  };
  for (int k = 0; k < r; ++k) {
    embed(U.col(k), pd.sublattice1);
    embed(V.col(k), pd.sublattice2);
  }
  for (Eigen::Index k = r; k < n1; ++k) embed(U.col(k), pd.sublattice1);
  for (Eigen::Index k = r; k < n2; ++k) embed(V.col(k), pd.sublattice2);

  pd.b_modes.resize(n, 2 * r);
  for (int k = 0; k < r; ++k) {
    const Eigen::VectorXd a1 = pd.mode_matrix.col(2 * k);
    const Eigen::VectorXd a2 = pd.mode_matrix.col(2 * k + 1);
    pd.b_modes.col(2 * k) = (a1 + a2) / std::sqrt(2.0);
    pd.b_modes.col(2 * k + 1) = (a1 - a2) / std::sqrt(2.0);
  }
  return pd;
}

struct PairingReport {
  double hop_residual = 0.0;           // rebuilt H_hop vs build_hop, relative Frobenius
  double q_residual = 0.0;             // rebuilt Q vs build_q_operator, relative Frobenius
  double pair_commutator_residual = 0.0;  // max_k ||[H_hop, b_2k b_2k-1]||_F / (||H|| ||P_k||)
  double anticommutator_residual = 0.0;   // max_ij ||{b_i, b_j†} - delta_ij||_F / sqrt(dim)
  double orthogonality_residual = 0.0;    // ||R^T R - 1||_max
  double spectrum_pairing_residual = 0.0; // single-particle E -> -E symmetry

  [[nodiscard]] bool pass(double tol = kScarTolerance) const {
    return hop_residual < tol && q_residual < tol && pair_commutator_residual < tol && anticommutator_residual < tol &&
           orthogonality_residual < tol && spectrum_pairing_residual < tol;
  }
};

/// Many-body checks on the N = `n_particles` sector. The anticommutators need
/// N-1 and N+1 as well, so 1 <= N <= n_sites - 1 is required.
inline PairingReport verify_pairing(const PairingDecomposition& pd, const CouplingSet& cs, int n_particles) {
  const int n = cs.n_sites();
  if (n_particles < 2 || n_particles > n - 1)
    throw InvalidParameter("pairing check sector must satisfy 2 <= N <= n_sites - 1");
  PairingReport rep;
  const int r = pd.rank;
  const auto basis = make_basis(n, n_particles);

  rep.orthogonality_residual =
      (pd.mode_matrix.transpose() * pd.mode_matrix - Eigen::MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff();

  // (a) sum_k eps_k (b†_{2k-1} b_{2k-1} - b†_{2k} b_{2k}) as a many-body operator.
  Eigen::MatrixXd h_rebuilt = Eigen::MatrixXd::Zero(n, n);
  for (int k = 0; k < r; ++k) {
    const Eigen::VectorXd w_odd = pd.b_modes.col(2 * k), w_even = pd.b_modes.col(2 * k + 1);
    h_rebuilt += pd.epsilons[k] * (w_odd * w_odd.transpose() - w_even * w_even.transpose());
  }
  const SectorOperator hop = build_hop(cs, basis);
  const SectorOperator hop_rebuilt = build_one_body(h_rebuilt.cast<Complex>(), basis);
  const double hop_f = std::max(frobenius_norm(hop), 1e-300);
  rep.hop_residual = frobenius_norm(hop_rebuilt - hop) / hop_f;

  // (b) 2 sum_k eps_k b_{2k} b_{2k-1}
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(n, n);
  for (int k = 0; k < r; ++k) g += 2.0 * pd.epsilons[k] * pd.b_modes.col(2 * k + 1) * pd.b_modes.col(2 * k).transpose();
  const SectorOperator q = build_q_operator(cs, basis);
  const SectorOperator q_rebuilt = build_pair_annihilation(g, basis);
  rep.q_residual = frobenius_norm(q_rebuilt - q) / std::max(frobenius_norm(q), 1e-300);

  // (c) [H_hop, b_{2k} b_{2k-1}] = 0 for each k separately.
  const auto lower = make_basis(n, n_particles - 2);
  const SectorOperator hop_lower = build_hop(cs, lower);
  const double h_norm = std::max(spectral_norm_estimate(hop), spectral_norm_estimate(hop_lower));
  for (int k = 0; k < r; ++k) {
    const Eigen::MatrixXd gk = pd.b_modes.col(2 * k + 1) * pd.b_modes.col(2 * k).transpose();
    const SectorOperator pk = build_pair_annihilation(gk, basis);
    const SectorOperator comm = hop_lower * pk - pk * hop;
    const double scale = std::max(h_norm * spectral_norm_estimate(pk), 1e-300);
    rep.pair_commutator_residual = std::max(rep.pair_commutator_residual, frobenius_norm(comm) / scale);
  }

  // (d) {b_i, b†_j} = delta_ij on the N sector.
  const auto up = make_basis(n, n_particles + 1);
  const auto down = make_basis(n, n_particles - 1);
  std::vector<SectorOperator> b_down, b_up, bdag_here, bdag_down;
  for (int i = 0; i < 2 * r; ++i) {
    const Eigen::VectorXd w = pd.b_modes.col(i);
    b_down.push_back(build_mode_operator(w, Action::annihilate, basis));  // N -> N-1
    b_up.push_back(build_mode_operator(w, Action::annihilate, up));       // N+1 -> N
    bdag_here.push_back(build_mode_operator(w, Action::create, basis));   // N -> N+1
    bdag_down.push_back(build_mode_operator(w, Action::create, down));    // N-1 -> N
  }
  const SectorOperator id = identity_operator(basis);
  const double scale = std::sqrt(static_cast<double>(basis->size()));
  for (int i = 0; i < 2 * r; ++i)
    for (int j = 0; j < 2 * r; ++j) {
      SectorOperator anti = b_up[i] * bdag_here[j] + bdag_down[j] * b_down[i];
      if (i == j) anti = anti - id;
      rep.anticommutator_residual = std::max(rep.anticommutator_residual, frobenius_norm(anti) / scale);
    }

  // Single-particle spectrum symmetric under E -> -E.
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(cs.T, Eigen::EigenvaluesOnly);
  const Eigen::VectorXd e = es.eigenvalues();
  const double e_scale = std::max(e.cwiseAbs().maxCoeff(), 1e-300);
  for (Eigen::Index i = 0; i < e.size(); ++i)
    rep.spectrum_pairing_residual = std::max(rep.spectrum_pairing_residual, std::abs(e[i] + e[e.size() - 1 - i]) / e_scale);
  return rep;
}

}  // namespace qmbs
