#pragma once

// Fixed-particle-number occupation bases and fermionic operator action.
//
// Bit x of a configuration is site x (label x + 1). A configuration stands for
// c†_{x1} c†_{x2} ... c†_{xN} |vac> with x1 < x2 < ... < xN, ascending left to
// right. Under this order c_x and c†_x pick up (-1)^(occupied sites below x).

#include <Eigen/Dense>

#include <bit>
#include <complex>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "qmbs/error.hpp"

namespace qmbs {

using Config = std::uint64_t;
using Complex = std::complex<double>;

inline constexpr int kMaxSites = 62;

inline double binomial(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  double out = 1.0;
  for (int i = 1; i <= k; ++i) out = out * (n - k + i) / i;
  return out;
}

inline int occupied_below(Config c, int site) {
  return std::popcount(c & ((Config{1} << site) - 1));
}

inline int parity_sign(int count) { return (count & 1) != 0 ? -1 : 1; }

/// Default limit on sector dimension before any allocation happens.
inline constexpr std::size_t kDefaultSectorCap = 5'000'000;

class FockBasis {
 public:
  FockBasis(int n_sites, int n_particles, std::size_t max_dim = kDefaultSectorCap)
      : n_sites_(n_sites), n_particles_(n_particles) {
    if (n_sites < 1 || n_sites > kMaxSites)
      throw InvalidParameter("n_sites must be in [1, " + std::to_string(kMaxSites) + "]");
    if (n_particles < 0 || n_particles > n_sites)
      throw InvalidParameter("particle number " + std::to_string(n_particles) + " out of range [0, " +
                             std::to_string(n_sites) + "]");
    const double dim = binomial(n_sites, n_particles);
    if (dim > static_cast<double>(max_dim))
      throw CapacityExceeded("sector C(" + std::to_string(n_sites) + "," + std::to_string(n_particles) +
                                 ") has dimension " + std::to_string(static_cast<long long>(dim)) +
                                 ", above the cap " + std::to_string(max_dim),
                             dim * 16.0);
    build_ranking_table();
    configs_.reserve(static_cast<std::size_t>(dim));
    if (n_particles == 0) {
      configs_.push_back(0);
      return;
    }
    // Gosper's hack walks fixed-popcount integers in increasing order.
    Config c = (Config{1} << n_particles) - 1;
    const Config limit = Config{1} << n_sites;
    while (c < limit) {
      configs_.push_back(c);
      const Config low = c & (~c + 1);
      const Config ripple = c + low;
      c = (((ripple ^ c) >> 2) / low) | ripple;
    }
  }

  [[nodiscard]] int n_sites() const { return n_sites_; }
  [[nodiscard]] int n_particles() const { return n_particles_; }
  [[nodiscard]] std::size_t size() const { return configs_.size(); }
  [[nodiscard]] const std::vector<Config>& configs() const { return configs_; }
  [[nodiscard]] Config config(std::size_t i) const { return configs_[i]; }

  /// Combinadic rank; equals the position in the increasing config list.
  [[nodiscard]] std::size_t index(Config c) const {
    std::size_t rank = 0;
    int j = 0;
    while (c != 0) {
      const int pos = std::countr_zero(c);
      rank += choose_[pos][j + 1];
      c &= c - 1;
      ++j;
    }
    return rank;
  }

  [[nodiscard]] std::optional<std::size_t> find(Config c) const {
    if (std::popcount(c) != n_particles_ || (c >> n_sites_) != 0) return std::nullopt;
    return index(c);
  }

  friend bool operator==(const FockBasis& a, const FockBasis& b) {
    return a.n_sites_ == b.n_sites_ && a.n_particles_ == b.n_particles_;
  }

 private:
  void build_ranking_table() {
    choose_.assign(n_sites_ + 1, std::vector<std::size_t>(n_particles_ + 2, 0));
    for (int n = 0; n <= n_sites_; ++n) {
      choose_[n][0] = 1;
      for (int k = 1; k <= std::min(n, n_particles_ + 1); ++k)
        choose_[n][k] = choose_[n - 1][k - 1] + (k <= n - 1 ? choose_[n - 1][k] : 0);
    }
  }

  int n_sites_;
  int n_particles_;
  std::vector<Config> configs_;
  std::vector<std::vector<std::size_t>> choose_;
};

using BasisPtr = std::shared_ptr<const FockBasis>;

inline BasisPtr make_basis(int n_sites, int n_particles, std::size_t max_dim = kDefaultSectorCap) {
  return std::make_shared<const FockBasis>(n_sites, n_particles, max_dim);
}

inline BasisPtr enumerate_sector(int n_sites, int n_particles) { return make_basis(n_sites, n_particles); }

struct StateVector {
  BasisPtr basis;
  Eigen::VectorXcd amplitudes;

  StateVector() = default;
  explicit StateVector(BasisPtr b) : basis(std::move(b)), amplitudes(Eigen::VectorXcd::Zero(basis->size())) {}
  StateVector(BasisPtr b, Eigen::VectorXcd amps) : basis(std::move(b)), amplitudes(std::move(amps)) {
    if (static_cast<std::size_t>(amplitudes.size()) != basis->size())
      throw InvalidParameter("amplitude vector length differs from basis size");
  }

  [[nodiscard]] int n_particles() const { return basis->n_particles(); }
  [[nodiscard]] int n_sites() const { return basis->n_sites(); }
  [[nodiscard]] double norm() const { return amplitudes.norm(); }

  StateVector& normalize() {
    const double nrm = norm();
    if (nrm == 0.0) throw DegenerateInput("cannot normalize the zero vector");
    amplitudes /= nrm;
    return *this;
  }
  [[nodiscard]] StateVector normalized() const {
    StateVector out = *this;
    out.normalize();
    return out;
  }
};

inline bool same_sector(const StateVector& a, const StateVector& b) { return *a.basis == *b.basis; }

inline Complex inner(const StateVector& a, const StateVector& b) {
  if (!same_sector(a, b)) throw SectorMismatch("inner product across different sectors");
  return a.amplitudes.dot(b.amplitudes);  // conjugates a
}

enum class Action { create, annihilate };

struct FermionOp {
  int site;
  Action action;
};

inline FermionOp cdag(int site) { return {site, Action::create}; }
inline FermionOp cop(int site) { return {site, Action::annihilate}; }

/// Acts with one c or c† on a configuration. Empty result for a killed state.
inline std::optional<std::pair<Config, int>> apply_op(Config c, FermionOp op) {
  const Config bit = Config{1} << op.site;
  const bool occupied = (c & bit) != 0;
  if (op.action == Action::create ? occupied : !occupied) return std::nullopt;
  return std::pair{c ^ bit, parity_sign(occupied_below(c, op.site))};
}

/// Applies a product of operators written left to right; the rightmost acts first.
inline StateVector apply_monomial(const std::vector<FermionOp>& ops, const StateVector& state) {
  int delta = 0;
  for (const auto& op : ops) delta += op.action == Action::create ? 1 : -1;
  const int target_n = state.n_particles() + delta;
  if (target_n < 0 || target_n > state.n_sites()) {
    // Every term is killed; return a zero vector in the nearest valid sector.
    StateVector zero(make_basis(state.n_sites(), target_n < 0 ? 0 : state.n_sites()));
    return zero;
  }
  StateVector out(target_n == state.n_particles() ? state.basis : make_basis(state.n_sites(), target_n));
  const auto& configs = state.basis->configs();
  for (std::size_t i = 0; i < configs.size(); ++i) {
    const Complex amp = state.amplitudes[static_cast<Eigen::Index>(i)];
    if (amp == Complex{}) continue;
    Config c = configs[i];
    int sign = 1;
    bool alive = true;
    for (auto it = ops.rbegin(); it != ops.rend(); ++it) {
      const auto r = apply_op(c, *it);
      if (!r) {
        alive = false;
        break;
      }
      c = r->first;
      sign *= r->second;
    }
    if (alive) out.amplitudes[static_cast<Eigen::Index>(out.basis->index(c))] += static_cast<double>(sign) * amp;
  }
  return out;
}

inline StateVector basis_state(BasisPtr basis, Config c, Complex amp = 1.0) {
  StateVector out(std::move(basis));
  const auto idx = out.basis->find(c);
  if (!idx) throw InvalidParameter("configuration not in sector");
  out.amplitudes[static_cast<Eigen::Index>(*idx)] = amp;
  return out;
}

inline StateVector vacuum_state(int n_sites) { return basis_state(make_basis(n_sites, 0), 0); }

/// prod_x c†_x |vac> with c†_1 leftmost: the canonical all-occupied configuration, amplitude +1.
inline StateVector filled_state(int n_sites) {
  const Config all = n_sites == 64 ? ~Config{0} : (Config{1} << n_sites) - 1;
  return basis_state(make_basis(n_sites, n_sites), all);
}

/// Site 1 is the leftmost character.
inline std::string config_bitstring(Config c, int n_sites) {
  std::string s(static_cast<std::size_t>(n_sites), '0');
  for (int x = 0; x < n_sites; ++x)
    if ((c >> x) & 1U) s[static_cast<std::size_t>(x)] = '1';
  return s;
}

inline Config parse_bitstring(const std::string& s) {
  Config c = 0;
  for (std::size_t x = 0; x < s.size(); ++x) {
    if (s[x] == '1') c |= Config{1} << x;
    else if (s[x] != '0') throw InvalidParameter("bitstring may only contain 0 and 1");
  }
  return c;
}

}  // namespace qmbs
