#pragma once

// Lattice graphs, sublattice labels, and seeded coupling matrices.
//
// Sites are stored 0-based. The integer label used in figures and in the
// product-state definition is index + 1; row-major order throughout.

#include <Eigen/Dense>

#include <algorithm>
#include <complex>
#include <cstdint>
#include <optional>
#include <queue>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "qmbs/error.hpp"
#include "qmbs/rng.hpp"

namespace qmbs {

using Bond = std::pair<int, int>;

enum class Boundary { open, periodic };

struct LatticeSpec {
  int n_sites = 0;
  std::vector<Bond> bonds;                 // first < second, sorted, unique
  std::optional<std::vector<int>> labels;  // 1 or 2 per site when bipartite
  std::string geometry_tag;

  [[nodiscard]] std::vector<int> sublattice(int label) const {
    std::vector<int> out;
    if (!labels) return out;
    for (int x = 0; x < n_sites; ++x)
      if ((*labels)[x] == label) out.push_back(x);
    return out;
  }
  [[nodiscard]] bool bipartite() const { return labels.has_value(); }
};

/// Sorts each pair, drops duplicates, rejects self-loops and out-of-range sites.
inline std::vector<Bond> normalize_bonds(int n_sites, std::vector<Bond> bonds) {
  for (auto& [a, b] : bonds) {
    if (a == b) throw InvalidParameter("self-loop bond at site " + std::to_string(a));
    if (a < 0 || b < 0 || a >= n_sites || b >= n_sites)
      throw InvalidParameter("bond endpoint out of range");
    if (a > b) std::swap(a, b);
  }
  std::sort(bonds.begin(), bonds.end());
  bonds.erase(std::unique(bonds.begin(), bonds.end()), bonds.end());
  return bonds;
}

struct TwoColoring {
  std::optional<std::vector<int>> labels;  // 1/2 per site on success
  std::vector<int> odd_cycle;              // on failure
};

/// BFS two-coloring. Each component's lowest site gets label 1.
inline TwoColoring two_color(int n_sites, const std::vector<Bond>& bonds) {
  std::vector<std::vector<int>> adj(n_sites);
  for (auto [a, b] : bonds) {
    adj[a].push_back(b);
    adj[b].push_back(a);
  }
  std::vector<int> color(n_sites, 0), parent(n_sites, -1), depth(n_sites, 0);
  for (int root = 0; root < n_sites; ++root) {
    if (color[root] != 0) continue;
    color[root] = 1;
    std::queue<int> frontier;
    frontier.push(root);
    while (!frontier.empty()) {
      const int u = frontier.front();
      frontier.pop();
      for (int v : adj[u]) {
        if (color[v] == 0) {
          color[v] = 3 - color[u];
          parent[v] = u;
          depth[v] = depth[u] + 1;
          frontier.push(v);
        } else if (color[v] == color[u]) {
          // Walk both ends up the BFS tree to their common ancestor.
          std::vector<int> left{u}, right{v};
          int a = u, b = v;
          while (depth[a] > depth[b]) left.push_back(a = parent[a]);
          while (depth[b] > depth[a]) right.push_back(b = parent[b]);
          while (a != b) {
            left.push_back(a = parent[a]);
            right.push_back(b = parent[b]);
          }
          right.pop_back();  // common ancestor already in left
          std::reverse(right.begin(), right.end());
          left.insert(left.end(), right.begin(), right.end());
          return {std::nullopt, left};
        }
      }
    }
  }
  return {color, {}};
}

inline LatticeSpec build_chain(int length, Boundary boundary) {
  if (length < 1) throw InvalidParameter("chain length must be >= 1");
  std::vector<Bond> bonds;
  for (int j = 0; j + 1 < length; ++j) bonds.emplace_back(j, j + 1);
  if (boundary == Boundary::periodic && length > 1) {
    if (length % 2 != 0)
      throw BipartitionError("periodic chain with odd length " + std::to_string(length) +
                                 " has no bipartition",
                             [&] {
                               std::vector<int> c(length);
                               for (int j = 0; j < length; ++j) c[j] = j;
                               return c;
                             }());
    bonds.emplace_back(0, length - 1);
  }
  LatticeSpec spec;
  spec.n_sites = length;
  spec.bonds = normalize_bonds(length, std::move(bonds));
  std::vector<int> labels(length);
  for (int j = 0; j < length; ++j) labels[j] = j % 2 == 0 ? 1 : 2;
  spec.labels = labels;
  spec.geometry_tag = std::string("chain-") + std::to_string(length) +
                      (boundary == Boundary::open ? "-open" : "-periodic");
  return spec;
}

/// Square grid, rows x cols, site index r * cols + c, checkerboard labels.
/// A direction of extent 1 is never wrapped.
inline LatticeSpec build_rectangular(int rows, int cols, Boundary boundary) {
  if (rows < 1 || cols < 1) throw InvalidParameter("rows and cols must be >= 1");
  auto site = [cols](int r, int c) { return r * cols + c; };
  std::vector<Bond> bonds;
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) {
      if (c + 1 < cols) bonds.emplace_back(site(r, c), site(r, c + 1));
      if (r + 1 < rows) bonds.emplace_back(site(r, c), site(r + 1, c));
    }
  if (boundary == Boundary::periodic) {
    for (auto [extent, name] : {std::pair{rows, "rows"}, std::pair{cols, "cols"}})
      if (extent > 1 && extent % 2 != 0)
        throw BipartitionError(std::string("periodic wrap along odd extent (") + name + " = " +
                                   std::to_string(extent) + ") has no bipartition",
                               {});
    if (cols > 1)
      for (int r = 0; r < rows; ++r) bonds.emplace_back(site(r, 0), site(r, cols - 1));
    if (rows > 1)
      for (int c = 0; c < cols; ++c) bonds.emplace_back(site(0, c), site(rows - 1, c));
  }
  LatticeSpec spec;
  spec.n_sites = rows * cols;
  spec.bonds = normalize_bonds(spec.n_sites, std::move(bonds));
  std::vector<int> labels(spec.n_sites);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) labels[site(r, c)] = (r + c) % 2 == 0 ? 1 : 2;
  spec.labels = labels;
  spec.geometry_tag = "rect-" + std::to_string(rows) + "x" + std::to_string(cols) +
                      (boundary == Boundary::open ? "-open" : "-periodic");
  return spec;
}

/// Triangular lattice with open boundaries: square grid plus the (r,c)-(r+1,c+1)
/// diagonal of every plaquette. No sublattice labels.
inline LatticeSpec build_triangular(int rows, int cols) {
  if (rows < 2 || cols < 2) throw InvalidParameter("triangular lattice needs rows, cols >= 2");
  auto site = [cols](int r, int c) { return r * cols + c; };
  std::vector<Bond> bonds;
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) {
      if (c + 1 < cols) bonds.emplace_back(site(r, c), site(r, c + 1));
      if (r + 1 < rows) bonds.emplace_back(site(r, c), site(r + 1, c));
      if (r + 1 < rows && c + 1 < cols) bonds.emplace_back(site(r, c), site(r + 1, c + 1));
    }
  LatticeSpec spec;
  spec.n_sites = rows * cols;
  spec.bonds = normalize_bonds(spec.n_sites, std::move(bonds));
  spec.geometry_tag = "tri-" + std::to_string(rows) + "x" + std::to_string(cols);
  return spec;
}

/// Lattice from an explicit bond list; labels are detected by BFS coloring
/// and left empty when the graph has an odd cycle.
inline LatticeSpec build_custom(int n_sites, std::vector<Bond> bonds, std::string tag) {
  if (n_sites < 1) throw InvalidParameter("n_sites must be >= 1");
  LatticeSpec spec;
  spec.n_sites = n_sites;
  spec.bonds = normalize_bonds(n_sites, std::move(bonds));
  spec.labels = two_color(n_sites, spec.bonds).labels;
  spec.geometry_tag = std::move(tag);
  return spec;
}

/// Throws if bonds are malformed or labels are not a proper two-coloring.
inline void validate(const LatticeSpec& spec) {
  if (spec.n_sites < 1) throw InvalidParameter("lattice has no sites");
  if (normalize_bonds(spec.n_sites, spec.bonds) != spec.bonds)
    throw InvalidParameter("bond list is not normalized (sorted, unique, first < second)");
  if (spec.labels) {
    if (static_cast<int>(spec.labels->size()) != spec.n_sites)
      throw InvalidParameter("label vector size differs from n_sites");
    for (int l : *spec.labels)
      if (l != 1 && l != 2) throw InvalidParameter("sublattice labels must be 1 or 2");
    for (auto [a, b] : spec.bonds)
      if ((*spec.labels)[a] == (*spec.labels)[b])
        throw BipartitionError("bond (" + std::to_string(a) + "," + std::to_string(b) +
                                   ") joins sites of the same sublattice",
                               {a, b});
  }
}

// ---------------------------------------------------------------------------
// Couplings

enum class CouplingMode { bipartite, nonbipartite };

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  friend bool operator==(const Interval&, const Interval&) = default;
};

struct CouplingSet {
  CouplingMode mode = CouplingMode::bipartite;
  int q_power = 1;
  Eigen::MatrixXcd T;                // Hermitian hopping
  Eigen::MatrixXd Q;                 // real skew-symmetric pair matrix
  std::optional<Eigen::MatrixXd> K;  // nonbipartite mode: T = iK
  Eigen::VectorXd A;
  std::optional<Eigen::VectorXd> B;  // parent-Hamiltonian weights
  std::uint64_t seed = 0;
  Interval t_range;
  Interval a_range;
  std::optional<Interval> b_range;

  [[nodiscard]] int n_sites() const { return static_cast<int>(A.size()); }
};

struct SamplingOptions {
  CouplingMode mode = CouplingMode::bipartite;
  int q_power = 1;
  std::optional<Interval> b_range;  // draws B when set
};

inline Eigen::MatrixXd odd_matrix_power(const Eigen::MatrixXd& K, int power) {
  if (power < 1 || power % 2 == 0)
    throw InvalidParameter("q_power must be a positive odd integer, got " + std::to_string(power));
  Eigen::MatrixXd out = K;
  for (int p = 1; p < power; ++p) out = out * K;
  return out;
}

/// Q from T on a bipartite lattice: q_xy = t_xy for x in sublattice 1, -t_xy for x in 2.
inline Eigen::MatrixXd bipartite_pair_matrix(const Eigen::MatrixXd& T, const std::vector<int>& labels) {
  const auto n = T.rows();
  Eigen::MatrixXd Q = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index x = 0; x < n; ++x)
    for (Eigen::Index y = 0; y < n; ++y) {
      if (labels[x] == 1 && labels[y] == 2) Q(x, y) = T(x, y);
      if (labels[x] == 2 && labels[y] == 1) Q(x, y) = -T(x, y);
    }
  return Q;
}

/// Draw order is part of the reproducibility contract: one hopping draw per bond
/// in sorted bond order, then one A draw per site, then one B draw per site, each
/// from its own substream.
inline CouplingSet sample_couplings(const LatticeSpec& spec, Interval t_range, Interval a_range,
                                    std::uint64_t seed, const SamplingOptions& opts = {}) {
  const int n = spec.n_sites;
  CouplingSet cs;
  cs.mode = opts.mode;
  cs.q_power = opts.q_power;
  cs.seed = seed;
  cs.t_range = t_range;
  cs.a_range = a_range;
  cs.b_range = opts.b_range;

  Rng hop(seed, Stream::hopping);
  Eigen::MatrixXd bond_weights = Eigen::MatrixXd::Zero(n, n);
  if (opts.mode == CouplingMode::bipartite) {
    if (!spec.labels) throw InvalidParameter("bipartite coupling mode requires sublattice labels");
    for (auto [x, y] : spec.bonds) bond_weights(x, y) = bond_weights(y, x) = hop.uniform(t_range.lo, t_range.hi);
    cs.T = bond_weights.cast<std::complex<double>>();
    cs.Q = bipartite_pair_matrix(bond_weights, *spec.labels);
  } else {
    if (opts.q_power < 1 || opts.q_power % 2 == 0)
      throw InvalidParameter("q_power must be a positive odd integer, got " + std::to_string(opts.q_power));
    for (auto [x, y] : spec.bonds) {
      const double k = hop.uniform(t_range.lo, t_range.hi);
      bond_weights(x, y) = k;
      bond_weights(y, x) = -k;
    }
    cs.K = bond_weights;
    cs.T = std::complex<double>(0.0, 1.0) * bond_weights.cast<std::complex<double>>();
    const Eigen::MatrixXd power = odd_matrix_power(bond_weights, opts.q_power);
    // Roundoff in the product leaves a ~1e-16 symmetric part; drop it so Q is
    // exactly skew with an exactly zero diagonal.
    cs.Q = 0.5 * (power - power.transpose());
  }

  Rng onsite(seed, Stream::onsite);
  cs.A.resize(n);
  for (int x = 0; x < n; ++x) cs.A[x] = onsite.uniform(a_range.lo, a_range.hi);

  if (opts.b_range) {
    Rng parent(seed, Stream::parent);
    Eigen::VectorXd B(n);
    for (int x = 0; x < n; ++x) B[x] = parent.uniform(opts.b_range->lo, opts.b_range->hi);
    cs.B = B;
  }
  return cs;
}

struct HypothesisReport {
  bool equal_sublattices = false;
  bool regular = false;
  bool connected = false;
  double sigma_min = 0.0;
  double sigma_max = 0.0;

  [[nodiscard]] bool all() const { return equal_sublattices && regular && connected; }
};

inline constexpr double kRegularityTolerance = 1e-10;

/// Uniqueness-theorem preconditions. regular: sigma_min > 1e-10 sigma_max;
/// connected: the graph of nonzero Q entries is connected.
inline HypothesisReport check_theorem_hypotheses(const Eigen::MatrixXd& Q, const std::vector<int>& labels) {
  HypothesisReport rep;
  const auto n = static_cast<int>(Q.rows());
  const auto n1 = std::count(labels.begin(), labels.end(), 1);
  rep.equal_sublattices = 2 * n1 == static_cast<long>(labels.size());

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(Q);
  const auto& sv = svd.singularValues();
  rep.sigma_max = n > 0 ? sv(0) : 0.0;
  rep.sigma_min = n > 0 ? sv(n - 1) : 0.0;
  rep.regular = n > 0 && rep.sigma_max > 0.0 && rep.sigma_min > kRegularityTolerance * rep.sigma_max;

  std::vector<bool> seen(n, false);
  std::vector<int> stack{0};
  int reached = 0;
  if (n > 0) seen[0] = true;
  while (n > 0 && !stack.empty()) {
    const int u = stack.back();
    stack.pop_back();
    ++reached;
    for (int v = 0; v < n; ++v)
      if (!seen[v] && (Q(u, v) != 0.0 || Q(v, u) != 0.0)) {
        seen[v] = true;
        stack.push_back(v);
      }
  }
  rep.connected = n > 0 && reached == n;
  return rep;
}

}  // namespace qmbs
