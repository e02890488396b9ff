#include <gtest/gtest.h>

#include "oracles.hpp"
#include "qmbs/dynamics.hpp"
#include "qmbs/scars.hpp"

using namespace qmbs;

namespace {

/// exp(-iHt) psi by a truncated Taylor series over short steps.
Eigen::VectorXcd taylor_propagate(const SparseMatrix& h, Eigen::VectorXcd v, double t, int steps = 200, int order = 30) {
  const double dt = t / steps;
  for (int s = 0; s < steps; ++s) {
    Eigen::VectorXcd term = v, sum = v;
    for (int k = 1; k <= order; ++k) {
      term = (Complex(0.0, -dt) / static_cast<double>(k)) * (h * term);
      sum += term;
    }
    v = sum;
  }
  return v;
}

struct QuenchSetup {
  LatticeSpec lat = build_rectangular(4, 2, Boundary::open);
  CouplingSet cs = sample_couplings(lat, {0.5, 1.5}, {-0.5, 0.5}, 3);
  SectorOperator h = build_hamiltonian(cs, make_basis(8, 4));
  SpectrumResult spec = diagonalize(h, true);
};

}  // namespace

TEST(ProductState, Examples) {
  const auto full = product_state(6, 6);
  EXPECT_EQ(full.amplitudes[0], Complex(-1.0));  // (-1)^(6*5/2)
  oracle::Symbolic s = oracle::Symbolic::vacuum();
  for (int x = 0; x < 6; ++x) s = s.create(x);  // c†_6 ... c†_1 |vac>
  EXPECT_EQ(s.coefficient({0, 1, 2, 3, 4, 5}), -1.0);
  const auto one = product_state(6, 1);
  EXPECT_EQ(one.basis->config(0), 0b1U);
  EXPECT_EQ(one.amplitudes[0], Complex(1.0));
  const auto p8 = product_state(build_rectangular(6, 3, Boundary::open), 8);
  const auto idx = p8.basis->index(0xFF);
  EXPECT_EQ(std::abs(p8.amplitudes[static_cast<Eigen::Index>(idx)]), 1.0);
  EXPECT_EQ(p8.amplitudes[static_cast<Eigen::Index>(idx)], Complex(1.0));  // 8*7/2 = 28 even
  EXPECT_THROW(product_state(6, 0), InvalidParameter);
  EXPECT_THROW(product_state(6, 7), InvalidParameter);
}

TEST(UniformPair, EqualsScarForConstantCouplings) {
  for (const auto& lat : {build_rectangular(4, 2, Boundary::open), build_chain(6, Boundary::periodic)}) {
    const auto cs = sample_couplings(lat, {1.0, 1.0}, {-0.5, 0.5}, 1);
    const auto tower = build_scar_tower(cs);
    for (int k = 1; k <= tower.k_max; ++k) EXPECT_LT((uniform_pair_state(lat, k).amplitudes - tower.at(k).amplitudes).norm(), 1e-12);
  }
}

TEST(UniformPair, Examples) {
  const auto two = uniform_pair_state(build_chain(2, Boundary::open), 1);
  EXPECT_EQ(two.n_particles(), 0);
  EXPECT_NEAR(std::abs(two.amplitudes[0]), 1.0, 1e-15);
  const auto s = uniform_pair_state(build_rectangular(6, 3, Boundary::open), 5);
  EXPECT_EQ(s.n_particles(), 8);
  EXPECT_NEAR(s.norm(), 1.0, 1e-12);
  EXPECT_THROW(uniform_pair_state(build_chain(4, Boundary::open), 0), InvalidParameter);
  EXPECT_THROW(uniform_pair_state(build_chain(4, Boundary::open), 3), InvalidParameter);
  // One bond plus an isolated site: the second pair has nowhere to go.
  EXPECT_THROW(uniform_pair_state(build_custom(4, {{0, 1}}, "dimer+2"), 2), DegenerateInput);
}

TEST(UniformPair, NonbipartiteOrientation) {
  const auto lat = build_triangular(2, 2);
  const auto g = uniform_pair_matrix(lat);
  for (auto [x, y] : lat.bonds) {
    EXPECT_EQ(g(x, y), 1.0);
    EXPECT_EQ(g(y, x), 0.0);
  }
}

TEST(Evolve, EigenstateIsStationary) {
  QuenchSetup s;
  const auto psi = eigenstate(s.spec, 17);
  const auto tr = evolve(s.spec, psi, log_time_grid(), half_system(8));
  for (double f : tr.fidelity) EXPECT_NEAR(f, 1.0, 1e-10);
}

TEST(Evolve, Invariants) {
  QuenchSetup s;
  const auto psi0 = product_state(8, 4);
  auto times = log_time_grid();
  times.insert(times.begin(), 0.0);
  const auto tr = evolve(s.spec, psi0, times, half_system(8));
  EXPECT_NEAR(tr.fidelity[0], 1.0, 1e-10);
  EXPECT_NEAR(tr.entropy[0], 0.0, 1e-10);
  EXPECT_DOUBLE_EQ(tr.baseline, average_random_entropy(8, 4));
  for (double n : tr.norm) EXPECT_NEAR(n, 1.0, 1e-10);
  const SpectralPropagator prop(s.spec, psi0);
  const auto tower = build_scar_tower(s.cs);
  const auto& scar = *tower.in_sector(4);
  const double e0 = inner(psi0, s.h.apply(psi0)).real();
  const double o0 = std::abs(inner(scar, psi0));
  for (double t : {0.3, 2.0, 17.0, 95.0}) {
    const auto psi_t = prop.at(t);
    EXPECT_NEAR(inner(psi_t, s.h.apply(psi_t)).real(), e0, 1e-8 * std::max(1.0, std::abs(e0)));
    EXPECT_NEAR(std::abs(inner(scar, psi_t)), o0, 1e-10);
    EXPECT_NEAR(prop.fidelity(t), std::abs(inner(psi_t, psi0)), 1e-12);
  }
}

TEST(Evolve, MatchesTaylorOracle) {
  QuenchSetup s;
  const auto psi0 = uniform_pair_state(s.lat, 2);
  const SpectralPropagator prop(s.spec, psi0);
  const Eigen::VectorXcd ref = taylor_propagate(s.h.matrix, psi0.amplitudes, 1.0);
  EXPECT_LT((prop.at(1.0).amplitudes - ref).norm(), 1e-8);
}

TEST(Evolve, Errors) {
  QuenchSetup s;
  EXPECT_THROW(evolve(s.spec, product_state(8, 3), {1.0}, half_system(8)), SectorMismatch);
  auto bad = product_state(8, 4);
  bad.amplitudes *= 2.0;
  EXPECT_THROW(evolve(s.spec, bad, {1.0}, half_system(8)), InvalidParameter);
  const auto values_only = diagonalize(s.h, false);
  EXPECT_THROW(SpectralPropagator(values_only, product_state(8, 4)), InvalidParameter);
}

TEST(TimeGrid, LogSpaced) {
  const auto t = log_time_grid();
  ASSERT_EQ(t.size(), 200U);
  EXPECT_NEAR(t.front(), 0.1, 1e-15);
  EXPECT_NEAR(t.back(), 100.0, 1e-12);
  EXPECT_NEAR(t[1] / t[0], t[199] / t[198], 1e-12);
  EXPECT_THROW(log_time_grid(0.0, 1.0, 10), InvalidParameter);
}
