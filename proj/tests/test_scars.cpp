#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "qmbs/scars.hpp"
#include "qmbs/spectra.hpp"

using namespace qmbs;

namespace {

CouplingSet bipartite(const LatticeSpec& lat, std::uint64_t seed, Interval t = {0.5, 1.5}) {
  return sample_couplings(lat, t, {-0.5, 0.5}, seed);
}

CouplingSet triangular(int rows, int cols, std::uint64_t seed, int q_power) {
  SamplingOptions o;
  o.mode = CouplingMode::nonbipartite;
  o.q_power = q_power;
  return sample_couplings(build_triangular(rows, cols), {0.5, 1.5}, {-0.5, 0.5}, seed, o);
}

OperatorFamily h_family(const CouplingSet& cs) {
  const int n = cs.n_sites();
  return build_family(n, all_sectors(n), [&](BasisPtr b) { return build_hamiltonian(cs, b); });
}

}  // namespace

TEST(Tower, KZeroIsFilledState) {
  const auto tower = build_scar_tower(bipartite(build_chain(6, Boundary::open), 1));
  EXPECT_EQ(tower.at(0).n_particles(), 6);
  EXPECT_EQ(tower.at(0).amplitudes[0], Complex(1.0));
  EXPECT_EQ(tower.k_max, 3);
  EXPECT_FALSE(tower.terminated_early);
}

TEST(Tower, TwoSiteRawVector) {
  const auto tower = build_scar_tower(bipartite(build_chain(2, Boundary::open), 1, {1.0, 1.0}));
  ASSERT_EQ(tower.k_max, 1);
  EXPECT_EQ(tower.at(1).n_particles(), 0);
  EXPECT_DOUBLE_EQ(tower.raw_norms[1], 2.0);
  EXPECT_EQ(tower.at(1).amplitudes[0], Complex(-1.0));
}

TEST(Tower, SixByThreeSectors) {
  const auto tower = build_scar_tower(bipartite(build_rectangular(6, 3, Boundary::open), 3));
  ASSERT_EQ(tower.k_max, 9);
  for (int k = 0; k <= 9; ++k) EXPECT_EQ(tower.at(k).n_particles(), 18 - 2 * k);
}

TEST(Tower, MatchesJordanWignerPowers) {
  const auto cs = bipartite(build_rectangular(4, 2, Boundary::open), 5);
  const oracle::DenseFock f(8);
  const auto tower = build_scar_tower(cs);
  Eigen::VectorXcd v = f.embed(filled_state(8));
  const auto q = f.pair(cs.Q);
  for (int k = 0; k <= 4; ++k) {
    EXPECT_NEAR(tower.raw_norms[static_cast<std::size_t>(k)], v.norm(), 1e-10 * v.norm());
    EXPECT_LT((f.embed(tower.at(k)) - v / v.norm()).norm(), 1e-12);
    v = q * v;
  }
}

TEST(VerifyScar, BipartiteTowers) {
  for (const auto& lat : {build_chain(6, Boundary::open), build_rectangular(4, 3, Boundary::open), build_rectangular(4, 4, Boundary::periodic)})
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
      const auto cs = bipartite(lat, seed);
      const auto tower = build_scar_tower(cs);
      for (const auto& psi : tower.states) EXPECT_LT(verify_scar(build_hamiltonian(cs, psi.basis), psi), 1e-10);
    }
}

TEST(VerifyScar, RandomVectorIsNotAnEigenstate) {
  const auto cs = bipartite(build_rectangular(4, 3, Boundary::open), 2);
  std::mt19937_64 g(1);
  std::normal_distribution<double> d;
  StateVector psi(make_basis(12, 6));
  for (auto& a : psi.amplitudes) a = Complex(d(g), d(g));
  psi.normalize();
  EXPECT_GT(verify_scar(build_hamiltonian(cs, psi.basis), psi), 0.05);
  EXPECT_THROW(verify_scar(build_hamiltonian(cs, make_basis(12, 4)), psi), SectorMismatch);
}

TEST(VerifyScar, TriangularOddPowers) {
  for (int p : {1, 3, 5}) {
    const auto cs = triangular(3, 3, 10 + static_cast<std::uint64_t>(p), p);
    const auto tower = build_scar_tower(cs);
    EXPECT_EQ(tower.k_max, 4);
    for (const auto& psi : tower.states) EXPECT_LT(verify_scar(build_hamiltonian(cs, psi.basis), psi), 1e-10) << p;
  }
}

TEST(Rsga1, BipartiteAndTriangularPass) {
  for (const auto& cs : {bipartite(build_rectangular(4, 2, Boundary::open), 4), triangular(2, 4, 2, 3)}) {
    const auto rep = verify_rsga1(h_family(cs), build_q_family(cs), filled_state(cs.n_sites()));
    EXPECT_TRUE(rep.pass()) << rep.cond_i << " " << rep.cond_ii << " " << rep.cond_iii;
  }
}

TEST(Rsga1, HoppingOnlyPasses) {
  const auto cs = bipartite(build_chain(8, Boundary::open), 3);
  const auto hop = build_family(8, all_sectors(8), [&](BasisPtr b) { return build_hop(cs, b); });
  EXPECT_TRUE(verify_rsga1(hop, build_q_family(cs), filled_state(8)).pass());
}

TEST(Rsga1, MutationBreaksSkewSymmetry) {
  const auto cs = bipartite(build_rectangular(4, 2, Boundary::open), 4);
  ASSERT_TRUE(verify_rsga1(h_family(cs), build_q_family(cs), filled_state(8)).pass());
  auto bad = cs;
  bad.Q(0, 1) += 0.3;  // q_01 != -q_10 now
  const auto rep = verify_rsga1(h_family(bad), build_q_family(bad), filled_state(8));
  EXPECT_GT(rep.cond_iii, 1e-6);
  EXPECT_FALSE(rep.pass());
}

TEST(Pairing, TwoSite) {
  const auto cs = bipartite(build_chain(2, Boundary::open), 1, {1.0, 1.0});
  const auto pd = pairing_decomposition(cs, {1, 2});
  ASSERT_EQ(pd.rank, 1);
  EXPECT_NEAR(pd.epsilons[0], 1.0, 1e-15);
  // Q = 2 eps_1 b_2 b_1 on |11> gives the -2 amplitude.
  const Eigen::MatrixXd g = 2.0 * pd.epsilons[0] * pd.b_modes.col(1) * pd.b_modes.col(0).transpose();
  const auto out = build_pair_annihilation(g, make_basis(2, 2)).apply(filled_state(2));
  EXPECT_NEAR(out.amplitudes[0].real(), -2.0, 1e-14);
}

TEST(Pairing, SingleParticleSpectrumStructure) {
  const auto lat = build_chain(7, Boundary::open);
  const auto cs = bipartite(lat, 6);
  const auto pd = pairing_decomposition(cs, *lat.labels);
  EXPECT_EQ(pd.rank, 3);
  std::vector<double> expected;
  for (int k = 0; k < pd.rank; ++k) {
    expected.push_back(pd.epsilons[k]);
    expected.push_back(-pd.epsilons[k]);
  }
  expected.push_back(0.0);
  std::sort(expected.begin(), expected.end());
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(cs.T);
  for (int i = 0; i < 7; ++i) EXPECT_NEAR(es.eigenvalues()[i], expected[static_cast<std::size_t>(i)], 1e-12);
  // R^T T R is block diagonal with [[0, eps], [eps, 0]] blocks.
  const Eigen::MatrixXd rt = pd.mode_matrix.transpose() * cs.T.real() * pd.mode_matrix;
  for (int k = 0; k < pd.rank; ++k) EXPECT_NEAR(rt(2 * k, 2 * k + 1), pd.epsilons[k], 1e-12);
}

TEST(Pairing, GenericRankOnFourByFour) {
  const auto lat = build_rectangular(4, 4, Boundary::open);
  const auto cs = bipartite(lat, 8);
  const auto pd = pairing_decomposition(cs, *lat.labels);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(cs.T.real());
  EXPECT_EQ(2 * pd.rank, static_cast<int>(svd.rank()));
  EXPECT_EQ(pd.rank, 8);
}

TEST(Pairing, ResidualsOnRandomChains) {
  const auto lat = build_chain(6, Boundary::open);
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto cs = bipartite(lat, seed);
    const auto pd = pairing_decomposition(cs, *lat.labels);
    for (int m = 2; m <= 5; ++m) {
      const auto rep = verify_pairing(pd, cs, m);
      EXPECT_TRUE(rep.pass()) << rep.hop_residual << " " << rep.q_residual << " " << rep.pair_commutator_residual << " "
                              << rep.anticommutator_residual << " " << rep.orthogonality_residual;
    }
  }
}

TEST(Pairing, DegenerateEpsilons) {
  const auto lat = build_chain(8, Boundary::periodic);
  const auto cs = bipartite(lat, 1, {1.0, 1.0});
  const auto pd = pairing_decomposition(cs, *lat.labels);
  EXPECT_NEAR(pd.epsilons[1], pd.epsilons[2], 1e-12);
  EXPECT_TRUE(verify_pairing(pd, cs, 4).pass());
}

TEST(Pairing, Errors) {
  const auto lat = build_chain(4, Boundary::open);
  const auto cs = bipartite(lat, 1);
  const auto pd = pairing_decomposition(cs, *lat.labels);
  EXPECT_THROW(verify_pairing(pd, cs, 1), InvalidParameter);
  EXPECT_THROW(verify_pairing(pd, cs, 4), InvalidParameter);
  EXPECT_THROW(pairing_decomposition(triangular(2, 2, 1, 1), {1, 2, 1, 2}), InvalidParameter);
}
